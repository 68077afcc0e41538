#ifndef SREL_MODEL_JSON_HPP
#define SREL_MODEL_JSON_HPP

#include <string>

#include "json.hpp"
#include "srel/models.hpp"

namespace srel {

// Model specification document: {family, dim, parameters, x0}, matrices as
// row-major nested arrays, piecewise-constant G as {breakpoints, values}.
// Doubles are emitted in shortest round-trip form, so parse(serialize(m))
// reproduces every parameter bit-exactly and serialize is stable on its own
// output.
nlohmann::json model_to_json(const ModelSpec& model);
ModelSpec model_from_json(const nlohmann::json& j);

std::string serialize_model(const ModelSpec& model);
ModelSpec parse_model(const std::string& text);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

}  // namespace srel

#endif
