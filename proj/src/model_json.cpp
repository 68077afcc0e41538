#include "srel/model_json.hpp"

namespace srel {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("matrix must be a nonempty nested array");
  std::vector<std::vector<double>> rows;
  for (const auto& r : j) {
    if (!r.is_array()) throw ConfigError("matrix rows must be arrays");
    rows.push_back(r.get<std::vector<double>>());
  }
  return Matrix::from_rows(rows);
}

namespace {

json vol_to_json(const VolRule& v) {
  if (!v.serializable())
    throw ConfigError("volatility rule wraps an in-process callback and cannot be serialized");
  json j;
  switch (v.kind) {
    case VolRule::Kind::constant:
      j["kind"] = "constant";
      j["matrix"] = matrix_to_json(v.constant_matrix);
      return j;
    case VolRule::Kind::diag_sin:
      j["kind"] = "diagSin";
      j["base"] = v.base;
      j["amp"] = v.amp;
      return j;
    case VolRule::Kind::inflate:
      j["kind"] = "inflate";
      j["eps"] = v.parameter;
      j["inner"] = vol_to_json(*v.inner);
      return j;
    case VolRule::Kind::cap:
      j["kind"] = "cap";
      j["c"] = v.parameter;
      j["inner"] = vol_to_json(*v.inner);
      return j;
    case VolRule::Kind::mollify:
      j["kind"] = "mollify";
      j["n"] = v.window;
      j["inner"] = vol_to_json(*v.inner);
      return j;
    case VolRule::Kind::shift:
      j["kind"] = "shift";
      j["delay"] = v.window;
      j["inner"] = vol_to_json(*v.inner);
      return j;
    case VolRule::Kind::custom:
      break;
  }
  throw ConfigError("unserializable volatility rule");
}

VolRule vol_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") return VolRule::constant(matrix_from_json(j.at("matrix")));
  if (kind == "diagSin")
    return VolRule::diag_sinusoid(j.at("base").get<std::vector<double>>(),
                                  j.at("amp").get<std::vector<double>>());
  if (kind == "inflate") return VolRule::wrap_inflate(vol_from_json(j.at("inner")), j.at("eps").get<double>());
  if (kind == "cap") return VolRule::wrap_cap(vol_from_json(j.at("inner")), j.at("c").get<double>());
  if (kind == "mollify") return VolRule::wrap_mollify(vol_from_json(j.at("inner")), j.at("n").get<int>());
  if (kind == "shift") return VolRule::wrap_shift(vol_from_json(j.at("inner")), j.at("delay").get<int>());
  throw ConfigError("unknown volatility rule kind: " + kind);
}

std::string delay_rule_name(DelayRule r) {
  switch (r) {
    case DelayRule::value_map: return "valueMap";
    case DelayRule::frozen: return "frozen";
    case DelayRule::direct: return "direct";
  }
  return "?";
}

DelayRule delay_rule_from_name(const std::string& s) {
  if (s == "valueMap") return DelayRule::value_map;
  if (s == "frozen") return DelayRule::frozen;
  if (s == "direct") return DelayRule::direct;
  throw ConfigError("unknown delay rule: " + s);
}

}  // namespace

json model_to_json(const ModelSpec& m) {
  json j;
  j["family"] = family_name(m.family);
  j["dim"] = m.dim;
  j["x0"] = m.x0;
  json p;
  switch (m.family) {
    case Family::scaled_brownian:
      p["a"] = matrix_to_json(m.a);
      break;
    case Family::gaussian_martingale: {
      p["g"]["breakpoints"] = m.g.breakpoints;
      json values = json::array();
      for (const auto& v : m.g.values) values.push_back(matrix_to_json(v.matrix()));
      p["g"]["values"] = std::move(values);
      break;
    }
    case Family::black_scholes:
      p["gamma"] = matrix_to_json(m.gamma);
      break;
    case Family::delayed_volatility:
      p["delay"] = m.delay_n;
      p["rule"] = delay_rule_name(m.delay_rule);
      p["vol"] = vol_to_json(m.vol);
      break;
    case Family::sde_martingale:
      p["vol"] = vol_to_json(m.vol);
      break;
    case Family::product: {
      json comps = json::array();
      for (const auto& c : m.components) comps.push_back(model_to_json(c));
      p["components"] = std::move(comps);
      break;
    }
  }
  j["parameters"] = std::move(p);
  return j;
}

ModelSpec model_from_json(const json& j) {
  const std::string family = j.at("family").get<std::string>();
  std::vector<double> x0;
  if (j.contains("x0")) x0 = j.at("x0").get<std::vector<double>>();
  const json& p = j.at("parameters");

  ModelSpec m;
  if (family == "scaledBrownian") {
    m = ModelSpec::scaled_brownian(matrix_from_json(p.at("a")), std::move(x0));
  } else if (family == "gaussianMartingale") {
    PiecewiseConstMatrix g;
    g.breakpoints = p.at("g").at("breakpoints").get<std::vector<double>>();
    for (const auto& v : p.at("g").at("values")) g.values.emplace_back(matrix_from_json(v));
    m = ModelSpec::gaussian_martingale(std::move(g), std::move(x0));
  } else if (family == "blackScholes") {
    m = ModelSpec::black_scholes(matrix_from_json(p.at("gamma")), std::move(x0));
  } else if (family == "delayedVolatility") {
    m = ModelSpec::delayed_volatility(p.at("delay").get<int>(),
                                      delay_rule_from_name(p.at("rule").get<std::string>()),
                                      vol_from_json(p.at("vol")), std::move(x0));
  } else if (family == "sdeMartingale") {
    m = ModelSpec::sde_martingale(vol_from_json(p.at("vol")), std::move(x0));
  } else if (family == "product") {
    std::vector<ModelSpec> comps;
    for (const auto& c : p.at("components")) comps.push_back(model_from_json(c));
    m = ModelSpec::product(std::move(comps));
  } else {
    throw ConfigError("unknown model family: " + family);
  }

  if (j.contains("dim") && j.at("dim").get<int>() != m.dim)
    throw ConfigError("declared dim does not match the parameters");
  return m;
}

std::string serialize_model(const ModelSpec& model) { return model_to_json(model).dump(2) + "\n"; }

ModelSpec parse_model(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    return model_from_json(j);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model document is malformed: ") + e.what());
  }
}

}  // namespace srel
