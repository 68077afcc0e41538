#include "srel/cli_commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "srel/model_json.hpp"
#include "srel/specific_entropy.hpp"
#include "srel/verify.hpp"

namespace srel {

namespace {

using nlohmann::json;

struct RunConfig {
  json doc;  // merged config document

  static RunConfig load(const std::string& path) {
    RunConfig c;
    if (path.empty()) {
      c.doc = json::object();
      return c;
    }
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    try {
      in >> c.doc;
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!c.doc.is_object()) throw ConfigError("config must be a JSON object");
    return c;
  }

  template <typename T>
  T get(const char* key, T fallback) const {
    if (!doc.contains(key)) return fallback;
    try {
      return doc.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config field '") + key + "' is malformed: " + e.what());
    }
  }

  ModelSpec model(const char* key) const {
    if (!doc.contains(key)) throw ConfigError(std::string("config needs a '") + key + "' entry");
    try {
      return model_from_json(doc.at(key));
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config model '") + key + "' is malformed: " + e.what());
    }
  }

  ModelPair pair() const {
    if (!doc.contains("pair")) throw ConfigError("config needs a 'pair' entry {q, p}");
    const json& p = doc.at("pair");
    if (!p.contains("q") || !p.contains("p")) throw ConfigError("pair needs 'q' and 'p' models");
    try {
      return ModelPair::make(model_from_json(p.at("q")), model_from_json(p.at("p")));
    } catch (const json::exception& e) {
      throw ConfigError(std::string("pair is malformed: ") + e.what());
    }
  }
};

void write_file(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file: " + path);
  f << content;
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string ensemble_to_csv(const PathEnsemble& ens) {
  std::string csv = "path_id,k";
  for (int i = 0; i < ens.model.dim; ++i) csv += ",coord_" + std::to_string(i);
  csv += "\n";
  for (std::int64_t p = 0; p < ens.count; ++p)
    for (int k = 0; k <= ens.level; ++k) {
      csv += std::to_string(p);
      csv += ",";
      csv += std::to_string(k);
      for (int i = 0; i < ens.model.dim; ++i) {
        csv += ",";
        csv += format_g17(ens.value(p, k, i));
      }
      csv += "\n";
    }
  return csv;
}

int cmd_simulate(const RunConfig& cfg, const std::string& output, std::ostream& out) {
  const ModelSpec model = cfg.model("model");
  const int level = cfg.get<int>("level", 4);
  const std::int64_t paths = cfg.get<std::int64_t>("paths", 10);
  const std::uint64_t seed = cfg.get<std::uint64_t>("seed", 1);

  SimOptions opts;
  opts.euler_substeps = cfg.get<int>("euler_substeps", 64);
  opts.threads = cfg.get<int>("threads", 0);

  const PathEnsemble ens = simulate(model, level, paths, seed, opts);
  write_file(output, ensemble_to_csv(ens), out);

  if (!output.empty() && output != "-") {
    json meta;
    meta["model"] = model_to_json(model);
    meta["level"] = level;
    meta["paths"] = paths;
    meta["seed"] = seed;
    meta["scheme"] = ens.scheme == Scheme::exact ? "exact" : "euler";
    if (ens.scheme == Scheme::euler) meta["euler_substeps"] = ens.euler_substeps;
    std::ofstream side(output + ".meta.json", std::ios::binary);
    if (!side) throw std::runtime_error("cannot open sidecar file");
    side << meta.dump(2) << "\n";
  }
  return 0;
}

int cmd_curve(const RunConfig& cfg, const std::string& output, const std::string& format,
              std::ostream& out) {
  const ModelPair pair = cfg.pair();
  const std::vector<int> levels = cfg.get<std::vector<int>>("levels", {2, 4, 8});
  const std::string method = cfg.get<std::string>("method", "analytic");
  const std::int64_t paths = cfg.get<std::int64_t>("paths", 100000);
  const std::uint64_t seed = cfg.get<std::uint64_t>("seed", 1);
  const int threads = cfg.get<int>("threads", 0);

  CurveMethod cm;
  if (method == "analytic")
    cm = CurveMethod::analytic;
  else if (method == "mc")
    cm = CurveMethod::mc;
  else
    throw ConfigError("method must be 'analytic' or 'mc'");

  const EntropyCurve curve = entropy_curve(pair, levels, cm, paths, seed, threads);
  if (format == "json") {
    json j = json::array();
    for (const auto& pt : curve.points) {
      json row;
      row["level"] = pt.level;
      if (pt.value.is_infinite())
        row["value"] = "inf";
      else
        row["value"] = pt.value.finite_value();
      row["stderr"] = pt.stderr_of_mean;
      row["method"] = pt.method == CurveMethod::analytic ? "analytic" : "mc";
      j.push_back(std::move(row));
    }
    write_file(output, j.dump(2) + "\n", out);
  } else {
    write_file(output, curve_to_csv(curve), out);
  }
  return 0;
}

int cmd_report(const RunConfig& cfg, const std::string& output, std::ostream& out) {
  const ModelPair pair = cfg.pair();
  const std::vector<int> levels = cfg.get<std::vector<int>>("levels", {16, 32, 64});
  const std::int64_t paths = cfg.get<std::int64_t>("paths", 100000);
  const std::uint64_t seed = cfg.get<std::uint64_t>("seed", 1);

  ReportOptions opts;
  opts.threads = cfg.get<int>("threads", 0);
  opts.gantert.time_steps = cfg.get<int>("time_steps", 256);
  opts.gantert.closed_form_black_scholes = cfg.get<bool>("closed_form_black_scholes", true);
  opts.gantert.euler_substeps = cfg.get<int>("euler_substeps", 8);
  opts.projection.inner_resamples = cfg.get<int>("inner_resamples", 64);
  opts.projection.euler_substeps = cfg.get<int>("projection_substeps", 16);

  const DivergenceReport rep = gap_report(pair, levels, paths, seed, opts);
  write_file(output, report_to_json_string(rep), out);
  return 0;
}

int cmd_verify(const VerifyOptions& opts, std::ostream& out) {
  const std::vector<CheckResult> results = run_verification(opts, out);
  print_check_table(results, out);
  return all_passed(results) ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"specific relative entropy between continuous martingale laws", "srel"};
  app.require_subcommand(1);

  std::string config_path, output, format = "csv";
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::vector<int> levels;
  std::int64_t paths = -1;
  int threads = -1, level = -1, time_steps = -1;
  std::string method;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--seed", seed, "64-bit seed")->each([&](const std::string&) { seed_set = true; });
    sub->add_option("--output", output, "output file path ('-' for stdout)");
    sub->add_option("--format", format, "csv|json");
    sub->add_option("--threads", threads, "worker cap (0 = hardware)");
    sub->add_option("--paths", paths, "Monte Carlo path count");
    sub->add_option("--levels", levels, "grid levels")->delimiter(',');
  };

  CLI::App* sim = app.add_subcommand("simulate", "simulate a model on a dyadic grid");
  add_common(sim);
  sim->add_option("--level", level, "grid level n");

  CLI::App* curve = app.add_subcommand("curve", "restricted-entropy curve for a pair");
  add_common(curve);
  curve->add_option("--method", method, "analytic|mc");

  CLI::App* report = app.add_subcommand("report", "scaling-limit and lower-bound report");
  add_common(report);
  report->add_option("--time-steps", time_steps, "midpoint steps for the dt integral");

  CLI::App* verify = app.add_subcommand("verify", "run the built-in verification suite");
  std::string suite = "quick";
  bool corrupt = false;
  verify->add_option("--suite", suite, "quick|full");
  verify->add_option("--seed", seed, "64-bit seed")->each([&](const std::string&) { seed_set = true; });
  verify->add_option("--threads", threads, "worker cap (0 = hardware)");
  verify->add_flag("--self-test-corrupt", corrupt,
                   "deliberately corrupt one expected constant (harness self-test)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (verify->parsed()) {
      VerifyOptions vopts;
      if (suite == "full")
        vopts.quick = false;
      else if (suite == "quick")
        vopts.quick = true;
      else
        throw ConfigError("suite must be 'quick' or 'full'");
      if (seed_set) vopts.seed = seed;
      if (threads >= 0) vopts.threads = threads;
      vopts.corrupt_oracle = corrupt;
      return cmd_verify(vopts, out);
    }

    RunConfig cfg = RunConfig::load(config_path);
    // flags override the config document
    if (seed_set) cfg.doc["seed"] = seed;
    if (!levels.empty()) cfg.doc["levels"] = levels;
    if (paths >= 0) cfg.doc["paths"] = paths;
    if (threads >= 0) cfg.doc["threads"] = threads;
    if (level >= 0) cfg.doc["level"] = level;
    if (time_steps >= 0) cfg.doc["time_steps"] = time_steps;
    if (!method.empty()) cfg.doc["method"] = method;
    if (output.empty() && cfg.doc.contains("output"))
      output = cfg.doc.at("output").get<std::string>();
    if (format == "csv" && cfg.doc.contains("format"))
      format = cfg.doc.at("format").get<std::string>();

    if (sim->parsed()) return cmd_simulate(cfg, output, out);
    if (curve->parsed()) return cmd_curve(cfg, output, format, out);
    if (report->parsed()) return cmd_report(cfg, output, out);
    err << "error: no subcommand\n";
    return 2;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const UnsupportedOperationError& e) {
    err << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace srel
