#include "bilatrr_cli/app.hpp"

#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bilatrr_cli/commands.hpp"

#ifndef BILATRR_VERSION
#define BILATRR_VERSION "unknown"
#endif

namespace bilatrr::cli {

namespace {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string scalar(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  throw ConfigError("values must be strings, numbers, booleans or arrays of them");
}

/// Fills options not given on the command line from a JSON object whose keys
/// are long flag names without the leading dashes.
void apply_config(CLI::App* sub, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError(path + ": top level must be an object");
  for (const auto& [key, value] : doc.items()) {
    CLI::Option* opt = key == "config" ? nullptr : sub->get_option_no_throw("--" + key);
    if (opt == nullptr) throw ConfigError(path + ": unknown option '" + key + "' for " + sub->get_name());
    if (opt->count() > 0) continue;
    std::vector<std::string> inputs;
    if (value.is_array()) {
      for (const auto& v : value) inputs.push_back(scalar(v));
    } else {
      inputs.push_back(scalar(value));
    }
    try {
      for (const std::string& v : inputs) opt->add_result(v);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw ConfigError(path + ": " + key + ": " + e.what());
    }
  }
}

void apply_env(CLI::Option* opt, const char* name) {
  if (opt->count() > 0) return;
  const char* value = std::getenv(name);
  if (value == nullptr || *value == '\0') return;
  try {
    opt->add_result(value);
    opt->run_callback();
  } catch (const CLI::Error& e) {
    throw ConfigError(std::string(name) + ": " + e.what());
  }
}

CLI::Validator open_unit() {
  return CLI::Validator(
      [](std::string& s) -> std::string {
        const double v = std::stod(s);
        return v > 0.0 && v < 1.0 ? std::string() : "must lie in (0, 1)";
      },
      "(0,1)");
}

CLI::Validator positive() {
  return CLI::Validator(
      [](std::string& s) -> std::string { return std::stod(s) > 0.0 ? std::string() : "must be positive"; }, ">0");
}

std::string* add_config(CLI::App* sub, std::vector<std::string>& storage) {
  std::string& path = storage.emplace_back();
  sub->add_option("--config", path, "JSON file of option values; command-line flags win");
  return &path;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Relative risk inference for combined unilateral and bilateral binary data", "bilatrr"};
  app.set_version_flag("--version", BILATRR_VERSION);
  app.require_subcommand(1);

  std::vector<std::string> config_paths;
  config_paths.reserve(3);
  std::vector<std::pair<CLI::App*, std::string*>> configs;

  AnalyzeOptions analyze;
  CLI::App* a = app.add_subcommand("analyze", "MLE, goodness of fit, five intervals and tests for a count file");
  a->add_option("--data,-d", analyze.data, "Count CSV (group,design,responses,count)");
  a->add_option("--alpha", analyze.alpha, "Significance level")->check(open_unit())->capture_default_str();
  a->add_option("--delta0", analyze.delta0, "Null value of the relative risk")->check(positive())->capture_default_str();
  a->add_option("--methods", analyze.methods, "Interval methods: SC, PL, W, MV, GE (or score, profile, wald, mover, gee)")
      ->delimiter(',');
  a->add_option("--format", analyze.format, "csv or md")->capture_default_str();
  a->add_option("--precision", analyze.precision, "Decimals")->check(CLI::Range(0, 17))->capture_default_str();
  a->add_flag("--strict-search", analyze.strict_search, "Cold-start every constrained fit of the bound search");
  a->add_option("--output,-o", analyze.output, "Write to this file instead of stdout");
  configs.emplace_back(a, add_config(a, config_paths));

  GofOptions gof;
  CLI::App* g = app.add_subcommand("gof", "Goodness of fit of the R model");
  g->add_option("--data,-d", gof.data, "Count CSV");
  g->add_option("--variant", gof.variant, "paper, saturated or both")->capture_default_str();
  g->add_option("--format", gof.format, "text, csv or md")->capture_default_str();
  g->add_option("--precision", gof.precision, "Decimals")->check(CLI::Range(0, 17))->capture_default_str();
  g->add_option("--output,-o", gof.output, "Write to this file instead of stdout");
  configs.emplace_back(g, add_config(g, config_paths));

  SimulateOptions sim;
  CLI::App* s = app.add_subcommand("simulate", "Monte-Carlo coverage, width and non-coverage symmetry");
  s->add_option("--pi1", sim.pi1, "Group 1 response rate")->capture_default_str();
  s->add_option("--delta0", sim.delta0, "True relative risk")->capture_default_str();
  s->add_option("--R", sim.r, "Dependence parameter")->capture_default_str();
  s->add_option("--m", sim.m, "Bilateral subjects per group")->capture_default_str();
  s->add_option("--n", sim.n, "Unilateral subjects per group")->capture_default_str();
  s->add_option("--reps", sim.reps, "Replications per setting")->capture_default_str();
  s->add_option("--alpha", sim.alpha, "Significance level")->check(open_unit())->capture_default_str();
  CLI::Option* seed = s->add_option("--seed", sim.seed, "Master seed (default from BILAT_RR_SEED)")->capture_default_str();
  s->add_option("--threads", sim.threads, "Worker threads (0: all available)")->capture_default_str();
  CLI::Option* grid = s->add_option("--grid-file", sim.grid_file, "CSV of settings with columns pi1,delta0,R[,m,n,reps,alpha]");
  CLI::Option* sweep = s->add_option("--sweep-R", sim.sweep_r, "R from lo to hi by step, as lo:hi:step");
  CLI::Option* random = s->add_option("--random", sim.random, "Number of random settings")->check(CLI::PositiveNumber);
  s->add_option("--pi-range", sim.pi_range, "pi1 range of --random, lo:hi")->capture_default_str();
  s->add_option("--delta-range", sim.delta_range, "delta0 range of --random, lo:hi")->capture_default_str();
  s->add_option("--margin", sim.margin, "--random rejects delta0*pi1 >= 1 - margin")->capture_default_str();
  CLI::Option* paper = s->add_flag("--paper-grid", sim.paper_grid, "The thirteen published (pi1, delta0, R) rows");
  grid->excludes(sweep, random, paper);
  sweep->excludes(random, paper);
  random->excludes(paper);
  s->add_flag("--strict-search", sim.strict_search, "Cold-start every constrained fit of the bound search");
  s->add_option("--format", sim.format, "csv or md")->capture_default_str();
  s->add_option("--precision", sim.precision, "Decimals")->check(CLI::Range(0, 17))->capture_default_str();
  s->add_option("--output,-o", sim.output, "Write to this file instead of stdout");
  configs.emplace_back(s, add_config(s, config_paths));

  CheckOptions check;
  CLI::App* c = app.add_subcommand("check", "Validate a count file and print it in canonical form");
  c->add_option("--data,-d", check.data, "Count CSV")->required();
  c->add_option("--output,-o", check.output, "Write to this file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << BILATRR_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  try {
    for (const auto& [sub, path] : configs) {
      if (sub->parsed() && !path->empty()) apply_config(sub, *path);
    }
    if (s->parsed()) apply_env(seed, "BILAT_RR_SEED");
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  if (a->parsed()) return cmd_analyze(analyze, out, err);
  if (g->parsed()) return cmd_gof(gof, out, err);
  if (s->parsed()) return cmd_simulate(sim, out, err);
  return cmd_check(check, out, err);
}

}  // namespace bilatrr::cli
