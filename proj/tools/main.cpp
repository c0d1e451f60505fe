// halfstrip command-line tool. Flags override the corresponding fields of the
// JSON config; the merged document goes through the C API.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "halfstrip/halfstrip.h"
#include "json.hpp"

namespace {

using nlohmann::json;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 0;
  std::optional<std::string> out;
  std::optional<std::string> format;
  bool no_files = false;
};

struct Overrides {
  std::optional<std::string> mode;
  std::vector<std::int64_t> grid;
  bool estimate = false;
  std::optional<std::size_t> steps, trials, r_max, horizon;
  std::optional<std::int64_t> x, initial_x;
  std::optional<std::string> line, initial_line;
  std::optional<double> horizon_a;
  std::vector<std::int64_t> d_grid, x_set;
};

std::string read_input(const std::string& path) {
  std::ostringstream ss;
  if (path == "-") {
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read config file '" + path + "'");
  ss << in.rdbuf();
  return ss.str();
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("-c,--config,--model", c.config_path, "JSON run configuration ('-' for stdin)")
      ->required();
  sub->add_option("--seed", c.seed, "RNG seed (overrides the config)");
  sub->add_option("-j,--jobs", c.jobs, "worker threads, 0 = one per core")->default_val(0);
  sub->add_option("-o,--out", c.out, "output directory (overrides the config)");
  sub->add_option("--format", c.format, "stdout format")
      ->check(CLI::IsMember({"json", "csv", "text"}));
  sub->add_flag("--no-files", c.no_files, "do not write result files");
}

// Merge flags into the parsed document. Text is returned unchanged when it is
// not valid JSON so the library reports the parse position.
std::string merge(const std::string& text, const std::string& command, const Common& c,
                  const Overrides& o) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error&) {
    return text;
  }
  if (!doc.is_object()) return text;
  if (!doc.contains("command") || !doc["command"].is_object()) doc["command"] = json::object();
  json& cmd = doc["command"];
  cmd["name"] = command;
  if (o.mode) cmd["mode"] = *o.mode;
  if (!o.grid.empty()) cmd["grid"] = o.grid;
  if (o.estimate) cmd["estimate"] = true;
  if (o.steps) cmd["steps"] = *o.steps;
  if (o.trials) cmd["trials"] = *o.trials;
  if (o.r_max) cmd["r_max"] = *o.r_max;
  if (o.horizon) cmd["horizon"] = *o.horizon;
  if (o.horizon_a) cmd["horizon_a"] = *o.horizon_a;
  if (o.x) cmd["x"] = *o.x;
  if (o.line) cmd["line"] = *o.line;
  if (!o.d_grid.empty()) cmd["d_grid"] = o.d_grid;
  if (!o.x_set.empty()) cmd["x_set"] = o.x_set;
  if (o.initial_x || o.initial_line) {
    if (!cmd.contains("initial") || !cmd["initial"].is_object()) cmd["initial"] = json::object();
    if (o.initial_x) cmd["initial"]["x"] = *o.initial_x;
    if (o.initial_line) cmd["initial"]["line"] = *o.initial_line;
  }
  if (c.seed) doc["seed"] = *c.seed;
  if (c.format) {
    if (!doc.contains("output") || !doc["output"].is_object()) doc["output"] = json::object();
    doc["output"]["format"] = *c.format;
  }
  return doc.dump();
}

void print_config_errors(const hs_config* cfg) {
  const std::size_t n = hs_config_error_count(cfg);
  if (n == 0) {
    std::fprintf(stderr, "error: %s\n", hs_last_error());
    return;
  }
  for (std::size_t k = 0; k < n; ++k) std::fprintf(stderr, "error: %s\n", hs_config_error(cfg, k));
}

int execute(const std::string& command, const Common& c, const Overrides& o) {
  std::string text;
  try {
    text = merge(read_input(c.config_path), command, c, o);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  hs_config* cfg = nullptr;
  if (hs_config_parse(text.c_str(), &cfg) != HS_OK) {
    print_config_errors(cfg);
    hs_config_free(cfg);
    return 1;
  }
  hs_report* report = nullptr;
  const hs_status st =
      hs_run(cfg, c.jobs, c.out ? c.out->c_str() : nullptr, c.no_files ? 0 : 1, &report);
  hs_config_free(cfg);
  if (st != HS_OK) {
    std::fprintf(stderr, "error (%s): %s\n", hs_status_name(st), hs_last_error());
    return 1;
  }
  std::fputs(hs_report_rendered(report), stdout);
  for (std::size_t k = 0; k < hs_report_file_count(report); ++k) {
    std::fprintf(stderr, "wrote %s\n", hs_report_file(report, k));
  }
  const int code = hs_report_exit_code(report);
  hs_report_free(report);
  return code;
}

int check(const std::string& path) {
  std::string text;
  try {
    text = read_input(path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  hs_config* cfg = nullptr;
  if (hs_config_parse(text.c_str(), &cfg) != HS_OK) {
    print_config_errors(cfg);
    hs_config_free(cfg);
    return 1;
  }
  char* rendered = nullptr;
  const hs_status st = hs_config_render(cfg, &rendered);
  if (st == HS_OK) {
    std::fputs(rendered, stdout);
    std::fprintf(stderr, "config hash %s\n", hs_config_hash(cfg));
  } else {
    std::fprintf(stderr, "error: %s\n", hs_last_error());
  }
  hs_string_free(rendered);
  hs_config_free(cfg);
  return st == HS_OK ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Markov chains on the half-strip: classification, simulation, limit laws"};
  app.set_version_flag("--version", std::string(hs_version()));
  app.require_subcommand(1);

  Common common;
  Overrides ov;
  std::string check_path;

  auto* classify = app.add_subcommand("classify", "recurrence/transience verdict");
  add_common(classify, common);
  classify->add_option("--mode", ov.mode, "drift regime")
      ->check(CLI::IsMember({"constant", "lamperti"}));
  classify->add_option("--grid", ov.grid, "heights used to extrapolate x -> infinity")
      ->delimiter(',');
  classify->add_flag("--estimate", ov.estimate, "estimate drift constants even if declared");
  bool as_json = false, as_text = false;
  auto* json_flag = classify->add_flag("--json", as_json, "same as --format json");
  classify->add_flag("--text", as_text, "same as --format text")->excludes(json_flag);

  auto* simulate = app.add_subcommand("simulate", "one sample path and its excursions");
  add_common(simulate, common);
  simulate->add_option("-n,--steps", ov.steps, "path length");
  simulate->add_option("--x0,--initial-x", ov.initial_x, "starting height");
  simulate->add_option("--initial-line", ov.initial_line, "starting line label");
  simulate->add_option("--x-set", ov.x_set, "heights whose occupation frequency is reported")
      ->delimiter(',');

  auto* excursion = app.add_subcommand("excursion-stats", "excursion estimators at height x");
  add_common(excursion, common);
  excursion->add_option("-x,--x", ov.x, "starting height");
  excursion->add_option("--trials", ov.trials, "number of excursions");
  excursion->add_option("--r-max", ov.r_max, "largest duration in the survival profile");
  excursion->add_option("--d-grid", ov.d_grid, "deviation levels")->delimiter(',');

  auto* coupling = app.add_subcommand("coupling", "coupling survival against the limit chain");
  add_common(coupling, common);
  coupling->add_option("--x0", ov.x, "starting height");
  coupling->add_option("--line", ov.line, "starting line label");
  coupling->add_option("--horizon", ov.horizon, "number of steps (default ceil(A ln x0))");
  coupling->add_option("--A", ov.horizon_a, "horizon factor A");
  coupling->add_option("--trials", ov.trials, "number of coupled runs");

  auto* weak = app.add_subcommand("weak-limit", "X_n / sqrt(n) against the limit law");
  add_common(weak, common);
  weak->add_option("-n,--n", ov.steps, "steps per path");
  weak->add_option("--trials", ov.trials, "number of paths");
  weak->add_option("--x0,--initial-x", ov.initial_x, "starting height");
  weak->add_option("--initial-line", ov.initial_line, "starting line label");
  weak->add_flag("--json", as_json, "same as --format json");

  auto* chk = app.add_subcommand("check", "validate a config and print its canonical form");
  chk->add_option("config", check_path, "JSON run configuration ('-' for stdin)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  if (as_json) common.format = "json";
  if (as_text) common.format = "text";

  if (chk->parsed()) return check(check_path);
  for (auto* sub : {classify, simulate, excursion, coupling, weak}) {
    if (sub->parsed()) return execute(sub->get_name(), common, ov);
  }
  return 1;
}
