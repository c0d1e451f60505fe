#include "halfstrip/run.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "halfstrip/classify.hpp"
#include "halfstrip/coupling.hpp"
#include "halfstrip/simulate.hpp"
#include "halfstrip/stationary.hpp"
#include "halfstrip/weaklimit.hpp"
#include "json.hpp"

#ifndef HALFSTRIP_VERSION
#define HALFSTRIP_VERSION "0.0.0"
#endif

namespace halfstrip {

using nlohmann::json;

std::string_view library_version() noexcept { return HALFSTRIP_VERSION; }

std::string_view to_string(RunStatus status) noexcept {
  switch (status) {
    case RunStatus::Ok: return "ok";
    case RunStatus::Inconclusive: return "inconclusive";
    case RunStatus::HypothesisFailed: return "hypothesis_failed";
  }
  return "ok";
}

namespace {

const std::vector<Height> kDefaultGrid = {1000, 10000, 100000};

struct Context {
  const RunConfig& config;
  const RunOptions& options;
  ModelPtr model;
  json report;
  RunStatus status = RunStatus::Ok;
  std::vector<std::pair<std::string, std::string>> tables;

  TrialOptions trial_options() const {
    TrialOptions t;
    t.seed = config.seed;
    t.jobs = options.jobs;
    return t;
  }

  std::size_t line(const std::optional<std::string>& label, const char* field) const {
    if (!label) return model->lines().reference_line;
    auto idx = model->lines().index_of(*label);
    if (!idx) fail(ErrorCode::Validation, std::string("command.") + field + ": unknown line '" + *label + "'");
    return *idx;
  }

  const std::string& label(std::size_t i) const { return model->lines().labels[i]; }
};

json matrix_json(const ModulationMatrix& q) { return q.to_rows(); }

json estimate_json(const MomentEstimate& m) {
  return {{"mean", m.mean}, {"variance", m.variance}, {"count", m.count},
          {"ci_halfwidth", m.ci_halfwidth}};
}

// pi and params if the classification pipeline succeeds, for predictions.
std::optional<ModelClassification> try_classify(const Model& model, DriftMode mode) {
  try {
    return classify_model(model, mode, kDefaultGrid);
  } catch (const Error&) {
    return std::nullopt;
  }
}

void run_classify(Context& ctx) {
  const auto& cmd = ctx.config.command;
  const DriftMode mode = cmd.mode.value_or(DriftMode::Lamperti);
  const auto& grid = cmd.grid.empty() ? kDefaultGrid : cmd.grid;
  const ModelClassification cls = classify_model(*ctx.model, mode, grid, cmd.estimate.value_or(false));
  json values = json::object();
  for (const auto& [k, v] : cls.result.decision_values) values[k] = v;
  json& r = ctx.report;
  r["mode"] = std::string(to_string(mode));
  r["verdict"] = std::string(to_string(cls.result.verdict));
  r["boundary"] = cls.result.boundary;
  r["decision_values"] = values;
  r["assumptions_used"] = cls.result.assumptions_used;
  r["pi"] = cls.pi.pi;
  r["q"] = matrix_json(cls.q);
  r["params"] = {{"d", cls.params.d}, {"c", cls.params.c}, {"s2", cls.params.s2},
                 {"sharp", cls.params.sharp}};
  r["estimated"] = cls.estimated;
  r["grid"] = grid;
  r["residuals"] = {{"limit_spread", cls.limit_spread}, {"drift_spread", cls.residuals}};
  if (cls.result.verdict == Verdict::Inconclusive) ctx.status = RunStatus::Inconclusive;
}

void run_simulate(Context& ctx) {
  const auto& cmd = ctx.config.command;
  const std::size_t steps = cmd.steps.value_or(100000);
  const State initial{cmd.initial_x.value_or(0), ctx.line(cmd.initial_line, "initial.line")};
  const std::vector<Height> x_set = cmd.x_set.empty() ? std::vector<Height>{0, 1, 2, 5, 10} : cmd.x_set;
  const std::size_t ref = ctx.model->lines().reference_line;
  const PathSample path = run_path(*ctx.model, initial, steps, ctx.config.seed);
  const ExcursionDecomposition dec = decompose_excursions(path, ref, ctx.model->lines().size());

  const std::size_t renewals = renewal_count(path, ref);
  double mean_duration = 0.0;
  for (const auto& e : dec.excursions) mean_duration += static_cast<double>(e.duration);
  mean_duration /= static_cast<double>(dec.excursions.size());

  json visits = json::array();
  for (Height x : x_set) {
    std::size_t hits = 0;
    for (std::size_t k = 0; k < steps; ++k) hits += path.states[k].x == x;
    visits.push_back({{"x", x}, {"frequency", static_cast<double>(hits) / static_cast<double>(steps)}});
  }
  json& r = ctx.report;
  r["steps"] = steps;
  r["initial"] = {{"x", initial.x}, {"line", ctx.label(initial.line)}};
  r["final"] = {{"x", path.states.back().x}, {"line", ctx.label(path.states.back().line)}};
  r["renewals"] = renewals;
  r["renewal_rate"] = static_cast<double>(renewals) / static_cast<double>(steps);
  r["excursions"] = dec.excursions.size();
  r["first_visit"] = dec.first_visit;
  r["trailing_steps"] = dec.trailing_steps;
  r["mean_duration"] = mean_duration;
  r["occupation_frequency"] = visits;
  if (auto cls = try_classify(*ctx.model, DriftMode::Lamperti)) {
    r["expected_renewal_rate"] = cls->pi[ref];
    r["expected_mean_duration"] = 1.0 / cls->pi[ref];
  }

  std::ostringstream csv;
  csv << "start_x,end_x,duration,max_dev";
  for (const auto& l : ctx.model->lines().labels) csv << ",occ_" << l;
  csv << "\n";
  for (const auto& e : dec.excursions) {
    csv << e.start_x << ',' << e.end_x << ',' << e.duration << ',' << e.max_dev;
    for (auto o : e.occupation) csv << ',' << o;
    csv << "\n";
  }
  ctx.tables.emplace_back("excursions", csv.str());
}

void run_excursion_stats(Context& ctx) {
  const auto& cmd = ctx.config.command;
  const Height x = cmd.x.value_or(1000);
  const std::size_t trials = cmd.trials.value_or(10000);
  const std::size_t r_max = cmd.r_max.value_or(40);
  const std::vector<Height> d_grid =
      cmd.d_grid.empty() ? std::vector<Height>{1, 2, 4, 8, 16, 32} : cmd.d_grid;
  const TrialOptions topt = ctx.trial_options();
  const std::size_t ref = ctx.model->lines().reference_line;
  const auto cls = try_classify(*ctx.model, DriftMode::Lamperti);

  json& r = ctx.report;
  r["x"] = x;
  r["trials"] = trials;
  json occ = json::array();
  for (std::size_t i = 0; i < ctx.model->lines().size(); ++i) {
    const auto est = estimate_occupation_ratio(*ctx.model, x, i, trials, topt);
    json row = {{"line", ctx.label(i)}, {"estimate", estimate_json(est.estimate)},
                {"boundary_hits", est.boundary_hits}, {"truncated", est.truncated}};
    if (cls) row["expected"] = cls->pi[i] / cls->pi[ref];
    occ.push_back(row);
  }
  r["occupation_ratio"] = occ;

  const EmbeddedMoments em = estimate_embedded_moments(*ctx.model, std::max<Height>(x, 1), trials, topt);
  json emb = {{"m1", estimate_json(em.m1)},
              {"m2", estimate_json(em.m2)},
              {"x_times_m1", static_cast<double>(x) * em.m1.mean},
              {"m1_compensator", estimate_json(em.m1_compensator)},
              {"x_times_m1_compensator", static_cast<double>(x) * em.m1_compensator.mean},
              {"boundary_hits", em.boundary_hits},
              {"truncated", em.truncated}};
  if (cls && cls->params.has_lamperti()) {
    double sc = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < cls->pi.size(); ++i) {
      sc += cls->params.c[i] * cls->pi[i];
      ss += cls->params.s2[i] * cls->pi[i];
    }
    emb["expected_x_times_m1"] = sc / cls->pi[ref];
    emb["expected_m2"] = ss / cls->pi[ref];
  }
  r["embedded_moments"] = emb;

  const TailProfile tail = tau_tail_profile(*ctx.model, x, trials, r_max, topt);
  r["duration_tail"] = {{"slope", tail.fit.slope}, {"intercept", tail.fit.intercept},
                        {"r_squared", tail.fit.r_squared}, {"fit_points", tail.fit.points},
                        {"boundary_hits", tail.boundary_hits}};
  std::ostringstream scsv;
  scsv << "r,survival\n";
  scsv.precision(17);
  for (const auto& [k, s] : tail.survival) scsv << k << ',' << s << "\n";
  ctx.tables.emplace_back("survival", scsv.str());

  const DeviationProfile dev = max_deviation_profile(*ctx.model, x, trials, d_grid, topt);
  r["max_deviation_tail"] = {{"loglog_slope", dev.fit.slope}, {"r_squared", dev.fit.r_squared},
                             {"fit_points", dev.fit.points},
                             {"exceeds_duration", dev.exceeds_duration}};
  std::ostringstream dcsv;
  dcsv << "d,tail\n";
  dcsv.precision(17);
  for (const auto& [d, p] : dev.tail) dcsv << d << ',' << p << "\n";
  ctx.tables.emplace_back("deviation", dcsv.str());
}

void run_coupling(Context& ctx) {
  const auto& cmd = ctx.config.command;
  const Height x0 = cmd.x.value_or(1000);
  const double a = cmd.horizon_a.value_or(2.0);
  const std::size_t horizon = cmd.horizon.value_or(log_horizon(a, std::max<Height>(x0, 2)));
  const std::size_t trials = cmd.trials.value_or(10000);
  const std::size_t line = ctx.line(cmd.line, "line");
  const LimitMatrixResult lm = limit_matrix(*ctx.model, kDefaultGrid);
  const CouplingSurvival surv =
      coupling_survival(*ctx.model, lm.q, x0, line, horizon, trials, ctx.trial_options());

  json& r = ctx.report;
  r["x0"] = x0;
  r["horizon"] = horizon;
  r["horizon_a"] = a;
  r["trials"] = trials;
  r["line"] = ctx.label(line);
  r["q"] = matrix_json(lm.q);
  r["survival_at_horizon"] = surv.survival.back().second;
  r["per_step_bound_at_x0"] = decoupling_bound(*ctx.model, lm.q, x0);
  r["horizon_bound_at_half_x0"] = horizon_decoupling_bound(*ctx.model, lm.q, x0 / 2, horizon);
  std::ostringstream csv;
  csv << "n,survival\n";
  csv.precision(17);
  for (const auto& [n, s] : surv.survival) csv << n << ',' << s << "\n";
  ctx.tables.emplace_back("coupling", csv.str());
}

void run_weak_limit(Context& ctx) {
  const auto& cmd = ctx.config.command;
  const std::size_t n = cmd.steps.value_or(10000);
  const std::size_t trials = cmd.trials.value_or(2000);
  const State initial{cmd.initial_x.value_or(0), ctx.line(cmd.initial_line, "initial.line")};
  const auto& grid = cmd.grid.empty() ? kDefaultGrid : cmd.grid;
  json& r = ctx.report;
  r["steps"] = n;
  r["trials"] = trials;
  const ModelClassification cls = classify_model(*ctx.model, DriftMode::Lamperti, grid);
  WeakLimitParams params;
  try {
    params = alpha_theta(cls.params, cls.pi, cls.q);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::HypothesisFailed) throw;
    ctx.status = RunStatus::HypothesisFailed;
    r["error"] = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
    r["aperiodic"] = is_aperiodic(cls.q);
    return;
  }
  const WeakLimitReport rep =
      weak_limit_test(*ctx.model, params, cls.pi, n, trials, initial, ctx.trial_options());
  r["alpha"] = rep.params.alpha;
  r["theta"] = rep.params.theta;
  r["marginal_ks"] = rep.marginal_ks;
  r["ks_critical_999"] = ks_critical_999(trials);
  r["median_scaled"] = rep.median_scaled;
  json lines = json::array();
  for (std::size_t k = 0; k < rep.per_line.size(); ++k) {
    const auto& pl = rep.per_line[k];
    const auto& fr = rep.frequencies[k];
    lines.push_back({{"line", ctx.label(pl.line)}, {"count", pl.count}, {"ks", pl.ks},
                     {"frequency", fr.empirical}, {"pi", fr.expected}, {"se", fr.standard_error}});
  }
  r["per_line"] = lines;
  std::ostringstream csv;
  csv << "p,empirical,theoretical\n";
  csv.precision(17);
  for (const auto& q : rep.qq) csv << q.p << ',' << q.empirical << ',' << q.theoretical << "\n";
  ctx.tables.emplace_back("qq", csv.str());
}

std::string render_text(const json& report) {
  std::ostringstream os;
  for (const auto& [key, value] : report.items()) {
    os << key << ": " << (value.is_string() ? value.get<std::string>() : value.dump()) << "\n";
  }
  return os.str();
}

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

void write_new_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << content;
  if (!out) fail(ErrorCode::Io, "failed writing " + path.string());
}

}  // namespace

RunOutcome run(const RunConfig& config, const RunOptions& options) {
  Context ctx{config, options, build_model(config.model), json::object(), RunStatus::Ok, {}};
  const std::string hash = config_hash(config);
  ctx.report["command"] = config.command.name;
  ctx.report["library_version"] = std::string(library_version());
  ctx.report["config_hash"] = hash;
  ctx.report["seed"] = config.seed;
  ctx.report["model"] = {{"kind", std::string(ctx.model->kind())},
                         {"lines", ctx.model->lines().labels},
                         {"reference_line", ctx.label(ctx.model->lines().reference_line)}};

  const std::string& name = config.command.name;
  if (name == "classify") {
    run_classify(ctx);
  } else if (name == "simulate") {
    run_simulate(ctx);
  } else if (name == "excursion-stats") {
    run_excursion_stats(ctx);
  } else if (name == "coupling") {
    run_coupling(ctx);
  } else if (name == "weak-limit") {
    run_weak_limit(ctx);
  } else {
    fail(ErrorCode::Validation, "unknown command '" + name + "'");
  }
  ctx.report["status"] = std::string(to_string(ctx.status));

  RunOutcome out;
  out.status = ctx.status;
  out.exit_code = ctx.status == RunStatus::Ok ? 0 : 2;
  out.report_json = ctx.report.dump(2) + "\n";
  out.tables = std::move(ctx.tables);
  switch (config.format) {
    case OutputFormat::Json: out.rendered = out.report_json; break;
    case OutputFormat::Text: out.rendered = render_text(ctx.report); break;
    case OutputFormat::Csv:
      out.rendered = out.tables.empty() ? out.report_json : out.tables.front().second;
      break;
  }

  if (options.write_files) {
    namespace fs = std::filesystem;
    const fs::path dir(config.output_path);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorCode::Io, "cannot create output directory " + dir.string());
    const std::string base = name + "-" + hash + "-" + timestamp_utc();
    const std::string kind =
        name == "simulate" || name == "excursion-stats" ? ".estimates.json" : ".report.json";
    std::string stem = base;
    for (int k = 1; fs::exists(dir / (stem + kind)); ++k) stem = base + "-" + std::to_string(k);
    const fs::path report_path = dir / (stem + kind);
    write_new_file(report_path, out.report_json);
    out.files_written.push_back(report_path.string());
    for (const auto& [table, csv] : out.tables) {
      const fs::path p = dir / (stem + "." + table + ".csv");
      write_new_file(p, csv);
      out.files_written.push_back(p.string());
    }
  }
  return out;
}

}  // namespace halfstrip
