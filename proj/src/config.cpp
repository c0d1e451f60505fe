#include "halfstrip/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "halfstrip/stationary.hpp"
#include "json.hpp"

namespace halfstrip {

using nlohmann::json;

ConfigError::ConfigError(ErrorCode code, std::vector<std::string> errors)
    : Error(code,
            [&] {
              std::string msg = "invalid config";
              for (const auto& e : errors) msg += "\n  " + e;
              return msg;
            }()),
      errors_(std::move(errors)) {}

std::string_view to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::ModulatedQueue: return "modulated_queue";
    case ModelKind::CorrelatedWalk: return "correlated_walk";
    case ModelKind::HomogeneousStrip: return "homogeneous_strip";
    case ModelKind::Tabular: return "tabular";
  }
  return "unknown";
}

std::string_view to_string(OutputFormat format) noexcept {
  switch (format) {
    case OutputFormat::Json: return "json";
    case OutputFormat::Csv: return "csv";
    case OutputFormat::Text: return "text";
  }
  return "json";
}

std::optional<OutputFormat> parse_output_format(std::string_view text) noexcept {
  if (text == "json") return OutputFormat::Json;
  if (text == "csv") return OutputFormat::Csv;
  if (text == "text") return OutputFormat::Text;
  return std::nullopt;
}

namespace {

std::optional<ModelKind> parse_kind(std::string_view s) {
  if (s == "modulated_queue") return ModelKind::ModulatedQueue;
  if (s == "correlated_walk") return ModelKind::CorrelatedWalk;
  if (s == "homogeneous_strip") return ModelKind::HomogeneousStrip;
  if (s == "tabular") return ModelKind::Tabular;
  return std::nullopt;
}

// Collects every problem instead of stopping at the first one.
class Reader {
 public:
  std::vector<std::string> errors;

  void error(const std::string& path, const std::string& what) {
    errors.push_back(path + ": " + what);
  }

  void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
        error(path + "." + key, "unknown key");
      }
    }
  }

  std::optional<double> number(const json& v, const std::string& path) {
    if (!v.is_number()) {
      error(path, "expected a number");
      return std::nullopt;
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
      error(path, "expected a finite number");
      return std::nullopt;
    }
    return d;
  }

  std::optional<std::int64_t> integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) {
      error(path, "expected an integer");
      return std::nullopt;
    }
    if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
      error(path, "integer out of range");
      return std::nullopt;
    }
    return v.get<std::int64_t>();
  }

  std::optional<std::size_t> count(const json& v, const std::string& path) {
    auto i = integer(v, path);
    if (!i) return std::nullopt;
    if (*i < 0) {
      error(path, "expected a non-negative integer");
      return std::nullopt;
    }
    return static_cast<std::size_t>(*i);
  }

  std::optional<std::string> string(const json& v, const std::string& path) {
    if (!v.is_string()) {
      error(path, "expected a string");
      return std::nullopt;
    }
    return v.get<std::string>();
  }

  std::optional<bool> boolean(const json& v, const std::string& path) {
    if (!v.is_boolean()) {
      error(path, "expected true or false");
      return std::nullopt;
    }
    return v.get<bool>();
  }

  std::vector<Height> heights(const json& v, const std::string& path) {
    std::vector<Height> out;
    if (!v.is_array()) {
      error(path, "expected an array of integers");
      return out;
    }
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (auto i = integer(v[k], path + "[" + std::to_string(k) + "]")) out.push_back(*i);
    }
    return out;
  }

  std::optional<std::size_t> line_ref(const json& v, const std::vector<std::string>& lines,
                                      const std::string& path) {
    auto s = string(v, path);
    if (!s) return std::nullopt;
    auto it = std::find(lines.begin(), lines.end(), *s);
    if (it == lines.end()) {
      error(path, "unknown line '" + *s + "'");
      return std::nullopt;
    }
    return static_cast<std::size_t>(it - lines.begin());
  }

  // Square matrix written as {"<row label>": [entries in line order], ...}.
  std::vector<std::vector<double>> matrix(const json& v, const std::vector<std::string>& lines,
                                          const std::string& path) {
    std::vector<std::vector<double>> out(lines.size());
    if (!v.is_object()) {
      error(path, "expected an object keyed by line label");
      return {};
    }
    for (const auto& [key, row] : v.items()) {
      if (std::find(lines.begin(), lines.end(), key) == lines.end()) {
        error(path + "." + key, "unknown line label");
      }
    }
    bool ok = true;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const std::string rp = path + "." + lines[i];
      if (!v.contains(lines[i])) {
        error(rp, "missing row");
        ok = false;
        continue;
      }
      const json& row = v.at(lines[i]);
      if (!row.is_array() || row.size() != lines.size()) {
        error(rp, "expected an array of " + std::to_string(lines.size()) + " numbers");
        ok = false;
        continue;
      }
      double sum = 0.0;
      for (std::size_t j = 0; j < row.size(); ++j) {
        auto d = number(row[j], rp + "[" + std::to_string(j) + "]");
        if (!d) {
          ok = false;
          continue;
        }
        if (*d < 0.0 || *d > 1.0) {
          error(rp + "[" + std::to_string(j) + "]", "probability outside [0,1]");
          ok = false;
        }
        out[i].push_back(*d);
        sum += *d;
      }
      if (out[i].size() == lines.size() && std::abs(sum - 1.0) > kRowTolerance) {
        std::ostringstream os;
        os.precision(15);
        os << "row '" << lines[i] << "' sums to " << sum << ", expected 1";
        error(rp, os.str());
        ok = false;
      }
    }
    return ok ? out : std::vector<std::vector<double>>{};
  }

  std::vector<double> per_line(const json& v, const std::vector<std::string>& lines,
                               const std::string& path) {
    std::vector<double> out;
    if (!v.is_object()) {
      error(path, "expected an object keyed by line label");
      return out;
    }
    for (const auto& [key, value] : v.items()) {
      if (std::find(lines.begin(), lines.end(), key) == lines.end()) {
        error(path + "." + key, "unknown line label");
      }
    }
    for (const auto& l : lines) {
      if (!v.contains(l)) {
        error(path + "." + l, "missing value");
        continue;
      }
      if (auto d = number(v.at(l), path + "." + l)) out.push_back(*d);
    }
    return out.size() == lines.size() ? out : std::vector<double>{};
  }

  TransitionRow row(const json& v, const std::vector<std::string>& lines, const std::string& path) {
    TransitionRow r;
    if (!v.is_array()) {
      error(path, "expected an array of {x, line, p}");
      return r;
    }
    for (std::size_t k = 0; k < v.size(); ++k) {
      const std::string ep = path + "[" + std::to_string(k) + "]";
      const json& e = v[k];
      if (!e.is_object() || !e.contains("x") || !e.contains("line") || !e.contains("p")) {
        error(ep, "expected {\"x\", \"line\", \"p\"}");
        continue;
      }
      check_keys(e, ep, {"x", "line", "p"});
      auto x = integer(e["x"], ep + ".x");
      auto l = line_ref(e["line"], lines, ep + ".line");
      auto p = number(e["p"], ep + ".p");
      if (x && l && p) r.entries.push_back({*x, *l, *p});
    }
    return r;
  }

  RowTable row_table(const json& v, const std::vector<std::string>& lines, const std::string& path) {
    RowTable table;
    if (!v.is_array()) {
      error(path, "expected an array of {x, line, row}");
      return table;
    }
    for (std::size_t k = 0; k < v.size(); ++k) {
      const std::string ep = path + "[" + std::to_string(k) + "]";
      const json& e = v[k];
      if (!e.is_object() || !e.contains("x") || !e.contains("line") || !e.contains("row")) {
        error(ep, "expected {\"x\", \"line\", \"row\"}");
        continue;
      }
      check_keys(e, ep, {"x", "line", "row"});
      auto x = integer(e["x"], ep + ".x");
      auto l = line_ref(e["line"], lines, ep + ".line");
      TransitionRow r = row(e["row"], lines, ep + ".row");
      if (!x || !l) continue;
      r.sort();
      try {
        r.validate(LineSet{lines, 0}, "row");
      } catch (const Error& err) {
        error(ep + ".row", err.what());
      }
      if (!table.emplace(State{*x, *l}, std::move(r)).second) error(ep, "duplicate row key");
    }
    return table;
  }

  std::vector<std::vector<Increment>> increments(const json& v, const std::vector<std::string>& lines,
                                                 const std::string& path) {
    std::vector<std::vector<Increment>> out(lines.size());
    if (!v.is_object()) {
      error(path, "expected an object keyed by line label");
      return out;
    }
    for (const auto& [key, value] : v.items()) {
      if (std::find(lines.begin(), lines.end(), key) == lines.end()) {
        error(path + "." + key, "unknown line label");
      }
    }
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const std::string lp = path + "." + lines[i];
      if (!v.contains(lines[i]) || !v.at(lines[i]).is_array()) {
        error(lp, "expected an array of {z, to, p}");
        continue;
      }
      const json& arr = v.at(lines[i]);
      for (std::size_t k = 0; k < arr.size(); ++k) {
        const std::string ep = lp + "[" + std::to_string(k) + "]";
        const json& e = arr[k];
        if (!e.is_object() || !e.contains("z") || !e.contains("to") || !e.contains("p")) {
          error(ep, "expected {\"z\", \"to\", \"p\"}");
          continue;
        }
        check_keys(e, ep, {"z", "to", "p"});
        auto z = integer(e["z"], ep + ".z");
        auto to = line_ref(e["to"], lines, ep + ".to");
        auto p = number(e["p"], ep + ".p");
        if (z && to && p) out[i].push_back({*z, *to, *p});
      }
    }
    return out;
  }

  std::vector<std::string> labels(const json& v, const std::string& path) {
    std::vector<std::string> out;
    if (!v.is_array() || v.empty()) {
      error(path, "expected a non-empty array of line labels");
      return out;
    }
    std::set<std::string> seen;
    for (std::size_t k = 0; k < v.size(); ++k) {
      auto s = string(v[k], path + "[" + std::to_string(k) + "]");
      if (!s) continue;
      if (!seen.insert(*s).second) error(path + "[" + std::to_string(k) + "]", "duplicate label");
      out.push_back(*s);
    }
    return out;
  }
};

void read_model(Reader& rd, const json& m, ModelConfig& out) {
  const std::string path = "model";
  if (!m.is_object()) {
    rd.error(path, "expected an object");
    return;
  }
  if (!m.contains("kind")) {
    rd.error(path + ".kind", "missing");
    return;
  }
  auto kind_text = rd.string(m["kind"], path + ".kind");
  if (!kind_text) return;
  auto kind = parse_kind(*kind_text);
  if (!kind) {
    rd.error(path + ".kind", "unknown model kind '" + *kind_text + "'");
    return;
  }
  out.kind = *kind;
  if (m.contains("sharp")) out.sharp = rd.boolean(m["sharp"], path + ".sharp");
  if (m.contains("reference_line")) {
    out.reference_line = rd.string(m["reference_line"], path + ".reference_line");
  }

  switch (out.kind) {
    case ModelKind::CorrelatedWalk: {
      rd.check_keys(m, path, {"kind", "c", "sharp", "reference_line"});
      if (!m.contains("c")) {
        rd.error(path + ".c", "missing");
      } else if (auto c = rd.number(m["c"], path + ".c")) {
        out.c = *c;
      }
      if (out.reference_line && *out.reference_line != "+1") {
        rd.error(path + ".reference_line", "the correlated walk uses line \"+1\" as reference");
      }
      return;
    }
    case ModelKind::ModulatedQueue: {
      rd.check_keys(m, path, {"kind", "lines", "a", "b", "c", "allow_large_drift", "sharp",
                              "reference_line"});
      if (!m.contains("lines")) {
        rd.error(path + ".lines", "missing");
        return;
      }
      out.lines = rd.labels(m["lines"], path + ".lines");
      if (out.lines.empty()) return;
      for (const char* key : {"a", "b", "c"}) {
        if (!m.contains(key)) rd.error(path + "." + key, "missing");
      }
      if (m.contains("a")) out.a = rd.matrix(m["a"], out.lines, path + ".a");
      if (m.contains("b")) out.b = rd.matrix(m["b"], out.lines, path + ".b");
      if (m.contains("c")) out.c_values = rd.per_line(m["c"], out.lines, path + ".c");
      if (m.contains("allow_large_drift")) {
        out.allow_large_drift =
            rd.boolean(m["allow_large_drift"], path + ".allow_large_drift").value_or(false);
      }
      if (!out.allow_large_drift) {
        for (std::size_t i = 0; i < out.c_values.size(); ++i) {
          if (std::abs(out.c_values[i]) >= 0.5) {
            rd.error(path + ".c." + out.lines[i],
                     "|c| must be < 1/2 (set allow_large_drift to permit larger values)");
          }
        }
      }
      break;
    }
    case ModelKind::HomogeneousStrip:
    case ModelKind::Tabular: {
      const bool tab = out.kind == ModelKind::Tabular;
      if (tab) {
        rd.check_keys(m, path, {"kind", "lines", "rows", "tail", "sharp", "reference_line"});
      } else {
        rd.check_keys(m, path, {"kind", "lines", "x0", "increments", "boundary", "sharp",
                                "reference_line"});
      }
      if (!m.contains("lines")) {
        rd.error(path + ".lines", "missing");
        return;
      }
      out.lines = rd.labels(m["lines"], path + ".lines");
      if (out.lines.empty()) return;
      const json* tail = &m;
      std::string tail_path = path;
      if (tab) {
        if (m.contains("rows")) out.rows = rd.row_table(m["rows"], out.lines, path + ".rows");
        if (!m.contains("tail") || !m["tail"].is_object()) {
          rd.error(path + ".tail", "expected an object with x0, increments, boundary");
          return;
        }
        tail = &m["tail"];
        tail_path = path + ".tail";
        rd.check_keys(*tail, tail_path, {"x0", "increments", "boundary"});
      }
      if (tail->contains("x0")) {
        if (auto x0 = rd.integer((*tail)["x0"], tail_path + ".x0")) out.x0 = *x0;
      }
      if (!tail->contains("increments")) {
        rd.error(tail_path + ".increments", "missing");
      } else {
        out.increments = rd.increments((*tail)["increments"], out.lines, tail_path + ".increments");
      }
      if (tail->contains("boundary")) {
        out.boundary = rd.row_table((*tail)["boundary"], out.lines, tail_path + ".boundary");
      }
      break;
    }
  }
  if (out.reference_line &&
      std::find(out.lines.begin(), out.lines.end(), *out.reference_line) == out.lines.end()) {
    rd.error(path + ".reference_line", "unknown line '" + *out.reference_line + "'");
  }
}

void read_command(Reader& rd, const json& c, CommandConfig& out) {
  const std::string path = "command";
  if (!c.is_object()) {
    rd.error(path, "expected an object");
    return;
  }
  rd.check_keys(c, path, {"name", "mode", "grid", "estimate", "steps", "trials", "initial", "x",
                          "line", "r_max", "d_grid", "x_set", "horizon", "horizon_a"});
  if (!c.contains("name")) {
    rd.error(path + ".name", "missing");
  } else if (auto name = rd.string(c["name"], path + ".name")) {
    if (std::find(kCommandNames.begin(), kCommandNames.end(), *name) == kCommandNames.end()) {
      rd.error(path + ".name", "unknown command '" + *name + "'");
    }
    out.name = *name;
  }
  if (c.contains("mode")) {
    if (auto m = rd.string(c["mode"], path + ".mode")) {
      out.mode = parse_drift_mode(*m);
      if (!out.mode) rd.error(path + ".mode", "expected \"constant\" or \"lamperti\"");
    }
  }
  if (c.contains("grid")) {
    out.grid = rd.heights(c["grid"], path + ".grid");
    try {
      validate_grid(out.grid);
    } catch (const Error& e) {
      rd.error(path + ".grid", e.what());
    }
  }
  if (c.contains("estimate")) out.estimate = rd.boolean(c["estimate"], path + ".estimate");
  if (c.contains("steps")) out.steps = rd.count(c["steps"], path + ".steps");
  if (c.contains("trials")) out.trials = rd.count(c["trials"], path + ".trials");
  if (c.contains("initial")) {
    const json& init = c["initial"];
    if (!init.is_object()) {
      rd.error(path + ".initial", "expected {\"x\", \"line\"}");
    } else {
      rd.check_keys(init, path + ".initial", {"x", "line"});
      if (init.contains("x")) out.initial_x = rd.integer(init["x"], path + ".initial.x");
      if (init.contains("line")) out.initial_line = rd.string(init["line"], path + ".initial.line");
    }
  }
  if (c.contains("x")) out.x = rd.integer(c["x"], path + ".x");
  if (c.contains("line")) out.line = rd.string(c["line"], path + ".line");
  if (c.contains("r_max")) out.r_max = rd.count(c["r_max"], path + ".r_max");
  if (c.contains("d_grid")) out.d_grid = rd.heights(c["d_grid"], path + ".d_grid");
  if (c.contains("x_set")) out.x_set = rd.heights(c["x_set"], path + ".x_set");
  if (c.contains("horizon")) out.horizon = rd.count(c["horizon"], path + ".horizon");
  if (c.contains("horizon_a")) out.horizon_a = rd.number(c["horizon_a"], path + ".horizon_a");
  for (auto* v : {&out.steps, &out.trials}) {
    if (*v && **v == 0) rd.error(path, "steps and trials must be >= 1");
  }
  if (out.initial_x && *out.initial_x < 0) rd.error(path + ".initial.x", "must be >= 0");
  if (out.x && *out.x < 0) rd.error(path + ".x", "must be >= 0");
  if (out.horizon_a && !(*out.horizon_a > 0.0)) rd.error(path + ".horizon_a", "must be > 0");
}

std::pair<std::size_t, std::size_t> line_and_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t k = 0; k < std::min(byte, text.size()) && k + 1 < byte; ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

json row_json(const TransitionRow& r, const std::vector<std::string>& lines) {
  json arr = json::array();
  for (const auto& e : r.entries) arr.push_back({{"x", e.x}, {"line", lines[e.line]}, {"p", e.probability}});
  return arr;
}

json table_json(const RowTable& t, const std::vector<std::string>& lines) {
  json arr = json::array();
  for (const auto& [s, r] : t) {
    arr.push_back({{"x", s.x}, {"line", lines[s.line]}, {"row", row_json(r, lines)}});
  }
  return arr;
}

json matrix_json(const std::vector<std::vector<double>>& m, const std::vector<std::string>& lines) {
  json obj = json::object();
  for (std::size_t i = 0; i < m.size(); ++i) obj[lines[i]] = m[i];
  return obj;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_and_column(text, e.byte);
    std::string msg = e.what();
    throw ConfigError(ErrorCode::Parse, {"parse error at line " + std::to_string(line) +
                                         ", column " + std::to_string(col) + ": " + msg});
  }
  Reader rd;
  RunConfig cfg;
  if (!doc.is_object()) {
    throw ConfigError(ErrorCode::Validation, {"(root): expected a JSON object"});
  }
  rd.check_keys(doc, "(root)", {"model", "command", "seed", "output"});
  if (!doc.contains("model")) {
    rd.error("model", "missing");
  } else {
    read_model(rd, doc["model"], cfg.model);
  }
  if (!doc.contains("command")) {
    rd.error("command", "missing");
  } else {
    read_command(rd, doc["command"], cfg.command);
  }
  if (!doc.contains("seed")) {
    rd.error("seed", "missing (runs must be seeded)");
  } else if (!doc["seed"].is_number_unsigned() &&
             !(doc["seed"].is_number_integer() && doc["seed"].get<std::int64_t>() >= 0)) {
    rd.error("seed", "expected a non-negative 64-bit integer");
  } else {
    cfg.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("output")) {
    const json& o = doc["output"];
    if (!o.is_object()) {
      rd.error("output", "expected an object");
    } else {
      rd.check_keys(o, "output", {"path", "format"});
      if (o.contains("path")) cfg.output_path = rd.string(o["path"], "output.path").value_or(".");
      if (o.contains("format")) {
        if (auto f = rd.string(o["format"], "output.format")) {
          if (auto fmt = parse_output_format(*f)) {
            cfg.format = *fmt;
          } else {
            rd.error("output.format", "expected json, csv or text");
          }
        }
      }
    }
  }
  if (rd.errors.empty()) {
    try {
      build_model(cfg.model);
    } catch (const Error& e) {
      rd.error("model", e.what());
    }
  }
  if (!rd.errors.empty()) throw ConfigError(ErrorCode::Validation, std::move(rd.errors));
  return cfg;
}

std::string render_config(const RunConfig& cfg) {
  json doc;
  const ModelConfig& m = cfg.model;
  json model = {{"kind", std::string(to_string(m.kind))}};
  if (m.sharp) model["sharp"] = *m.sharp;
  if (m.reference_line) model["reference_line"] = *m.reference_line;
  switch (m.kind) {
    case ModelKind::CorrelatedWalk:
      model["c"] = m.c;
      break;
    case ModelKind::ModulatedQueue: {
      model["lines"] = m.lines;
      model["a"] = matrix_json(m.a, m.lines);
      model["b"] = matrix_json(m.b, m.lines);
      json c = json::object();
      for (std::size_t i = 0; i < m.c_values.size(); ++i) c[m.lines[i]] = m.c_values[i];
      model["c"] = c;
      if (m.allow_large_drift) model["allow_large_drift"] = true;
      break;
    }
    case ModelKind::HomogeneousStrip:
    case ModelKind::Tabular: {
      model["lines"] = m.lines;
      json tail;
      tail["x0"] = m.x0;
      json inc = json::object();
      for (std::size_t i = 0; i < m.increments.size(); ++i) {
        json arr = json::array();
        for (const auto& e : m.increments[i]) {
          arr.push_back({{"z", e.z}, {"to", m.lines[e.to_line]}, {"p", e.probability}});
        }
        inc[m.lines[i]] = arr;
      }
      tail["increments"] = inc;
      tail["boundary"] = table_json(m.boundary, m.lines);
      if (m.kind == ModelKind::Tabular) {
        model["tail"] = tail;
        model["rows"] = table_json(m.rows, m.lines);
      } else {
        model.update(tail);
      }
      break;
    }
  }
  doc["model"] = model;

  const CommandConfig& c = cfg.command;
  json cmd = {{"name", c.name}};
  if (c.mode) cmd["mode"] = std::string(to_string(*c.mode));
  if (!c.grid.empty()) cmd["grid"] = c.grid;
  if (c.estimate) cmd["estimate"] = *c.estimate;
  if (c.steps) cmd["steps"] = *c.steps;
  if (c.trials) cmd["trials"] = *c.trials;
  if (c.initial_x || c.initial_line) {
    json init = json::object();
    if (c.initial_x) init["x"] = *c.initial_x;
    if (c.initial_line) init["line"] = *c.initial_line;
    cmd["initial"] = init;
  }
  if (c.x) cmd["x"] = *c.x;
  if (c.line) cmd["line"] = *c.line;
  if (c.r_max) cmd["r_max"] = *c.r_max;
  if (!c.d_grid.empty()) cmd["d_grid"] = c.d_grid;
  if (!c.x_set.empty()) cmd["x_set"] = c.x_set;
  if (c.horizon) cmd["horizon"] = *c.horizon;
  if (c.horizon_a) cmd["horizon_a"] = *c.horizon_a;
  doc["command"] = cmd;
  doc["seed"] = cfg.seed;
  doc["output"] = {{"path", cfg.output_path}, {"format", std::string(to_string(cfg.format))}};
  return doc.dump(2) + "\n";
}

ModelPtr build_model(const ModelConfig& m) {
  const bool sharp = m.sharp.value_or(true);
  auto ref_index = [&](const std::vector<std::string>& lines) -> std::size_t {
    if (!m.reference_line) return 0;
    auto it = std::find(lines.begin(), lines.end(), *m.reference_line);
    if (it == lines.end()) fail(ErrorCode::Validation, "unknown reference line");
    return static_cast<std::size_t>(it - lines.begin());
  };
  switch (m.kind) {
    case ModelKind::CorrelatedWalk:
      return correlated_walk_model(m.c, {}, sharp);
    case ModelKind::ModulatedQueue: {
      ModulatedQueueOptions opts;
      opts.allow_large_drift = m.allow_large_drift;
      opts.sharp = sharp;
      opts.reference_line = ref_index(m.lines);
      return modulated_queue_model(ModulationMatrix::from_rows(m.a), ModulationMatrix::from_rows(m.b),
                                   m.c_values, opts, m.lines);
    }
    case ModelKind::HomogeneousStrip:
      return homogeneous_strip_model(LineSet{m.lines, ref_index(m.lines)}, m.increments, m.x0,
                                     m.boundary, sharp);
    case ModelKind::Tabular: {
      auto tail = homogeneous_strip_model(LineSet{m.lines, ref_index(m.lines)}, m.increments, m.x0,
                                          m.boundary, sharp);
      return tabular_model(m.rows, std::move(tail));
    }
  }
  fail(ErrorCode::Validation, "unknown model kind");
}

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : render_config(config)) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace halfstrip
