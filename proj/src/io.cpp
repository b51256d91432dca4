#include "momentid/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "toml_util.hpp"

namespace momentid {

namespace {

using nlohmann::ordered_json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view field, std::size_t line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::ParseError, "dataset line " + std::to_string(line) +
                                           ": not a finite number '" + std::string(field) + "'");
  }
  return v;
}

ordered_json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

void write_noise(std::ostream& out, const char* key, const NoiseSpec& spec) {
  out << key << " = { family = \"" << family_name(spec.family) << "\", params = [";
  for (std::size_t i = 0; i < spec.params.size(); ++i) {
    out << (i ? ", " : "") << format_double(spec.params[i]);
  }
  out << "]";
  if (spec.scale != 1.0) out << ", scale = " << format_double(spec.scale);
  out << " }\n";
}

void write_env(std::ostream& out, const char* name, const ScmParams& env) {
  out << "[" << name << "]\n";
  out << "alpha = " << format_double(env.alpha) << "\n";
  out << "beta = " << format_double(env.beta) << "\n";
  out << "gamma = " << format_double(env.gamma) << "\n";
  write_noise(out, "noise_u", env.noise_u);
  write_noise(out, "noise_t", env.noise_t);
  write_noise(out, "noise_y", env.noise_y);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, ptr);
  // TOML needs a decimal point or exponent to read a float back as a float.
  if (std::isfinite(v) && s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

EnvPairDataset read_dataset_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!trim(line).empty()) break;
  }
  if (lineno == 0 || trim(line).empty()) {
    throw Error(ErrorCode::ParseError, "dataset is empty");
  }
  std::string_view header = trim(line);
  if (header.substr(0, 3) == "\xEF\xBB\xBF") header.remove_prefix(3);
  if (header != "env,t,y") {
    throw Error(ErrorCode::ParseError,
                "dataset header must be 'env,t,y', got '" + std::string(header) + "'");
  }
  EnvPairDataset data;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    const auto c1 = row.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : row.find(',', c1 + 1);
    if (c2 == std::string_view::npos || row.find(',', c2 + 1) != std::string_view::npos) {
      throw Error(ErrorCode::ParseError,
                  "dataset line " + std::to_string(lineno) + ": expected 3 fields");
    }
    const std::string_view env = trim(row.substr(0, c1));
    const double t = parse_number(row.substr(c1 + 1, c2 - c1 - 1), lineno);
    const double y = parse_number(row.substr(c2 + 1), lineno);
    if (env == "1") {
      data.t1.push_back(t);
      data.y1.push_back(y);
    } else if (env == "2") {
      data.t2.push_back(t);
      data.y2.push_back(y);
    } else {
      throw Error(ErrorCode::ParseError, "dataset line " + std::to_string(lineno) +
                                             ": env must be 1 or 2, got '" + std::string(env) +
                                             "'");
    }
  }
  if (data.t1.size() < 2 || data.t2.size() < 2) {
    throw Error(ErrorCode::ParseError, "dataset needs at least 2 rows per environment");
  }
  return data;
}

EnvPairDataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open dataset '" + path.string() + "'");
  return read_dataset_csv(in);
}

void write_dataset_csv(std::ostream& out, const EnvPairDataset& data) {
  out << "env,t,y\n";
  auto rows = [&out](const char* env, const std::vector<double>& t, const std::vector<double>& y) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      out << env << ',' << format_double(t[i]) << ',' << format_double(y[i]) << '\n';
    }
  };
  rows("1", data.t1, data.y1);
  rows("2", data.t2, data.y2);
}

ScenarioSpec parse_scenario_toml(std::string_view text) {
  const auto root = detail::parse_toml(text, "scenario");
  ScenarioSpec out;
  const auto* change = root.get("change");
  if (!change) detail::schema_error("scenario", "missing key 'change'");
  out.change = parse_change(detail::string_at(*change, "change"));
  const auto* env1 = root.get("env1");
  if (!env1) detail::schema_error("scenario", "missing table [env1]");
  out.env1 = detail::scm_from(detail::table_at(*env1, "env1"), ScmParams{}, "env1");
  out.env2 = out.env1;
  if (const auto* env2 = root.get("env2")) {
    out.env2 = detail::scm_from(detail::table_at(*env2, "env2"), out.env1, "env2");
  }
  for (const auto& [key, value] : root) {
    (void)value;
    if (key != "change" && key != "env1" && key != "env2") {
      detail::schema_error("scenario", "unknown key '" + std::string(key.str()) + "'");
    }
  }
  const auto problems = validate(out);
  if (!problems.empty()) {
    std::string msg = "inconsistent scenario:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw Error(ErrorCode::InvalidArgument, msg);
  }
  return out;
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open scenario '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario_toml(ss.str());
}

std::string scenario_to_toml(const ScenarioSpec& scenario) {
  std::ostringstream out;
  out << "change = \"" << change_name(scenario.change) << "\"\n\n";
  write_env(out, "env1", scenario.env1);
  out << "\n";
  write_env(out, "env2", scenario.env2);
  return out.str();
}

std::string report_json(const EstimateReport& report) {
  ordered_json j;
  j["method"] = method_name(report.method);
  if (report.candidates) {
    j["candidates"] = {json_number(report.candidates->first),
                       json_number(report.candidates->second)};
  } else {
    j["beta_hat"] = report.beta_hat ? json_number(*report.beta_hat) : ordered_json(nullptr);
  }
  j["order_found"] = report.order_found ? ordered_json(*report.order_found) : nullptr;
  j["branch"] = report.branch ? ordered_json(*report.branch) : nullptr;
  if (report.detected_source) j["detected_source"] = *report.detected_source;
  ordered_json diag = ordered_json::object();
  for (const auto& [key, value] : report.diagnostics) diag[key] = json_number(value);
  j["diagnostics"] = diag;
  return j.dump(2);
}

std::string verdict_json(const ChangeVerdict& verdict) {
  ordered_json j;
  j["source"] = source_name(verdict.source);
  ordered_json ev = ordered_json::object();
  for (const char* key : {"ks_T", "ks_Y", "q1", "q2", "se_q1", "se_q2"}) {
    const auto it = verdict.evidence.find(key);
    ev[key] = it == verdict.evidence.end() ? ordered_json(nullptr) : json_number(it->second);
  }
  for (const auto& [key, value] : verdict.evidence) {
    if (!ev.contains(key)) ev[key] = json_number(value);
  }
  j["evidence"] = ev;
  return j.dump(2);
}

std::string error_json(ErrorCode code, std::string_view message) {
  ordered_json j;
  j["error"] = {{"code", to_string(code)}, {"message", message}};
  return j.dump();
}

}  // namespace momentid
