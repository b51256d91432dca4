#include "momentid/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "momentid/errors.hpp"
#include "momentid/io.hpp"
#include "toml_util.hpp"

namespace momentid {

namespace {

enum Stream : std::uint64_t { kParamStream = 1, kDataStream = 2 };

double draw(const Range& r, StreamRng& rng) {
  const double u = rng.uniform();
  return r.lo + (r.hi - r.lo) * u;
}

std::string family_label(const ScenarioTemplate& tmpl) {
  std::string s(family_name(tmpl.noise_family));
  if (tmpl.changed_family && *tmpl.changed_family != tmpl.noise_family) {
    s += "+" + std::string(family_name(*tmpl.changed_family));
  }
  return s;
}

Range range_at(const toml::node& node, const std::string& where) {
  if (node.is_array()) {
    const auto v = detail::numbers_at(node, where);
    if (v.size() != 2 || v[0] > v[1]) detail::schema_error(where, "expected [lo, hi] with lo <= hi");
    return {v[0], v[1]};
  }
  const double x = detail::number_at(node, where);
  return {x, x};
}

std::vector<Method> methods_at(const toml::node& node, const std::string& where) {
  const auto* arr = node.as_array();
  if (!arr) detail::schema_error(where, "expected an array of method names");
  std::vector<Method> out;
  for (std::size_t i = 0; i < arr->size(); ++i) {
    out.push_back(parse_method(detail::string_at(*arr->get(i), where)));
  }
  return out;
}

ScenarioTemplate template_from(const toml::table& t, const std::string& where) {
  ScenarioTemplate tmpl;
  const auto* change = t.get("change");
  if (!change) detail::schema_error(where, "missing key 'change'");
  tmpl.change = parse_change(detail::string_at(*change, where + ".change"));
  tmpl.name = std::string(change_name(tmpl.change));
  for (const auto& [key, value] : t) {
    const std::string k(key.str());
    const std::string at = where + "." + k;
    if (k == "change") continue;
    if (k == "name") tmpl.name = detail::string_at(value, at);
    else if (k == "noise_family") tmpl.noise_family = parse_family(detail::string_at(value, at));
    else if (k == "changed_family") tmpl.changed_family = parse_family(detail::string_at(value, at));
    else if (k == "gamma_shape") tmpl.gamma_shape = detail::number_at(value, at);
    else if (k == "alpha") tmpl.alpha = range_at(value, at);
    else if (k == "beta") tmpl.beta = range_at(value, at);
    else if (k == "gamma") tmpl.gamma = range_at(value, at);
    else if (k == "lambda") tmpl.lambda = range_at(value, at);
    else if (k == "lambda_changed") tmpl.lambda_changed = range_at(value, at);
    else if (k == "alpha_changed") tmpl.alpha_changed = range_at(value, at);
    else if (k == "gamma_changed") tmpl.gamma_changed = range_at(value, at);
    else if (k == "methods") tmpl.methods = methods_at(value, at);
    else detail::schema_error(where, "unknown key '" + k + "'");
  }
  return tmpl;
}

ResultRow make_row(const ScenarioTemplate& tmpl, std::size_t n, std::size_t rep, Method method,
                   double beta_true) {
  ResultRow row;
  row.scenario = tmpl.name;
  row.noise_family = family_label(tmpl);
  row.n = n;
  row.rep = rep;
  row.method = method;
  row.beta_true = beta_true;
  return row;
}

void fill_row(ResultRow& row, const EnvPairDataset& data, const MomentSource* source,
              const EstimatorConfig& est) {
  try {
    EstimateReport report;
    if (row.method == Method::OlsCombined) {
      report = ols_combined(data, est);
    } else {
      report = run_method(row.method, *source, 0.5, est);
    }
    row.beta_hat = report.beta_hat;
    row.order_found = report.order_found;
    row.branch = report.branch;
  } catch (const Error& e) {
    row.error = std::string(to_string(e.code()));
  }
}

std::uint64_t data_seed(const ExperimentConfig& cfg, std::size_t s, std::size_t rep,
                        std::size_t n) {
  return derive_seed(cfg.seed, {kDataStream, s, rep, n});
}

ScenarioSpec scenario_for(const ExperimentConfig& cfg, std::size_t s, std::size_t rep) {
  return draw_scenario(cfg.scenarios[s], cfg.seed, s, cfg.freeze_parameters ? 0 : rep);
}

// Rows for one (scenario, rep, n) cell, in method order.
void run_cell(const ExperimentConfig& cfg, std::size_t s, std::size_t rep, std::size_t n,
              const ScenarioSpec& scenario, const std::vector<Method>& methods,
              ResultRow* out) {
  const auto est = cfg.estimator();
  const auto data = simulate(scenario, n, data_seed(cfg, s, rep, n));
  std::optional<MomentSource> source;
  const bool needs_tables = std::any_of(methods.begin(), methods.end(),
                                        [](Method m) { return m != Method::OlsCombined; });
  std::optional<std::string> source_error;
  if (needs_tables) {
    try {
      source = dataset_moments(data, est);
    } catch (const Error& e) {
      source_error = std::string(to_string(e.code()));
    }
  }
  for (std::size_t m = 0; m < methods.size(); ++m) {
    ResultRow& row = out[m];
    row = make_row(cfg.scenarios[s], n, rep, methods[m], scenario.env1.beta);
    if (source_error && methods[m] != Method::OlsCombined) {
      row.error = source_error;
      continue;
    }
    fill_row(row, data, source ? &*source : nullptr, est);
  }
}

}  // namespace

EnvPairDataset simulate(const ScenarioSpec& scenario, std::size_t n, std::uint64_t seed) {
  EnvPairDataset out;
  auto env = [&](const ScmParams& p, std::uint64_t index, std::vector<double>& t,
                 std::vector<double>& y) {
    const auto eu = sample(p.noise_u, n, derive_seed(seed, {index, 0}));
    const auto et = sample(p.noise_t, n, derive_seed(seed, {index, 1}));
    const auto ey = sample(p.noise_y, n, derive_seed(seed, {index, 2}));
    t.resize(n);
    y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = p.alpha * eu[i] + et[i];
      y[i] = p.beta * t[i] + p.gamma * eu[i] + ey[i];
    }
  };
  env(scenario.env1, 1, out.t1, out.y1);
  env(scenario.env2, 2, out.t2, out.y2);
  return out;
}

NoiseSpec family_noise(NoiseFamily family, double lambda, double gamma_shape) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be positive");
  const double scale = 1.0 / lambda;
  switch (family) {
    case NoiseFamily::Exponential: return NoiseSpec::exponential(lambda);
    case NoiseFamily::Gamma: return NoiseSpec::gamma(gamma_shape, scale);
    case NoiseFamily::Gumbel: return NoiseSpec::gumbel(scale);
    case NoiseFamily::Logistic: return NoiseSpec::logistic(scale);
    case NoiseFamily::Uniform: return NoiseSpec::uniform(scale);
    case NoiseFamily::Gaussian: return NoiseSpec::gaussian(scale);
    case NoiseFamily::PointMass: return NoiseSpec::point_mass();
  }
  throw Error(ErrorCode::InvalidArgument, "unknown noise family");
}

std::optional<Method> matching_method(ChangeKind change) {
  switch (change) {
    case ChangeKind::EpsT: return Method::Alg1;
    case ChangeKind::EpsU: return Method::Alg2;
    case ChangeKind::Gamma: return Method::Alg3;
    case ChangeKind::Alpha: return Method::Alg4;
    default: return std::nullopt;
  }
}

std::vector<Method> methods_for(const ScenarioTemplate& tmpl) {
  if (!tmpl.methods.empty()) return tmpl.methods;
  std::vector<Method> out;
  if (const auto m = matching_method(tmpl.change)) {
    out.push_back(*m);
  } else {
    out = {Method::Alg1, Method::Alg2};
  }
  out.push_back(Method::OlsSeparate);
  out.push_back(Method::OlsCombined);
  return out;
}

ScenarioSpec draw_scenario(const ScenarioTemplate& tmpl, std::uint64_t seed,
                           std::size_t scenario_index, std::size_t rep) {
  StreamRng rng(derive_seed(seed, {kParamStream, scenario_index, rep}));
  ScmParams e;
  e.alpha = draw(tmpl.alpha, rng);
  e.beta = draw(tmpl.beta, rng);
  e.gamma = draw(tmpl.gamma, rng);
  e.noise_u = family_noise(tmpl.noise_family, draw(tmpl.lambda, rng), tmpl.gamma_shape);
  e.noise_t = family_noise(tmpl.noise_family, draw(tmpl.lambda, rng), tmpl.gamma_shape);
  e.noise_y = family_noise(tmpl.noise_family, draw(tmpl.lambda, rng), tmpl.gamma_shape);

  ScenarioSpec out{e, e, tmpl.change};
  const NoiseFamily changed = tmpl.changed_family.value_or(tmpl.noise_family);
  auto changed_noise = [&] {
    return family_noise(changed, draw(tmpl.lambda_changed, rng), tmpl.gamma_shape);
  };
  switch (tmpl.change) {
    case ChangeKind::EpsT: out.env2.noise_t = changed_noise(); break;
    case ChangeKind::EpsU: out.env2.noise_u = changed_noise(); break;
    case ChangeKind::EpsY: out.env2.noise_y = changed_noise(); break;
    case ChangeKind::EpsTAndEpsU:
      out.env2.noise_t = changed_noise();
      out.env2.noise_u = changed_noise();
      break;
    case ChangeKind::Gamma: out.env2.gamma = draw(tmpl.gamma_changed, rng); break;
    case ChangeKind::Alpha: out.env2.alpha = draw(tmpl.alpha_changed, rng); break;
  }
  return out;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (scenarios.empty()) fail("experiment has no scenarios");
  if (sample_sizes.empty()) fail("sample_sizes must be nonempty");
  for (std::size_t i = 0; i < sample_sizes.size(); ++i) {
    if (sample_sizes[i] < 2) fail("sample sizes must be at least 2");
    if (i > 0 && sample_sizes[i] <= sample_sizes[i - 1]) fail("sample_sizes must be ascending");
  }
  if (replicates < 1) fail("replicates must be at least 1");
  if (!(z_threshold > 0.0)) fail("z_threshold must be positive");
  if (max_order < 3 || max_order > kHardMaxOrder) fail("max_order out of range");
  for (const auto& s : scenarios) {
    if (s.name.empty() || s.name.find_first_of(",\n\"") != std::string::npos) {
      fail("scenario names must be nonempty and free of commas, quotes and newlines");
    }
    for (const Range* r : {&s.alpha, &s.beta, &s.gamma, &s.lambda, &s.lambda_changed,
                           &s.alpha_changed, &s.gamma_changed}) {
      if (r->lo > r->hi) fail("scenario '" + s.name + "': range with lo > hi");
    }
    if (s.lambda.lo <= 0.0 || s.lambda_changed.lo <= 0.0) {
      fail("scenario '" + s.name + "': lambda must be positive");
    }
  }
}

EstimatorConfig ExperimentConfig::estimator() const {
  EstimatorConfig est;
  est.z = z_threshold;
  est.max_order = max_order;
  return est;
}

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  for (auto change : {ChangeKind::EpsT, ChangeKind::EpsU, ChangeKind::Gamma, ChangeKind::Alpha}) {
    ScenarioTemplate t;
    t.change = change;
    t.name = std::string(change_name(change));
    cfg.scenarios.push_back(t);
  }
  return cfg;
}

ExperimentConfig parse_experiment_toml(std::string_view text) {
  const auto root = detail::parse_toml(text, "experiment");
  ExperimentConfig cfg;
  for (const auto& [key, value] : root) {
    const std::string k(key.str());
    if (k == "scenario") {
      const auto* arr = value.as_array();
      if (!arr) detail::schema_error("scenario", "expected [[scenario]] tables");
      for (std::size_t i = 0; i < arr->size(); ++i) {
        const std::string at = "scenario[" + std::to_string(i) + "]";
        cfg.scenarios.push_back(template_from(detail::table_at(*arr->get(i), at), at));
      }
    } else if (k == "sample_sizes") {
      cfg.sample_sizes.clear();
      for (double v : detail::numbers_at(value, k)) {
        if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
          detail::schema_error(k, "sample sizes must be nonnegative integers");
        }
        cfg.sample_sizes.push_back(static_cast<std::size_t>(v));
      }
    } else if (k == "replicates") {
      const auto v = value.value<std::int64_t>();
      if (!v || *v < 1) detail::schema_error(k, "expected a positive integer");
      cfg.replicates = static_cast<std::size_t>(*v);
    } else if (k == "seed") {
      const auto v = value.value<std::int64_t>();
      if (!v || *v < 0) detail::schema_error(k, "expected a nonnegative integer");
      cfg.seed = static_cast<std::uint64_t>(*v);
    } else if (k == "z_threshold") {
      cfg.z_threshold = detail::number_at(value, k);
    } else if (k == "max_order") {
      const auto v = value.value<std::int64_t>();
      if (!v) detail::schema_error(k, "expected an integer");
      cfg.max_order = static_cast<int>(*v);
    } else if (k == "freeze_parameters") {
      const auto v = value.value<bool>();
      if (!v) detail::schema_error(k, "expected a boolean");
      cfg.freeze_parameters = *v;
    } else if (k == "output_path") {
      cfg.output_path = detail::string_at(value, k);
    } else if (k == "threads") {
      const auto v = value.value<std::int64_t>();
      if (!v || *v < 0) detail::schema_error(k, "expected a nonnegative integer");
      cfg.threads = static_cast<int>(*v);
    } else {
      detail::schema_error("experiment", "unknown key '" + k + "'");
    }
  }
  if (cfg.scenarios.empty()) cfg.scenarios = default_config().scenarios;
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_experiment_toml(ss.str());
}

std::optional<double> ResultRow::rel_bias() const {
  if (!beta_hat) return std::nullopt;
  return *beta_hat / beta_true - 1.0;
}

int worker_count(const ExperimentConfig& cfg) {
  int n = cfg.threads > 0 ? cfg.threads
                          : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("MOMENT_IDENT_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) n = std::min<long>(n, cap);
  }
  return std::max(n, 1);
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::size_t n_sizes = cfg.sample_sizes.size();
  const std::size_t reps = cfg.replicates;

  std::vector<std::vector<Method>> methods;
  std::vector<std::size_t> offset;
  std::size_t total = 0;
  for (const auto& s : cfg.scenarios) {
    methods.push_back(methods_for(s));
    offset.push_back(total);
    total += n_sizes * reps * methods.back().size();
  }
  std::vector<ResultRow> rows(total);

  // One task per (scenario, rep); rows land at their final sorted position.
  const std::size_t tasks = cfg.scenarios.size() * reps;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t task = next++; task < tasks; task = next++) {
      const std::size_t s = task / reps;
      const std::size_t rep = task % reps;
      const auto scenario = scenario_for(cfg, s, rep);
      const std::size_t per = methods[s].size();
      for (std::size_t ni = 0; ni < n_sizes; ++ni) {
        ResultRow* out = &rows[offset[s] + (ni * reps + rep) * per];
        run_cell(cfg, s, rep, cfg.sample_sizes[ni], scenario, methods[s], out);
      }
    }
  };
  const int workers = std::min<int>(worker_count(cfg), static_cast<int>(tasks));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return rows;
}

ResultRow replay_row(const ExperimentConfig& cfg, std::size_t scenario_index, std::size_t n,
                     std::size_t rep, Method method) {
  if (scenario_index >= cfg.scenarios.size()) {
    throw Error(ErrorCode::InvalidArgument, "scenario index out of range");
  }
  const auto scenario = scenario_for(cfg, scenario_index, rep);
  ResultRow row;
  run_cell(cfg, scenario_index, rep, n, scenario, {method}, &row);
  return row;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kResultsHeader << '\n';
  for (const auto& r : rows) {
    const auto bias = r.rel_bias();
    out << r.scenario << ',' << r.noise_family << ',' << r.n << ',' << r.rep << ','
        << method_name(r.method) << ',' << format_double(r.beta_true) << ','
        << (r.beta_hat ? format_double(*r.beta_hat) : "") << ','
        << (bias ? format_double(*bias) : "") << ','
        << (r.order_found ? std::to_string(*r.order_found) : "") << ',' << r.branch.value_or("")
        << ',' << r.error.value_or("") << '\n';
  }
}

}  // namespace momentid
