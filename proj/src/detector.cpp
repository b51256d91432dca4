#include "momentid/detector.hpp"

#include <cmath>
#include <string>

#include "momentid/errors.hpp"

namespace momentid {

namespace {

MomentEstimate diff_of(const MomentSource& src, int p, int q, double& magnitude) {
  const auto& f = src.full();
  magnitude = std::abs(f[0](p, q)) + std::abs(f[1](p, q));
  return src.evaluate([p, q](const TableSet& s) { return s[0](p, q) - s[1](p, q); });
}

double q1_of(const TableSet& s) {
  return (s[0](1, 1) - s[1](1, 1)) / (s[0](2, 0) - s[1](2, 0));
}

double q2_of(const TableSet& s) {
  return (s[0](0, 2) - s[1](0, 2)) / (s[0](1, 1) - s[1](1, 1));
}

// Shared by both entry points once the marginal comparison is settled.
ChangeVerdict classify(const MomentSource& src, bool t_differs, bool y_differs,
                       ChangeVerdict verdict, const DetectorConfig& cfg) {
  const auto rule = cfg.estimator.rule();
  auto& ev = verdict.evidence;

  double mag_ty = 0.0;
  const auto d_ty = diff_of(src, 1, 1, mag_ty);
  ev["ty_diff"] = d_ty.value;
  ev["ty_diff_se"] = d_ty.se;
  const bool ty_differs = rule.nonzero(d_ty, mag_ty);

  if (!t_differs && y_differs) {
    // Under a gamma change E[TY] must move; a change of the outcome noise
    // alone cannot move it.
    verdict.source = ty_differs ? ChangeSource::Gamma : ChangeSource::EpsYSuspected;
    return verdict;
  }

  double mag_tt = 0.0, mag_yy = 0.0;
  const auto d_tt = diff_of(src, 2, 0, mag_tt);
  const auto d_yy = diff_of(src, 0, 2, mag_yy);
  ev["tt_diff"] = d_tt.value;
  ev["yy_diff"] = d_yy.value;
  const bool tt_differs = rule.nonzero(d_tt, mag_tt);

  if (!tt_differs && !ty_differs) {
    verdict.source = ChangeSource::NoiseTorU;
    return verdict;
  }
  if (tt_differs != ty_differs) {
    verdict.source = ChangeSource::Alpha;
    return verdict;
  }

  const auto q1 = src.evaluate(q1_of);
  const auto q2 = src.evaluate(q2_of);
  const auto gap = src.evaluate([](const TableSet& s) { return q1_of(s) - q2_of(s); });
  ev["q1"] = q1.value;
  ev["q2"] = q2.value;
  ev["se_q1"] = q1.se;
  ev["se_q2"] = q2.se;
  ev["q_gap_se"] = gap.se;
  const bool equal = !rule.nonzero(gap, std::abs(q1.value) + std::abs(q2.value));
  verdict.source = equal ? ChangeSource::NoiseTorU : ChangeSource::Alpha;
  return verdict;
}

bool marginal_moments_differ(const MomentSource& src, bool treatment, const DetectorConfig& cfg) {
  const auto rule = cfg.estimator.rule();
  for (int k = 1; k <= src.degree(); ++k) {
    double mag = 0.0;
    const auto d = treatment ? diff_of(src, k, 0, mag) : diff_of(src, 0, k, mag);
    if (rule.nonzero(d, mag)) return true;
  }
  return false;
}

EstimateReport dispatch(const MomentSource& src, const ChangeVerdict& verdict,
                        const DetectorConfig& cfg) {
  const auto& est = cfg.estimator;
  EstimateReport report;
  switch (verdict.source) {
    case ChangeSource::Gamma: report = estimate_gamma(src, est); break;
    case ChangeSource::Alpha: report = estimate_alpha(src, est); break;
    case ChangeSource::EpsYSuspected:
      throw Error(ErrorCode::NonIdentifiable,
                  "only the outcome noise appears to change; the effect is not identifiable");
    case ChangeSource::NoiseTorU: {
      report = estimate_eps_t(src, est);
      const auto other = estimate_eps_u(src, est);
      report.candidates = std::make_pair(*report.beta_hat, *other.beta_hat);
      report.beta_hat.reset();
      report.branch = "candidates";
      for (const auto& [key, value] : other.diagnostics) report.diagnostics["alg2_" + key] = value;
      break;
    }
  }
  for (const auto& [key, value] : verdict.evidence) report.diagnostics["detect_" + key] = value;
  report.detected_source = std::string(source_name(verdict.source));
  return report;
}

}  // namespace

std::string_view source_name(ChangeSource source) {
  switch (source) {
    case ChangeSource::Gamma: return "gamma";
    case ChangeSource::Alpha: return "alpha";
    case ChangeSource::NoiseTorU: return "noise_t_or_u";
    case ChangeSource::EpsYSuspected: return "eps_y_suspected";
  }
  return "unknown";
}

ChangeSource parse_source(std::string_view name) {
  for (auto s : {ChangeSource::Gamma, ChangeSource::Alpha, ChangeSource::NoiseTorU,
                 ChangeSource::EpsYSuspected}) {
    if (source_name(s) == name) return s;
  }
  throw Error(ErrorCode::ParseError, "unknown change source '" + std::string(name) + "'");
}

ChangeVerdict detect_source(const EnvPairDataset& data, const DetectorConfig& cfg) {
  data.validate();
  const auto ks_t = ks_two_sample_test(data.t1, data.t2, cfg.ks_alpha);
  const auto ks_y = ks_two_sample_test(data.y1, data.y2, cfg.ks_alpha);
  ChangeVerdict verdict;
  verdict.evidence["ks_T"] = ks_t.statistic;
  verdict.evidence["ks_Y"] = ks_y.statistic;
  verdict.evidence["ks_critical"] = ks_t.critical;
  // Second moments only: the detector never needs higher orders.
  auto est = cfg.estimator;
  est.max_order = 3;
  return classify(dataset_moments(data, est), ks_t.differ, ks_y.differ, std::move(verdict), cfg);
}

ChangeVerdict detect_source(const MomentSource& source, const DetectorConfig& cfg) {
  const bool t_differs = marginal_moments_differ(source, true, cfg);
  const bool y_differs = marginal_moments_differ(source, false, cfg);
  ChangeVerdict verdict;
  verdict.evidence["T_differs"] = t_differs ? 1.0 : 0.0;
  verdict.evidence["Y_differs"] = y_differs ? 1.0 : 0.0;
  return classify(source, t_differs, y_differs, std::move(verdict), cfg);
}

EstimateReport estimate_auto(const EnvPairDataset& data, const DetectorConfig& cfg) {
  const auto verdict = detect_source(data, cfg);
  return dispatch(dataset_moments(data, cfg.estimator), verdict, cfg);
}

EstimateReport estimate_auto(const MomentSource& source, const DetectorConfig& cfg) {
  return dispatch(source, detect_source(source, cfg), cfg);
}

}  // namespace momentid
