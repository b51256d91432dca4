#include "momentid/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "momentid/errors.hpp"

namespace momentid {

namespace {

void check_pair(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + ": length mismatch (" +
                                                std::to_string(a.size()) + " vs " +
                                                std::to_string(b.size()) + ")");
  }
  if (a.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + ": need at least 2 samples");
  }
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(a.begin(), a.end(), finite) || !std::all_of(b.begin(), b.end(), finite)) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + ": non-finite input");
  }
}

}  // namespace

void EnvPairDataset::validate() const {
  check_pair(t1, y1, "environment 1");
  check_pair(t2, y2, "environment 2");
}

MomentEstimate mixed_moment(std::span<const double> t, std::span<const double> y, int p, int q,
                            int max_order) {
  check_pair(t, y, "mixed_moment");
  if (p < 0 || q < 0 || p + q > max_order) {
    throw Error(ErrorCode::OrderOverflow,
                "mixed moment order " + std::to_string(p + q) + " unsupported");
  }
  const std::size_t n = t.size();
  double mean = 0.0;
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = std::pow(t[i], p) * std::pow(y[i], q);
    mean += v[i];
  }
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  return {mean, sd / std::sqrt(static_cast<double>(n)), n};
}

bool moment_diff_test(const MomentEstimate& a, const MomentEstimate& b, double z,
                      double abs_floor) {
  return std::abs(a.value - b.value) > z * std::hypot(a.se, b.se) + abs_floor;
}

MomentEstimate joint_cumulant(std::span<const double> x, std::span<const double> y, int px,
                              int py, int groups) {
  const int order = px + py;
  if (px < 0 || py < 0 || order < 3 || order > kHardMaxOrder) {
    throw Error(ErrorCode::OrderOverflow,
                "joint cumulant order " + std::to_string(order) + " unsupported");
  }
  check_pair(x, y, "joint_cumulant");
  const auto src = MomentSource::from_samples({{x, y}}, order, groups);
  return src.evaluate(
      [px, py](const TableSet& s) { return momentid::joint_cumulant(s[0], px, py); });
}

KsResult ks_two_sample_test(std::span<const double> a, std::span<const double> b,
                            double alpha_level) {
  if (a.empty() || b.empty()) {
    throw Error(ErrorCode::InvalidArgument, "KS test needs nonempty samples");
  }
  if (!(alpha_level > 0.0 && alpha_level < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "KS alpha level must lie in (0, 1)");
  }
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double n = static_cast<double>(sa.size());
  const double m = static_cast<double>(sb.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double v = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == v) ++i;
    while (j < sb.size() && sb[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  const double c = std::sqrt(-0.5 * std::log(alpha_level / 2.0));
  const double critical = c * std::sqrt((n + m) / (n * m));
  return {d, critical, d > critical};
}

bool ks_two_sample(std::span<const double> a, std::span<const double> b, double alpha_level) {
  return ks_two_sample_test(a, b, alpha_level).differ;
}

bool DecisionRule::nonzero(const MomentEstimate& e, double magnitude) const {
  if (!std::isfinite(e.value) || !std::isfinite(e.se)) return false;
  return std::abs(e.value) > z * e.se + abs_floor + rel_floor * std::abs(magnitude);
}

MomentSource MomentSource::exact(TableSet tables) {
  MomentSource out;
  out.full_ = std::move(tables);
  return out;
}

MomentSource MomentSource::from_samples(const std::vector<Slot>& slots, int degree,
                                        int groups) {
  if (slots.empty()) throw Error(ErrorCode::InvalidArgument, "no samples given");
  std::size_t min_n = std::numeric_limits<std::size_t>::max();
  for (const auto& s : slots) {
    check_pair(s.x, s.y, "moment source");
    min_n = std::min(min_n, s.x.size());
  }
  const int g = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(std::max(groups, 2)), min_n));

  MomentSource out;
  out.n_ = min_n;
  out.replicates_.assign(static_cast<std::size_t>(g), TableSet{});
  for (const auto& s : slots) {
    MomentAccumulator acc(degree, g);
    acc.add(s.x, s.y);
    out.full_.push_back(acc.full().centered());
    for (int k = 0; k < g; ++k) {
      out.replicates_[static_cast<std::size_t>(k)].push_back(acc.without_block(k).centered());
    }
  }
  return out;
}

int MomentSource::degree() const { return full_.empty() ? 0 : full_.front().degree(); }

MomentEstimate MomentSource::evaluate(const TableStatistic& stat) const {
  MomentEstimate out;
  out.value = stat(full_);
  out.n = n_;
  if (replicates_.empty()) return out;

  const double g = static_cast<double>(replicates_.size());
  std::vector<double> theta;
  theta.reserve(replicates_.size());
  for (const auto& rep : replicates_) {
    const double v = stat(rep);
    if (!std::isfinite(v)) {
      out.se = std::numeric_limits<double>::infinity();
      return out;
    }
    theta.push_back(v);
  }
  double mean = 0.0;
  for (double v : theta) mean += v;
  mean /= g;
  double ss = 0.0;
  for (double v : theta) ss += (v - mean) * (v - mean);
  out.se = std::sqrt((g - 1.0) / g * ss);
  return out;
}

}  // namespace momentid
