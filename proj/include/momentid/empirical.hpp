#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "momentid/moment_table.hpp"
#include "momentid/noise.hpp"

namespace momentid {

// Paired (treatment, outcome) samples from the two environments.
struct EnvPairDataset {
  std::vector<double> t1, y1;
  std::vector<double> t2, y2;

  // Throws InvalidArgument on length mismatch, short samples or non-finite values.
  void validate() const;
};

struct MomentEstimate {
  double value = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

/// Plug-in E[T^p Y^q] with standard error sd(t^p y^q) / sqrt(n).
MomentEstimate mixed_moment(std::span<const double> t, std::span<const double> y, int p, int q,
                            int max_order = kOracleMaxOrder);

/// True when the two estimates are statistically different:
/// |a - b| > z sqrt(se_a^2 + se_b^2) + abs_floor.
bool moment_diff_test(const MomentEstimate& a, const MomentEstimate& b, double z = 4.0,
                      double abs_floor = 1e-9);

/// Plug-in joint cumulant with px copies of x and py copies of y; the
/// standard error is a delete-a-group jackknife over `groups` blocks.
MomentEstimate joint_cumulant(std::span<const double> x, std::span<const double> y, int px,
                              int py, int groups = 20);

struct KsResult {
  double statistic = 0.0;
  double critical = 0.0;
  bool differ = false;
};

KsResult ks_two_sample_test(std::span<const double> a, std::span<const double> b,
                            double alpha_level = 0.01);

/// Asymptotic two-sample Kolmogorov-Smirnov decision; true = distributions differ.
bool ks_two_sample(std::span<const double> a, std::span<const double> b,
                   double alpha_level = 0.01);

// Decision rule shared by every "is this zero / are these equal" check.
struct DecisionRule {
  double z = 4.0;
  double abs_floor = 1e-9;
  // Relative slack against a caller-supplied magnitude; absorbs rounding when
  // the estimate is exact (se == 0).
  double rel_floor = 1e-9;

  bool nonzero(const MomentEstimate& e, double magnitude = 0.0) const;
};

using TableSet = std::vector<MomentTable>;
using TableStatistic = std::function<double(const TableSet&)>;

// Moment tables for one or more samples (slots), with jackknife replicates.
// Exact sources carry no replicates and report zero standard errors, which is
// how the population oracle plugs into the estimators.
class MomentSource {
 public:
  struct Slot {
    std::span<const double> x;
    std::span<const double> y;
  };

  static MomentSource exact(TableSet tables);
  // Each slot is centered on its own mean (per replicate) before use.
  static MomentSource from_samples(const std::vector<Slot>& slots, int degree, int groups = 20);

  bool is_exact() const { return replicates_.empty(); }
  int degree() const;
  std::size_t sample_count() const { return n_; }
  const TableSet& full() const { return full_; }

  MomentEstimate evaluate(const TableStatistic& stat) const;

 private:
  TableSet full_;
  std::vector<TableSet> replicates_;
  std::size_t n_ = 0;
};

}  // namespace momentid
