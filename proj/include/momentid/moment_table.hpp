#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace momentid {

// Raw mixed moments E[X^p Y^q] of a pair of variables for all p + q <= degree.
// Every estimator in the library is a function of one or two of these tables,
// whether they come from data or from the exact population oracle.
class MomentTable {
 public:
  MomentTable() = default;
  // All moments zero except E[X^0 Y^0] = 1.
  explicit MomentTable(int degree);

  static MomentTable from_samples(std::span<const double> x, std::span<const double> y,
                                  int degree);

  int degree() const { return degree_; }
  double operator()(int p, int q) const { return m_[index(p, q)]; }
  double& at(int p, int q) { return m_[index(p, q)]; }

  // Table of (U, V) = (a X + b Y, c X + d Y).
  MomentTable transformed(double a, double b, double c, double d) const;
  // Table of (X - E[X], Y - E[Y]).
  MomentTable centered() const;
  // Table of (Y, X).
  MomentTable swapped() const;

  bool operator==(const MomentTable&) const = default;

 private:
  std::size_t index(int p, int q) const;

  int degree_ = 0;
  std::vector<double> m_;
};

// Running block sums of the monomials x^p y^q; leave-one-block-out tables are
// formed from these without another pass over the data.
class MomentAccumulator {
 public:
  MomentAccumulator(int degree, int blocks);

  void add(std::span<const double> x, std::span<const double> y);

  int blocks() const { return blocks_; }
  std::size_t count() const { return total_count_; }
  MomentTable full() const;
  MomentTable without_block(int block) const;

 private:
  MomentTable normalized(const std::vector<double>& sums, double count) const;

  int degree_;
  int blocks_;
  std::size_t total_count_ = 0;
  std::vector<std::vector<double>> block_sums_;
  std::vector<std::size_t> block_counts_;
};

// Joint cumulant kappa(X, ..., X, Y, ..., Y) with px copies of X and py copies
// of Y, via the bivariate moment-to-cumulant recursion.
double joint_cumulant(const MomentTable& table, int px, int py);

// All joint cumulants kappa_{p,q} for p + q <= degree, laid out like the table.
MomentTable joint_cumulants(const MomentTable& table);

}  // namespace momentid
