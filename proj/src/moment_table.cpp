#include "momentid/moment_table.hpp"

#include <cmath>
#include <string>

#include "momentid/errors.hpp"
#include "momentid/noise.hpp"

namespace momentid {

namespace {

double binomial(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

void check_degree(int degree) {
  if (degree < 0 || degree > kHardMaxOrder) {
    throw Error(ErrorCode::OrderOverflow,
                "table degree " + std::to_string(degree) + " outside [0, " +
                    std::to_string(kHardMaxOrder) + "]");
  }
}

}  // namespace

MomentTable::MomentTable(int degree) : degree_(degree) {
  check_degree(degree);
  m_.assign(static_cast<std::size_t>((degree + 1) * (degree + 1)), 0.0);
  m_[0] = 1.0;
}

std::size_t MomentTable::index(int p, int q) const {
  if (p < 0 || q < 0 || p + q > degree_) {
    throw Error(ErrorCode::OrderOverflow, "moment (" + std::to_string(p) + "," +
                                              std::to_string(q) + ") exceeds table degree " +
                                              std::to_string(degree_));
  }
  return static_cast<std::size_t>(p * (degree_ + 1) + q);
}

MomentTable MomentTable::from_samples(std::span<const double> x, std::span<const double> y,
                                      int degree) {
  MomentAccumulator acc(degree, 1);
  acc.add(x, y);
  return acc.full();
}

MomentTable MomentTable::transformed(double a, double b, double c, double d) const {
  const int D = degree_;
  // powers of the coefficients
  std::vector<double> pa(D + 1), pb(D + 1), pc(D + 1), pd(D + 1);
  pa[0] = pb[0] = pc[0] = pd[0] = 1.0;
  for (int k = 1; k <= D; ++k) {
    pa[k] = pa[k - 1] * a;
    pb[k] = pb[k - 1] * b;
    pc[k] = pc[k - 1] * c;
    pd[k] = pd[k - 1] * d;
  }
  MomentTable out(D);
  for (int i = 0; i <= D; ++i) {
    for (int j = 0; i + j <= D; ++j) {
      double s = 0.0;
      for (int r = 0; r <= i; ++r) {
        const double ci = binomial(i, r) * pa[r] * pb[i - r];
        if (ci == 0.0) continue;
        for (int u = 0; u <= j; ++u) {
          const double cj = binomial(j, u) * pc[u] * pd[j - u];
          if (cj == 0.0) continue;
          s += ci * cj * (*this)(r + u, i + j - r - u);
        }
      }
      out.at(i, j) = s;
    }
  }
  return out;
}

MomentTable MomentTable::centered() const {
  if (degree_ == 0) return *this;
  const double mx = (*this)(1, 0);
  const double my = (*this)(0, 1);
  const int D = degree_;
  MomentTable out(D);
  for (int p = 0; p <= D; ++p) {
    for (int q = 0; p + q <= D; ++q) {
      double s = 0.0;
      for (int i = 0; i <= p; ++i) {
        const double ci = binomial(p, i) * std::pow(-mx, p - i);
        for (int j = 0; j <= q; ++j) {
          s += ci * binomial(q, j) * std::pow(-my, q - j) * (*this)(i, j);
        }
      }
      out.at(p, q) = s;
    }
  }
  out.at(1, 0) = 0.0;
  out.at(0, 1) = 0.0;
  return out;
}

MomentTable MomentTable::swapped() const {
  MomentTable out(degree_);
  for (int p = 0; p <= degree_; ++p)
    for (int q = 0; p + q <= degree_; ++q) out.at(q, p) = (*this)(p, q);
  return out;
}

MomentAccumulator::MomentAccumulator(int degree, int blocks)
    : degree_(degree), blocks_(blocks) {
  check_degree(degree);
  if (blocks < 1) throw Error(ErrorCode::InvalidArgument, "need at least one block");
  const auto width = static_cast<std::size_t>((degree + 1) * (degree + 1));
  block_sums_.assign(static_cast<std::size_t>(blocks), std::vector<double>(width, 0.0));
  block_counts_.assign(static_cast<std::size_t>(blocks), 0);
}

void MomentAccumulator::add(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::InvalidArgument, "paired samples must have equal length");
  }
  const std::size_t n = x.size();
  const int D = degree_;
  std::vector<double> px(D + 1), py(D + 1);
  for (int g = 0; g < blocks_; ++g) {
    const std::size_t lo = n * static_cast<std::size_t>(g) / static_cast<std::size_t>(blocks_);
    const std::size_t hi =
        n * static_cast<std::size_t>(g + 1) / static_cast<std::size_t>(blocks_);
    auto& sums = block_sums_[static_cast<std::size_t>(g)];
    for (std::size_t i = lo; i < hi; ++i) {
      px[0] = py[0] = 1.0;
      for (int k = 1; k <= D; ++k) {
        px[k] = px[k - 1] * x[i];
        py[k] = py[k - 1] * y[i];
      }
      for (int p = 0; p <= D; ++p) {
        double* row = sums.data() + p * (D + 1);
        const double xp = px[p];
        for (int q = 0; q <= D - p; ++q) row[q] += xp * py[q];
      }
    }
    block_counts_[static_cast<std::size_t>(g)] += hi - lo;
  }
  total_count_ += n;
}

MomentTable MomentAccumulator::normalized(const std::vector<double>& sums, double count) const {
  MomentTable out(degree_);
  for (int p = 0; p <= degree_; ++p)
    for (int q = 0; p + q <= degree_; ++q)
      out.at(p, q) = sums[static_cast<std::size_t>(p * (degree_ + 1) + q)] / count;
  return out;
}

MomentTable MomentAccumulator::full() const {
  std::vector<double> total(block_sums_.front().size(), 0.0);
  for (const auto& b : block_sums_)
    for (std::size_t k = 0; k < total.size(); ++k) total[k] += b[k];
  return normalized(total, static_cast<double>(total_count_));
}

MomentTable MomentAccumulator::without_block(int block) const {
  std::vector<double> total(block_sums_.front().size(), 0.0);
  for (int g = 0; g < blocks_; ++g) {
    if (g == block) continue;
    const auto& b = block_sums_[static_cast<std::size_t>(g)];
    for (std::size_t k = 0; k < total.size(); ++k) total[k] += b[k];
  }
  const auto count = total_count_ - block_counts_[static_cast<std::size_t>(block)];
  return normalized(total, static_cast<double>(count));
}

MomentTable joint_cumulants(const MomentTable& m) {
  const int D = m.degree();
  MomentTable k(D);
  k.at(0, 0) = 0.0;
  for (int total = 1; total <= D; ++total) {
    for (int i = 0; i <= total; ++i) {
      const int j = total - i;
      double s = m(i, j);
      if (i >= 1) {
        // differentiate the moment generating function in the X direction
        for (int a = 0; a <= i - 1; ++a) {
          for (int b = 0; b <= j; ++b) {
            if (a == 0 && b == 0) continue;
            s -= binomial(i - 1, a) * binomial(j, b) * k(i - a, j - b) * m(a, b);
          }
        }
      } else {
        for (int b = 1; b <= j - 1; ++b) s -= binomial(j - 1, b) * k(0, j - b) * m(0, b);
      }
      k.at(i, j) = s;
    }
  }
  return k;
}

double joint_cumulant(const MomentTable& table, int px, int py) {
  if (px < 0 || py < 0 || px + py < 1 || px + py > table.degree()) {
    throw Error(ErrorCode::OrderOverflow, "cumulant order " + std::to_string(px + py) +
                                              " unsupported for table degree " +
                                              std::to_string(table.degree()));
  }
  return joint_cumulants(table)(px, py);
}

}  // namespace momentid
