#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace momentid {

// Hard cap on any moment order handled by the library.
inline constexpr int kHardMaxOrder = 20;
// Default order bound for exact (oracle) moment evaluation.
inline constexpr int kOracleMaxOrder = 12;

enum class NoiseFamily {
  Exponential,  // params = {rate}
  Gamma,        // params = {shape, scale}
  Gumbel,       // params = {scale}
  Logistic,     // params = {scale}
  Uniform,      // params = {halfwidth}
  PointMass,    // params = {}
  Gaussian,     // params = {sigma}; negative-control fixture only
};

std::string_view family_name(NoiseFamily family);
NoiseFamily parse_family(std::string_view name);

// A zero-mean noise variable: the named family shifted to mean zero, then
// multiplied by `scale`.
struct NoiseSpec {
  NoiseFamily family = NoiseFamily::PointMass;
  std::vector<double> params;
  double scale = 1.0;

  static NoiseSpec exponential(double rate);
  static NoiseSpec gamma(double shape, double scale);
  static NoiseSpec gumbel(double scale);
  static NoiseSpec logistic(double scale);
  static NoiseSpec uniform(double halfwidth);
  static NoiseSpec point_mass();
  static NoiseSpec gaussian(double sigma);

  // Validates the parameter count and ranges for `family`.
  static NoiseSpec make(NoiseFamily family, std::vector<double> params,
                        double scale = 1.0);

  NoiseSpec scaled(double factor) const;

  bool operator==(const NoiseSpec&) const = default;
};

std::string describe(const NoiseSpec& spec);

/// Exact centered raw moment E[eps^order].
double raw_moment(const NoiseSpec& spec, int order,
                  int max_order = kOracleMaxOrder);

/// Centered raw moments E[eps^0..eps^max_order].
std::vector<double> raw_moments(const NoiseSpec& spec, int max_order);

/// Smallest n in [3, max_order] with E[eps^n] != (n-1) E[eps^(n-2)] E[eps^2],
/// i.e. the first order at which the noise stops looking Gaussian.
std::optional<int> nongaussian_order(const NoiseSpec& spec, int max_order = 8);

// Mixes a master seed with a path of stream indices (environment, replicate,
// variable, ...) into an independent 64-bit seed.
std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> path);

class StreamRng {
 public:
  explicit StreamRng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }
  double normal();

 private:
  std::mt19937_64 engine_;
};

void sample_into(const NoiseSpec& spec, std::span<double> out, StreamRng& rng);

/// n i.i.d. centered draws, bit-deterministic in (spec, n, seed).
std::vector<double> sample(const NoiseSpec& spec, std::size_t n,
                           std::uint64_t seed);

}  // namespace momentid
