#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace lipirm {

/// Thrown when a numerical routine cannot produce a finite answer.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Thomas algorithm for a tridiagonal system. `lower[i]` couples row i to i-1
/// (lower[0] unused), `upper[i]` couples row i to i+1 (upper[n-1] unused).
/// Throws NumericalError on a zero pivot.
std::vector<double> solve_tridiagonal(std::span<const double> lower,
                                      std::span<const double> diag,
                                      std::span<const double> upper,
                                      std::span<const double> rhs);

/// y = A x for the same tridiagonal storage.
std::vector<double> tridiagonal_apply(std::span<const double> lower,
                                      std::span<const double> diag,
                                      std::span<const double> upper,
                                      std::span<const double> x);

/// Pairwise (cascade) summation. The result does not depend on how the caller
/// scheduled the production of the terms, only on their order in memory.
double pairwise_sum(std::span<const double> values);

/// Composite trapezoid rule on an equally spaced grid.
double trapezoid(std::span<const double> values, double h);

/// Running trapezoid integral, out[0] = 0.
std::vector<double> cumulative_trapezoid(std::span<const double> values,
                                         double h);

/// Small dense solve (Gaussian elimination, partial pivoting), row-major A.
std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b);

// Seeds ---------------------------------------------------------------------
//
// A master seed is expanded into independent streams by hashing the master
// with a textual stage tag and integer indices:
//   derive_seed(master, "phase1", domain) = splitmix64(master ^ fnv1a(tag) ^ mix(index))
// so toggling one stage never shifts the draws of another.

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                          std::uint64_t index = 0, std::uint64_t index2 = 0);

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t master, std::string_view tag,
                    std::uint64_t index = 0, std::uint64_t index2 = 0) {
  return Rng(derive_seed(master, tag, index, index2));
}

inline double uniform01(Rng &rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double standard_normal(Rng &rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

inline bool bernoulli(Rng &rng, double p) { return uniform01(rng) < p; }

} // namespace lipirm

namespace lipirm {

/// Runs body(i) for i in [0, count) on up to `jobs` threads. Results must be
/// written to per-index slots; the first exception (lowest index) is rethrown.
void parallel_for(std::size_t count, int jobs,
                  const std::function<void(std::size_t)> &body);

} // namespace lipirm
