#include "lipirm/numerics.hpp"

#include <cmath>
#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>

namespace lipirm {

std::vector<double> solve_tridiagonal(std::span<const double> lower,
                                      std::span<const double> diag,
                                      std::span<const double> upper,
                                      std::span<const double> rhs) {
  const std::size_t n = diag.size();
  if (n == 0 || lower.size() != n || upper.size() != n || rhs.size() != n)
    throw std::invalid_argument("solve_tridiagonal: size mismatch");

  std::vector<double> c(n, 0.0), d(n, 0.0), x(n, 0.0);
  double pivot = diag[0];
  if (pivot == 0.0 || !std::isfinite(pivot))
    throw NumericalError("singular tridiagonal system");
  c[0] = upper[0] / pivot;
  d[0] = rhs[0] / pivot;
  for (std::size_t i = 1; i < n; ++i) {
    pivot = diag[i] - lower[i] * c[i - 1];
    if (pivot == 0.0 || !std::isfinite(pivot))
      throw NumericalError("singular tridiagonal system");
    c[i] = (i + 1 < n) ? upper[i] / pivot : 0.0;
    d[i] = (rhs[i] - lower[i] * d[i - 1]) / pivot;
  }
  x[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;)
    x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

std::vector<double> tridiagonal_apply(std::span<const double> lower,
                                      std::span<const double> diag,
                                      std::span<const double> upper,
                                      std::span<const double> x) {
  const std::size_t n = diag.size();
  std::vector<double> y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double v = diag[i] * x[i];
    if (i > 0)
      v += lower[i] * x[i - 1];
    if (i + 1 < n)
      v += upper[i] * x[i + 1];
    y[i] = v;
  }
  return y;
}

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t block = 16;
  if (values.size() <= block) {
    double s = 0.0;
    for (double v : values)
      s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double trapezoid(std::span<const double> values, double h) {
  if (values.size() < 2)
    return 0.0;
  std::vector<double> w(values.begin(), values.end());
  w.front() *= 0.5;
  w.back() *= 0.5;
  return h * pairwise_sum(w);
}

std::vector<double> cumulative_trapezoid(std::span<const double> values,
                                         double h) {
  std::vector<double> out(values.size(), 0.0);
  for (std::size_t i = 1; i < values.size(); ++i)
    out[i] = out[i - 1] + 0.5 * h * (values[i - 1] + values[i]);
  return out;
}

std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = b.size();
  if (a.size() != n * n)
    throw std::invalid_argument("solve_dense: size mismatch");
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col]))
        piv = r;
    if (a[piv * n + col] == 0.0)
      throw NumericalError("singular dense system");
    if (piv != col) {
      for (std::size_t k = 0; k < n; ++k)
        std::swap(a[col * n + k], a[piv * n + k]);
      std::swap(b[col], b[piv]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      for (std::size_t k = col; k < n; ++k)
        a[r * n + k] -= f * a[col * n + k];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k)
      s -= a[i * n + k] * x[k];
    x[i] = s / a[i * n + i];
  }
  return x;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                          std::uint64_t index, std::uint64_t index2) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : tag) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::uint64_t s = splitmix64(master);
  s = splitmix64(s ^ h);
  s = splitmix64(s ^ splitmix64(index + 0x51ed270b27a3f1c5ULL));
  s = splitmix64(s ^ splitmix64(index2 + 0x2545f4914f6cdd1dULL));
  return s;
}

} // namespace lipirm

namespace lipirm {

void parallel_for(std::size_t count, int jobs,
                  const std::function<void(std::size_t)> &body) {
  std::vector<std::exception_ptr> errors(count);
  auto run = [&](std::size_t i) {
    try {
      body(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i)
      run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++)
          run(i);
      });
    for (auto &t : pool)
      t.join();
  }
  for (auto &e : errors)
    if (e)
      std::rethrow_exception(e);
}

} // namespace lipirm
