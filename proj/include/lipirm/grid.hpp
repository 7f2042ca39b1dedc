#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace lipirm {

/// Equally spaced nodes on [0,1], endpoints included.
struct Grid1D {
  std::size_t n = 0;
  double h = 0.0;
  std::vector<double> points;

  Grid1D() = default;
  explicit Grid1D(std::size_t n_grid);

  /// Trapezoid node weights (1/2 at the ends, 1 inside), without the h factor.
  double mass(std::size_t i) const { return (i == 0 || i + 1 == n) ? 0.5 : 1.0; }
  /// Index j of the cell [x_j, x_{j+1}] containing x, and the local coordinate.
  std::size_t cell_of(double x, double &theta) const;
};

/// Piecewise-linear function on a grid.
struct GridFunction {
  Grid1D grid;
  std::vector<double> values;

  GridFunction() = default;
  GridFunction(Grid1D g, std::vector<double> v);

  double operator()(double x) const;
  /// Central differences inside, one-sided at the two ends.
  std::vector<double> derivative() const;
  void write_csv(std::ostream &out, const std::string &value_name = "f") const;
};

/// Writes `x,<name>` rows for a node table.
void write_node_csv(std::ostream &out, const Grid1D &grid,
                    std::span<const double> values, const std::string &name);

} // namespace lipirm
