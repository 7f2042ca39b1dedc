#include "lipirm/grid.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace lipirm {

Grid1D::Grid1D(std::size_t n_grid) : n(n_grid) {
  if (n_grid < 3)
    throw std::invalid_argument("grid needs at least 3 nodes");
  h = 1.0 / static_cast<double>(n - 1);
  points.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    points[i] = static_cast<double>(i) * h;
  points.back() = 1.0;
}

std::size_t Grid1D::cell_of(double x, double &theta) const {
  if (!(x >= 0.0 && x <= 1.0))
    throw std::domain_error("point outside [0,1]");
  const double u = x / h;
  auto j = static_cast<std::size_t>(std::floor(u));
  j = std::min(j, n - 2);
  theta = u - static_cast<double>(j);
  return j;
}

GridFunction::GridFunction(Grid1D g, std::vector<double> v)
    : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid.n)
    throw std::invalid_argument("grid function size mismatch");
}

double GridFunction::operator()(double x) const {
  double t = 0.0;
  const std::size_t j = grid.cell_of(x, t);
  return (1.0 - t) * values[j] + t * values[j + 1];
}

std::vector<double> GridFunction::derivative() const {
  const std::size_t n = grid.n;
  std::vector<double> d(n);
  d[0] = (values[1] - values[0]) / grid.h;
  d[n - 1] = (values[n - 1] - values[n - 2]) / grid.h;
  for (std::size_t i = 1; i + 1 < n; ++i)
    d[i] = (values[i + 1] - values[i - 1]) / (2.0 * grid.h);
  return d;
}

void GridFunction::write_csv(std::ostream &out, const std::string &value_name) const {
  write_node_csv(out, grid, values, value_name);
}

void write_node_csv(std::ostream &out, const Grid1D &grid,
                    std::span<const double> values, const std::string &name) {
  if (values.size() != grid.n)
    throw std::invalid_argument("node table size mismatch");
  out << "x," << name << '\n';
  out.precision(17);
  for (std::size_t i = 0; i < grid.n; ++i)
    out << grid.points[i] << ',' << values[i] << '\n';
}

} // namespace lipirm
