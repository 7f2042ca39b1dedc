#include "lipirm/domain_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "lipirm/numerics.hpp"

namespace lipirm {

void DomainDataset::add(std::span<const double> x, double y, int group) {
  if (labels.empty() && features.empty() && dim == 0)
    dim = x.size();
  if (x.size() != dim)
    throw std::invalid_argument("feature dimension mismatch");
  features.insert(features.end(), x.begin(), x.end());
  labels.push_back(y);
  if (group >= 0 || !groups.empty()) {
    if (groups.size() + 1 != labels.size())
      throw std::invalid_argument("group ids must be given for all samples");
    groups.push_back(group);
  }
}

void DomainDataset::validate() const {
  if (labels.empty())
    throw std::invalid_argument("empty domain");
  if (features.size() != labels.size() * dim)
    throw std::invalid_argument("feature table does not match sample count");
  if (!groups.empty() && groups.size() != labels.size())
    throw std::invalid_argument("group column does not match sample count");
}

std::size_t GroupStatistics::position_of_domain(int domain_id) const {
  auto it = std::find(domain_ids.begin(), domain_ids.end(), domain_id);
  if (it == domain_ids.end())
    throw std::out_of_range("unknown domain " + std::to_string(domain_id));
  return static_cast<std::size_t>(it - domain_ids.begin());
}

GroupStatistics GroupStatistics::from_tables(std::vector<int> domain_ids,
                                             std::vector<std::size_t> sizes,
                                             int k_count,
                                             std::vector<double> r_hat,
                                             std::vector<double> sigma2) {
  const std::size_t cells = domain_ids.size() * static_cast<std::size_t>(k_count);
  if (sizes.size() != domain_ids.size() || r_hat.size() != cells ||
      sigma2.size() != cells)
    throw std::invalid_argument("statistics table shape mismatch");
  GroupStatistics s;
  s.domain_ids = std::move(domain_ids);
  s.domain_sizes = std::move(sizes);
  s.k_count = k_count;
  s.r_hat = std::move(r_hat);
  s.sigma2 = std::move(sigma2);
  s.counts.assign(cells, 0);
  s.indicator.assign(cells, 0);
  for (std::size_t e = 0; e < s.domain_ids.size(); ++e)
    for (int k = 0; k < k_count; ++k) {
      const auto i = s.index(e, k);
      s.counts[i] = static_cast<std::size_t>(
          std::llround(s.r_hat[i] * static_cast<double>(s.domain_sizes[e])));
      s.indicator[i] = s.r_hat[i] > 0.0 ? 1 : 0;
    }
  return s;
}

namespace {

void check_collection(const DatasetCollection &data) {
  if (data.empty())
    throw std::invalid_argument("empty domain");
  for (const auto &d : data)
    d.validate();
}

// Compacts per-domain local keys into global group indices, in domain order
// and increasing key order within each domain.
Grouping compact(const DatasetCollection &data,
                 const std::vector<std::vector<long>> &keys) {
  Grouping g;
  g.assignment.resize(data.size());
  for (std::size_t p = 0; p < data.size(); ++p) {
    std::map<long, int> local;
    for (long key : keys[p])
      local.emplace(key, 0);
    for (auto &[key, idx] : local) {
      idx = g.k_count++;
      g.group_domain.push_back(data[p].domain_id);
    }
    g.assignment[p].reserve(keys[p].size());
    for (long key : keys[p])
      g.assignment[p].push_back(local.at(key));
  }
  return g;
}

bool is_integral(double v) {
  return std::isfinite(v) && std::floor(v) == v;
}

} // namespace

Grouping group_by_bins(const DatasetCollection &data, std::size_t feature_index,
                       int k_per_domain,
                       std::optional<std::pair<double, double>> range) {
  check_collection(data);
  if (k_per_domain < 1)
    throw std::invalid_argument("k_per_domain must be at least 1");
  std::vector<std::vector<long>> keys(data.size());
  for (std::size_t p = 0; p < data.size(); ++p) {
    const auto &d = data[p];
    if (feature_index >= d.dim)
      throw std::invalid_argument("feature_index out of range");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    if (range) {
      lo = range->first;
      hi = range->second;
    } else {
      for (std::size_t i = 0; i < d.size(); ++i) {
        lo = std::min(lo, d.row(i)[feature_index]);
        hi = std::max(hi, d.row(i)[feature_index]);
      }
    }
    const double width = hi - lo;
    keys[p].reserve(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
      long bin = 0;
      if (width > 0.0) {
        const double u = (d.row(i)[feature_index] - lo) / width;
        bin = static_cast<long>(std::floor(u * k_per_domain));
        bin = std::clamp<long>(bin, 0, k_per_domain - 1);
      }
      keys[p].push_back(bin);
    }
  }
  return compact(data, keys);
}

Grouping group_by_label(const DatasetCollection &data) {
  check_collection(data);
  std::vector<std::vector<long>> keys(data.size());
  for (std::size_t p = 0; p < data.size(); ++p) {
    const auto &d = data[p];
    if (d.kind != LabelKind::Classification)
      throw std::invalid_argument("label grouping requires class indices");
    for (double y : d.labels) {
      if (!is_integral(y) || y < 0)
        throw std::invalid_argument("label grouping requires class indices");
      keys[p].push_back(static_cast<long>(y));
    }
  }
  return compact(data, keys);
}

Grouping group_by_provided(const DatasetCollection &data) {
  check_collection(data);
  std::vector<std::vector<long>> keys(data.size());
  for (std::size_t p = 0; p < data.size(); ++p) {
    const auto &d = data[p];
    if (d.groups.size() != d.size())
      throw std::invalid_argument("dataset has no provided group column");
    keys[p].assign(d.groups.begin(), d.groups.end());
  }
  return compact(data, keys);
}

GroupStatistics estimate_density(const DatasetCollection &data,
                                 const Grouping &grouping) {
  check_collection(data);
  if (grouping.assignment.size() != data.size())
    throw std::invalid_argument("grouping does not cover the data");
  GroupStatistics s;
  s.k_count = grouping.k_count;
  const std::size_t cells = data.size() * static_cast<std::size_t>(s.k_count);
  s.r_hat.assign(cells, 0.0);
  s.sigma2.assign(cells, 0.0);
  s.counts.assign(cells, 0);
  s.indicator.assign(cells, 0);
  for (std::size_t p = 0; p < data.size(); ++p) {
    const auto &d = data[p];
    if (grouping.assignment[p].size() != d.size())
      throw std::invalid_argument("grouping does not cover the data");
    s.domain_ids.push_back(d.domain_id);
    s.domain_sizes.push_back(d.size());
    for (int k : grouping.assignment[p]) {
      if (k < 0 || k >= s.k_count)
        throw std::invalid_argument("group index out of range");
      ++s.counts[s.index(p, k)];
    }
    for (int k = 0; k < s.k_count; ++k) {
      const auto i = s.index(p, k);
      s.r_hat[i] = static_cast<double>(s.counts[i]) / static_cast<double>(d.size());
      s.indicator[i] = s.counts[i] > 0 ? 1 : 0;
    }
  }
  return s;
}

void estimate_noise_variance(const DatasetCollection &data,
                             const Grouping &grouping,
                             const Predictor &predictor,
                             GroupStatistics &stats) {
  if (stats.domain_count() != data.size() || stats.k_count != grouping.k_count)
    throw std::invalid_argument("statistics do not match the grouping");
  std::vector<std::vector<double>> sq(stats.r_hat.size());
  for (std::size_t p = 0; p < data.size(); ++p) {
    const auto &d = data[p];
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double r = d.labels[i] - predictor(d.row(i));
      sq[stats.index(p, grouping.group_of(p, i))].push_back(r * r);
    }
  }
  for (std::size_t c = 0; c < sq.size(); ++c)
    stats.sigma2[c] = sq[c].empty() ? 0.0
                                    : pairwise_sum(sq[c]) /
                                          static_cast<double>(sq[c].size());
}

// CSV -------------------------------------------------------------------------

namespace {

std::vector<std::string> split_line(const std::string &line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ','))
    out.push_back(cell);
  if (!line.empty() && line.back() == ',')
    out.emplace_back();
  for (auto &c : out) {
    c.erase(0, c.find_first_not_of(" \t\r"));
    c.erase(c.find_last_not_of(" \t\r") + 1);
  }
  return out;
}

double parse_number(const std::string &cell, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size())
      throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception &) {
    throw std::invalid_argument("csv line " + std::to_string(line_no) +
                                ": not a number: '" + cell + "'");
  }
}

} // namespace

DatasetCollection read_csv(std::istream &in, LabelKind kind) {
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("csv: missing header");
  const auto header = split_line(line);
  long y_col = -1, domain_col = -1, group_col = -1;
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "y")
      y_col = static_cast<long>(c);
    else if (header[c] == "domain")
      domain_col = static_cast<long>(c);
    else if (header[c] == "group")
      group_col = static_cast<long>(c);
    else
      feature_cols.push_back(c);
  }
  if (y_col < 0 || domain_col < 0)
    throw std::invalid_argument("csv: header needs `y` and `domain` columns");

  DatasetCollection out;
  std::map<int, std::size_t> position;
  std::size_t line_no = 1;
  std::vector<double> x(feature_cols.size());
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size())
      throw std::invalid_argument("csv line " + std::to_string(line_no) +
                                  ": expected " + std::to_string(header.size()) +
                                  " cells");
    const int domain = static_cast<int>(parse_number(cells[domain_col], line_no));
    auto [it, inserted] = position.emplace(domain, out.size());
    if (inserted) {
      DomainDataset d;
      d.domain_id = domain;
      d.dim = feature_cols.size();
      d.kind = kind;
      out.push_back(std::move(d));
    }
    for (std::size_t j = 0; j < feature_cols.size(); ++j)
      x[j] = parse_number(cells[feature_cols[j]], line_no);
    const int group =
        group_col >= 0 ? static_cast<int>(parse_number(cells[group_col], line_no))
                       : -1;
    out[it->second].add(x, parse_number(cells[y_col], line_no), group);
  }
  for (const auto &d : out)
    d.validate();
  return out;
}

DatasetCollection read_csv_file(const std::string &path, LabelKind kind) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open " + path);
  return read_csv(in, kind);
}

void write_csv(std::ostream &out, const DatasetCollection &data) {
  if (data.empty())
    return;
  const std::size_t dim = data.front().dim;
  const bool has_group = std::all_of(data.begin(), data.end(), [](const auto &d) {
    return !d.groups.empty();
  });
  for (std::size_t j = 0; j < dim; ++j)
    out << "x" << j << ",";
  out << "y,domain";
  if (has_group)
    out << ",group";
  out << "\n";
  out << std::setprecision(17);
  for (const auto &d : data) {
    if (d.dim != dim)
      throw std::invalid_argument("csv export needs a common feature dimension");
    for (std::size_t i = 0; i < d.size(); ++i) {
      for (double v : d.row(i))
        out << v << ",";
      out << d.labels[i] << "," << d.domain_id;
      if (has_group)
        out << "," << d.groups[i];
      out << "\n";
    }
  }
}

void write_csv_file(const std::string &path, const DatasetCollection &data) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write " + path);
  write_csv(out, data);
}

} // namespace lipirm
