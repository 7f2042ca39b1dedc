#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lipirm {

enum class LabelKind { Regression, Classification };

/// Training samples of one domain. Features are stored row-major.
struct DomainDataset {
  int domain_id = 0;
  std::size_t dim = 0;
  LabelKind kind = LabelKind::Regression;
  std::vector<double> features;
  std::vector<double> labels;
  /// Optional per-sample group ids (provided by the source, e.g. a CSV
  /// `group` column or the latent digit of the two-bit benchmark).
  std::vector<int> groups;

  std::size_t size() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * dim, dim};
  }
  void add(std::span<const double> x, double y, int group = -1);
  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const;
};

using DatasetCollection = std::vector<DomainDataset>;

/// Training, validation and test domains of one benchmark.
struct DatasetBundle {
  std::string name;
  LabelKind kind = LabelKind::Regression;
  DatasetCollection train;
  DatasetCollection validation;
  DatasetCollection test;
};

/// Partition of every sample into K groups, each group inside one domain.
struct Grouping {
  int k_count = 0;
  /// assignment[p][i] is the group of sample i of the p-th dataset.
  std::vector<std::vector<int>> assignment;
  /// group_domain[k] is the domain_id owning group k.
  std::vector<int> group_domain;

  int group_of(std::size_t dataset_pos, std::size_t sample) const {
    return assignment.at(dataset_pos).at(sample);
  }
};

/// Per-(domain, group) quality statistics, stored as dense E x K tables in
/// the order of `domain_ids`.
struct GroupStatistics {
  std::vector<int> domain_ids;
  std::vector<std::size_t> domain_sizes;
  int k_count = 0;
  std::vector<double> r_hat;
  std::vector<double> sigma2;
  std::vector<std::size_t> counts;
  std::vector<int> indicator;

  std::size_t domain_count() const { return domain_ids.size(); }
  std::size_t index(std::size_t e, int k) const {
    return e * static_cast<std::size_t>(k_count) + static_cast<std::size_t>(k);
  }
  double r_hat_at(std::size_t e, int k) const { return r_hat[index(e, k)]; }
  double sigma2_at(std::size_t e, int k) const { return sigma2[index(e, k)]; }
  std::size_t count_at(std::size_t e, int k) const { return counts[index(e, k)]; }
  bool present(std::size_t e, int k) const { return indicator[index(e, k)] != 0; }
  std::size_t position_of_domain(int domain_id) const;

  /// Builds statistics directly from tables (used by analytic settings).
  static GroupStatistics from_tables(std::vector<int> domain_ids,
                                     std::vector<std::size_t> domain_sizes,
                                     int k_count, std::vector<double> r_hat,
                                     std::vector<double> sigma2);
};

/// Equal-width binning of one feature inside each domain. When `range` is
/// given the bin edges are fixed to it, otherwise they span the domain's
/// observed min..max. Empty bins are dropped and indices compacted.
Grouping group_by_bins(const DatasetCollection &data, std::size_t feature_index,
                       int k_per_domain,
                       std::optional<std::pair<double, double>> range = {});

/// One group per non-empty (domain, class label) pair.
Grouping group_by_label(const DatasetCollection &data);

/// One group per non-empty (domain, provided group id) pair.
Grouping group_by_provided(const DatasetCollection &data);

/// r_hat = N_{e,k}/N_e, counts and indicator. sigma2 is left at zero.
GroupStatistics estimate_density(const DatasetCollection &data,
                                 const Grouping &grouping);

/// Maps a feature vector to a prediction in label space (a probability of
/// the positive class for classification data).
using Predictor = std::function<double(std::span<const double>)>;

/// Fills sigma2 with the mean squared residual y - f(x) over each group.
void estimate_noise_variance(const DatasetCollection &data,
                             const Grouping &grouping,
                             const Predictor &predictor,
                             GroupStatistics &stats);

// CSV ingestion -------------------------------------------------------------
//
// Header row; one column per feature, a `y` column, a `domain` column and an
// optional `group` column. Rows are routed to datasets by `domain`, in order
// of first appearance.

DatasetCollection read_csv(std::istream &in, LabelKind kind);
DatasetCollection read_csv_file(const std::string &path, LabelKind kind);
void write_csv(std::ostream &out, const DatasetCollection &data);
void write_csv_file(const std::string &path, const DatasetCollection &data);

} // namespace lipirm
