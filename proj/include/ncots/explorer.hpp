#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <vector>

#include <json.hpp>

#include "ncots/backend.hpp"
#include "ncots/search.hpp"

namespace ncots {

struct PathEntry {
  std::size_t length = 0;
  bool correct = false;

  friend bool operator==(const PathEntry&, const PathEntry&) = default;
};

// N queries x K independent paths.
struct PathMatrix {
  std::vector<std::string> query_ids;
  std::vector<std::vector<PathEntry>> paths;
  std::vector<std::vector<ReasoningTrace>> traces;  // optional, same shape when present

  std::size_t rows() const { return paths.size(); }
  std::size_t k() const { return paths.empty() ? 0 : paths.front().size(); }
  void validate() const;
};

// Uniform operator forced at every decision point.
ReasoningTrace random_rollout(const Query& query, const Backend& backend,
                              const OperatorSet& operators, const Budgets& budgets,
                              std::uint64_t stream_seed, std::uint64_t policy_seed);

// Rollout (i, j) runs on stream hash(seed, i, j).
PathMatrix characterize(const std::vector<Query>& queries, const Backend& backend, std::size_t k,
                        const OperatorSet& operators, const Budgets& budgets, std::uint64_t seed,
                        std::size_t threads = 1, bool keep_traces = false);

// A combination of one path per query, in sum form so equality is exact.
struct PointKey {
  std::size_t length_sum = 0;
  std::size_t correct = 0;
  auto operator<=>(const PointKey&) const = default;
};

struct WeightedPoint {
  double mean_length = 0.0;
  double mean_accuracy = 0.0;
  double probability = 0.0;
};

struct DensityBins {
  double length_width = 64.0;
  std::size_t accuracy_bins = 0;  // 0 = one bin per 1/N
};

struct Baseline {
  double length = 0.0;
  double accuracy = 0.0;
};

struct DensityGrid {
  std::size_t n_queries = 0;
  double length_width = 64.0;
  double accuracy_width = 1.0;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> counts;  // (length bin, acc bin)
  std::size_t n_samples = 0;
  std::map<PointKey, std::size_t> points;  // filled when tracking points
  std::optional<Baseline> baseline;
  std::size_t superior_count = 0;

  double superior_fraction() const;
  std::vector<WeightedPoint> point_distribution() const;
  std::size_t total_count() const;

  void write_csv(std::ostream& out) const;
  nlohmann::json sidecar_json() const;
};

DensityGrid monte_carlo_aggregate(const PathMatrix& pm, std::size_t iterations,
                                  const DensityBins& bins, std::uint64_t seed,
                                  std::optional<Baseline> baseline = std::nullopt,
                                  bool track_points = false);

// All K^N combinations with equal weight. Requires K^N <= 1e6.
std::vector<WeightedPoint> exact_aggregate(const PathMatrix& pm);

// Mass strictly better on both axes: accuracy > A0 and length < L0.
double superior_fraction(const std::vector<WeightedPoint>& points, const Baseline& baseline);

double total_variation(const std::vector<WeightedPoint>& a, const std::vector<WeightedPoint>& b);

nlohmann::json path_row_json(const PathMatrix& pm, std::size_t row);
void write_path_matrix(const std::filesystem::path& path, const PathMatrix& pm);
PathMatrix read_path_matrix(const std::filesystem::path& path);

}  // namespace ncots
