#include "ncots/explorer.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

#include "ncots/parallel.hpp"
#include "ncots/rng.hpp"

namespace ncots {

using nlohmann::json;

void PathMatrix::validate() const {
  if (query_ids.size() != paths.size()) throw DataError("path matrix: ids and rows differ");
  for (const auto& row : paths)
    if (row.size() != k()) throw DataError("path matrix: rows have different K");
}

ReasoningTrace random_rollout(const Query& query, const Backend& backend,
                              const OperatorSet& operators, const Budgets& budgets,
                              std::uint64_t stream_seed, std::uint64_t policy_seed) {
  Rng rng(hash_keys({policy_seed, stream_seed}));
  return run_rollout(
      query, backend, budgets, operators,
      [&](std::size_t, Session& s) {
        Decision d;
        d.op = operators[rng.below(operators.size())];
        d.entry_features = s.decision_features();
        d.lookahead_features = s.apply_operator(*d.op);
        return d;
      },
      "random", stream_seed);
}

PathMatrix characterize(const std::vector<Query>& queries, const Backend& backend, std::size_t k,
                        const OperatorSet& operators, const Budgets& budgets, std::uint64_t seed,
                        std::size_t threads, bool keep_traces) {
  if (k == 0) throw DataError("characterize needs K >= 1");
  PathMatrix pm;
  pm.paths.assign(queries.size(), std::vector<PathEntry>(k));
  if (keep_traces) pm.traces.assign(queries.size(), std::vector<ReasoningTrace>(k));
  for (const auto& q : queries) pm.query_ids.push_back(q.id);
  parallel_for(queries.size() * k, threads, [&](std::size_t flat) {
    const std::size_t i = flat / k, j = flat % k;
    const std::uint64_t stream = hash_keys({seed, i, j});
    auto trace = random_rollout(queries[i], backend, operators, budgets, stream, seed);
    pm.paths[i][j] = PathEntry{trace.total_tokens, trace.correct};
    if (keep_traces) pm.traces[i][j] = std::move(trace);
  });
  return pm;
}

namespace {

std::size_t bin_index(double value, double width) {
  return static_cast<std::size_t>(std::floor(value / width + 1e-9));
}

bool is_superior(double mean_length, double mean_accuracy, const Baseline& b) {
  return mean_accuracy > b.accuracy && mean_length < b.length;
}

}  // namespace

DensityGrid monte_carlo_aggregate(const PathMatrix& pm, std::size_t iterations,
                                  const DensityBins& bins, std::uint64_t seed,
                                  std::optional<Baseline> baseline, bool track_points) {
  if (iterations == 0) throw DataError("monte_carlo_aggregate needs iterations >= 1");
  pm.validate();
  const std::size_t n = pm.rows(), k = pm.k();
  if (n == 0 || k == 0) throw DataError("monte_carlo_aggregate: empty path matrix");

  DensityGrid grid;
  grid.n_queries = n;
  grid.length_width = bins.length_width;
  grid.accuracy_width = bins.accuracy_bins == 0 ? 1.0 / static_cast<double>(n)
                                                : 1.0 / static_cast<double>(bins.accuracy_bins);
  grid.baseline = baseline;
  const double nd = static_cast<double>(n);

  Rng rng(hash_keys({seed, 0x4D43ULL}));
  for (std::size_t it = 0; it < iterations; ++it) {
    PointKey key;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& e = pm.paths[i][k == 1 ? 0 : rng.below(k)];
      key.length_sum += e.length;
      key.correct += e.correct ? 1 : 0;
    }
    const double mean_length = static_cast<double>(key.length_sum) / nd;
    const double mean_acc = static_cast<double>(key.correct) / nd;
    ++grid.counts[{bin_index(mean_length, grid.length_width),
                   bin_index(mean_acc, grid.accuracy_width)}];
    ++grid.n_samples;
    if (baseline && is_superior(mean_length, mean_acc, *baseline)) ++grid.superior_count;
    if (track_points) ++grid.points[key];
  }
  return grid;
}

double DensityGrid::superior_fraction() const {
  return n_samples == 0 ? 0.0 : static_cast<double>(superior_count) / static_cast<double>(n_samples);
}

std::size_t DensityGrid::total_count() const {
  std::size_t total = 0;
  for (const auto& [bin, c] : counts) total += c;
  return total;
}

std::vector<WeightedPoint> DensityGrid::point_distribution() const {
  std::vector<WeightedPoint> out;
  const double nd = static_cast<double>(n_queries);
  for (const auto& [key, c] : points)
    out.push_back({static_cast<double>(key.length_sum) / nd, static_cast<double>(key.correct) / nd,
                   static_cast<double>(c) / static_cast<double>(n_samples)});
  return out;
}

void DensityGrid::write_csv(std::ostream& out) const {
  out << "length_bin_low,acc_bin_low,count\n";
  out << std::setprecision(17);
  for (const auto& [bin, c] : counts)
    out << static_cast<double>(bin.first) * length_width << ','
        << static_cast<double>(bin.second) * accuracy_width << ',' << c << '\n';
}

json DensityGrid::sidecar_json() const {
  json j{{"n_queries", n_queries},
         {"n_samples", n_samples},
         {"length_bin_width", length_width},
         {"accuracy_bin_width", accuracy_width}};
  if (baseline) {
    j["baseline"] = json{{"length", baseline->length}, {"accuracy", baseline->accuracy}};
    j["superior_fraction"] = superior_fraction();
  } else {
    j["baseline"] = nullptr;
    j["superior_fraction"] = nullptr;
  }
  return j;
}

std::vector<WeightedPoint> exact_aggregate(const PathMatrix& pm) {
  pm.validate();
  const std::size_t n = pm.rows(), k = pm.k();
  if (n == 0 || k == 0) throw DataError("exact_aggregate: empty path matrix");
  if (std::pow(static_cast<double>(k), static_cast<double>(n)) > 1e6)
    throw DataError("exact_aggregate: K^N exceeds 1e6 combinations");

  std::map<PointKey, std::size_t> counts;
  std::vector<std::size_t> pick(n, 0);
  std::size_t combos = 0;
  while (true) {
    PointKey key;
    for (std::size_t i = 0; i < n; ++i) {
      key.length_sum += pm.paths[i][pick[i]].length;
      key.correct += pm.paths[i][pick[i]].correct ? 1 : 0;
    }
    ++counts[key];
    ++combos;
    std::size_t i = 0;
    while (i < n && ++pick[i] == k) pick[i++] = 0;
    if (i == n) break;
  }
  std::vector<WeightedPoint> out;
  const double nd = static_cast<double>(n);
  for (const auto& [key, c] : counts)
    out.push_back({static_cast<double>(key.length_sum) / nd, static_cast<double>(key.correct) / nd,
                   static_cast<double>(c) / static_cast<double>(combos)});
  return out;
}

double superior_fraction(const std::vector<WeightedPoint>& points, const Baseline& baseline) {
  double mass = 0.0;
  for (const auto& p : points)
    if (is_superior(p.mean_length, p.mean_accuracy, baseline)) mass += p.probability;
  return mass;
}

double total_variation(const std::vector<WeightedPoint>& a, const std::vector<WeightedPoint>& b) {
  std::map<std::pair<double, double>, double> diff;
  for (const auto& p : a) diff[{p.mean_length, p.mean_accuracy}] += p.probability;
  for (const auto& p : b) diff[{p.mean_length, p.mean_accuracy}] -= p.probability;
  double tv = 0.0;
  for (const auto& [pt, d] : diff) tv += std::abs(d);
  return 0.5 * tv;
}

json path_row_json(const PathMatrix& pm, std::size_t row) {
  json paths = json::array();
  for (const auto& e : pm.paths[row]) paths.push_back(json{{"length", e.length}, {"correct", e.correct}});
  return json{{"query_id", pm.query_ids[row]}, {"paths", std::move(paths)}};
}

void write_path_matrix(const std::filesystem::path& path, const PathMatrix& pm) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  for (std::size_t i = 0; i < pm.rows(); ++i) out << path_row_json(pm, i).dump() << '\n';
}

PathMatrix read_path_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open for reading: " + path.string());
  PathMatrix pm;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      pm.query_ids.push_back(j.at("query_id").get<std::string>());
      std::vector<PathEntry> row;
      for (const auto& e : j.at("paths"))
        row.push_back({e.at("length").get<std::size_t>(), e.at("correct").get<bool>()});
      pm.paths.push_back(std::move(row));
    } catch (const json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  pm.validate();
  return pm;
}

}  // namespace ncots
