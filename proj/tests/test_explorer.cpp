#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ncots/explorer.hpp"
#include "ncots/pipeline.hpp"

using namespace ncots;

namespace {

PathMatrix fixture(const std::vector<std::vector<PathEntry>>& rows) {
  PathMatrix pm;
  for (std::size_t i = 0; i < rows.size(); ++i) pm.query_ids.push_back("q" + std::to_string(i));
  pm.paths = rows;
  return pm;
}

bool has_point(const std::vector<WeightedPoint>& pts, double len, double acc, double p) {
  for (const auto& w : pts)
    if (std::abs(w.mean_length - len) < 1e-9 && std::abs(w.mean_accuracy - acc) < 1e-9 &&
        std::abs(w.probability - p) < 1e-9)
      return true;
  return false;
}

}  // namespace

TEST_CASE("random rollouts") {
  EnvSpec spec;
  spec.noise_sigma = 0.0;
  const SyntheticEnv env(spec);
  const auto q = EnvQuery{"q", 4, 1}.to_query();
  const auto ops = OperatorSet::random8();
  const auto a = random_rollout(q, env, ops, Budgets{}, 3, 4);
  CHECK(a == random_rollout(q, env, ops, Budgets{}, 3, 4));
  CHECK(validate_trace(a, Budgets{}, &ops).empty());

  const OperatorSet single("one", {"Then"});
  const auto s1 = random_rollout(q, env, single, Budgets{}, 3, 1);
  const auto s2 = random_rollout(q, env, single, Budgets{}, 3, 2);
  CHECK(s1.architecture() == s2.architecture());

  std::vector<std::size_t> counts(8, 0);
  std::size_t total = 0;
  for (std::uint64_t seed = 0; total < 10000; ++seed) {
    const auto t = random_rollout(EnvQuery{"q", 6, seed}.to_query(), env, ops, Budgets{}, seed, seed);
    for (const auto& op : t.architecture()) {
      ++counts[op.id];
      ++total;
    }
  }
  double chi2 = 0.0;
  const double expected = static_cast<double>(total) / 8.0;
  for (auto c : counts) chi2 += (c - expected) * (c - expected) / expected;
  CHECK(chi2 < 18.48);
}

TEST_CASE("characterize") {
  EnvSpec spec;
  const SyntheticEnv env(spec);
  const auto queries = to_queries(generate_queries(spec, 2));
  const auto ops = OperatorSet::random8();
  const auto one = characterize({queries[0]}, env, 1, ops, Budgets{}, 1);
  CHECK(one.rows() == 1);
  CHECK(one.k() == 1);
  const auto pm = characterize(queries, env, 16, ops, Budgets{}, 1, 1, true);
  CHECK(pm.rows() == 2);
  CHECK(pm.k() == 16);
  CHECK(pm.traces.size() == 2);
  const auto threaded = characterize(queries, env, 16, ops, Budgets{}, 1, 4, true);
  CHECK(threaded.paths == pm.paths);
  CHECK(threaded.traces == pm.traces);

  // With a single operator and no randomness left, each row repeats itself.
  auto det = spec;
  det.noise_sigma = 0.0;
  det.error_inject_prob = 0.0;
  det.setup_tokens = {50, 50};
  det.statement_tokens = {70, 70};
  const SyntheticEnv quiet(det);
  const auto rows = characterize(queries, quiet, 5, OperatorSet("one", {"So"}), Budgets{}, 3);
  for (const auto& row : rows.paths)
    for (const auto& e : row) CHECK(e == row.front());
}

TEST_CASE("exact and Monte Carlo aggregation") {
  const auto pm = fixture({{{100, true}, {200, false}}, {{150, true}, {50, false}}});
  const auto exact = exact_aggregate(pm);
  REQUIRE(exact.size() == 4);
  CHECK(has_point(exact, 125, 1.0, 0.25));
  CHECK(has_point(exact, 75, 0.5, 0.25));
  CHECK(has_point(exact, 175, 0.5, 0.25));
  CHECK(has_point(exact, 125, 0.0, 0.25));  // both wrong paths

  const auto grid = monte_carlo_aggregate(pm, 100000, DensityBins{}, 1, std::nullopt, true);
  CHECK(grid.n_samples == 100000);
  CHECK(grid.total_count() == grid.n_samples);
  CHECK(total_variation(grid.point_distribution(), exact) < 0.02);

  const auto k1 = fixture({{{10, true}}, {{30, false}}});
  CHECK(exact_aggregate(k1).size() == 1);
  const auto g1 = monte_carlo_aggregate(k1, 500, DensityBins{}, 2);
  CHECK(g1.counts.size() == 1);
  CHECK(g1.counts.begin()->second == 500);

  const auto n3 = fixture({{{1, true}, {2, false}}, {{4, true}, {8, false}}, {{16, true}, {32, false}}});
  const auto e3 = exact_aggregate(n3);
  CHECK(e3.size() == 8);
  for (const auto& w : e3) CHECK(w.probability == doctest::Approx(0.125));

  CHECK_THROWS_AS(monte_carlo_aggregate(pm, 0, DensityBins{}, 1), DataError);
  std::vector<std::vector<PathEntry>> big(21, std::vector<PathEntry>(2, PathEntry{1, true}));
  CHECK_THROWS_AS(exact_aggregate(fixture(big)), DataError);
}

TEST_CASE("superior fraction") {
  const auto pts = exact_aggregate(fixture({{{100, true}, {200, false}}, {{150, true}, {50, false}}}));
  CHECK(superior_fraction(pts, {10.0, 1.0}) == 0.0);
  CHECK(superior_fraction(pts, {1e18, -1.0}) == 1.0);
  CHECK(superior_fraction(pts, {130.0, 0.75}) == doctest::Approx(0.25));
  // Strict on both axes: the baseline point itself does not count.
  CHECK(superior_fraction(pts, {125.0, 1.0}) == 0.0);

  double last = 0.0;
  for (double len = 0; len <= 300; len += 25)
    for (double acc = 1.0; acc > -0.3; acc -= 0.25) {
      const double f = superior_fraction(pts, {len, acc});
      CHECK(f >= superior_fraction(pts, {len - 25, acc}));
      CHECK(f >= superior_fraction(pts, {len, acc + 0.25}));
      last = f;
    }
  CHECK(last == 1.0);

  const auto grid = monte_carlo_aggregate(
      fixture({{{100, true}, {200, false}}, {{150, true}, {50, false}}}), 20000, DensityBins{}, 4,
      Baseline{130.0, 0.75});
  CHECK(grid.superior_fraction() == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("density outputs") {
  const auto pm = fixture({{{100, true}, {200, false}}, {{150, true}, {50, false}}});
  const auto grid = monte_carlo_aggregate(pm, 1000, DensityBins{64.0, 0}, 1, Baseline{200, 0.5});
  std::ostringstream csv;
  grid.write_csv(csv);
  CHECK(csv.str().rfind("length_bin_low,acc_bin_low,count\n", 0) == 0);
  const auto side = grid.sidecar_json();
  CHECK(side.at("n_samples") == 1000);
  CHECK(side.contains("superior_fraction"));
  CHECK(grid.accuracy_width == doctest::Approx(0.5));
}

TEST_CASE("path matrix io") {
  auto pm = fixture({{{100, true}, {200, false}}, {{150, true}, {50, false}}});
  const auto path = std::filesystem::temp_directory_path() / "ncots_test_paths.jsonl";
  write_path_matrix(path, pm);
  const auto back = read_path_matrix(path);
  CHECK(back.query_ids == pm.query_ids);
  CHECK(back.paths == pm.paths);
  std::filesystem::remove(path);

  pm.paths[1].pop_back();
  CHECK_THROWS_AS(pm.validate(), DataError);
}
