#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "ncots/rng.hpp"
#include "ncots/segmentation.hpp"

using namespace ncots;

namespace {

ReasoningTrace single_step(TokenSeq tokens) {
  ReasoningTrace t;
  t.steps.push_back({std::nullopt, std::move(tokens), std::nullopt, std::nullopt});
  return t;
}

}  // namespace

TEST_CASE("find_decision_points") {
  CHECK(find_decision_points({}).empty());
  CHECK(find_decision_points({"a", "b", "c"}).empty());
  const auto pts = find_decision_points({"a", "\n\n", "b", "\n\n", "c"});
  REQUIRE(pts.size() == 2);
  CHECK(pts[0] == DecisionPoint{2, 2});
  CHECK(pts[1] == DecisionPoint{3, 4});

  CHECK(find_decision_points({"a", ").\n\n", "b"}).size() == 1);
  CHECK(find_decision_points({"a", ").\n\n", "b"}, kStepDelimiter, false).empty());
}

TEST_CASE("split_steps and join_steps") {
  CHECK(split_steps({"a", "\n\n", "b"}) == std::vector<TokenSeq>{{"a"}, {"b"}});
  CHECK(split_steps({"\n\n"}) == std::vector<TokenSeq>{{}, {}});
  CHECK(split_steps({"a"}) == std::vector<TokenSeq>{{"a"}});

  Rng rng(9);
  const std::vector<std::string> alphabet{"a", "b", "\n\n", " ", "x\n\n"};
  for (int trial = 0; trial < 500; ++trial) {
    TokenSeq seq;
    const auto n = rng.below(12);
    for (std::size_t i = 0; i < n; ++i) seq.push_back(alphabet[rng.below(alphabet.size())]);
    CHECK(join_steps(split_steps(seq)) == seq);
  }
}

TEST_CASE("alphabetic_core") {
  CHECK(alphabetic_core(" Wait,") == "wait");
  CHECK(alphabetic_core("Alternatively") == "alternatively");
  CHECK(alphabetic_core("\n\n").empty());
}

TEST_CASE("preceding token distribution") {
  std::vector<ReasoningTrace> corpus;
  for (int i = 0; i < 3; ++i) corpus.push_back(single_step({"ok.\n\n", "Wait"}));
  corpus.push_back(single_step({"so", " ", " wait"}));
  const auto d = preceding_token_distribution(corpus, "wait");
  CHECK(d.occurrences == 4);
  REQUIRE(d.buckets.size() == 2);
  CHECK(d.buckets.at("x\n\n").probability == doctest::Approx(0.75));
  CHECK(d.buckets.at(" ").probability == doctest::Approx(0.25));
  CHECK(d.buckets.at("x\n\n").count == 3);

  const auto alt = preceding_token_distribution({single_step({"a\n\n", "Alternatively", "b"})},
                                                "alternatively");
  REQUIRE(alt.buckets.size() == 1);
  CHECK(alt.buckets.at("x\n\n").probability == 1.0);

  std::ostringstream csv;
  write_distribution_csv(csv, {d});
  CHECK(csv.str().rfind("keyword,bucket,probability,count\n", 0) == 0);
  CHECK(csv.str().find("x\\n\\n") != std::string::npos);
}
