#pragma once

#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "ncots/trace.hpp"

namespace ncots {

struct DecisionPoint {
  std::size_t step_index = 0;   // 1-based index of the step about to begin
  std::size_t token_offset = 0; // position right after the delimiter

  friend bool operator==(const DecisionPoint&, const DecisionPoint&) = default;
};

// With substring_match on, tokens such as ").\n\n" also end a step.
std::vector<DecisionPoint> find_decision_points(const TokenSeq& tokens,
                                                const std::string& delimiter = kStepDelimiter,
                                                bool substring_match = true);

// Splits on tokens exactly equal to the delimiter. Joining the segments with
// the delimiter reproduces the input.
std::vector<TokenSeq> split_steps(const TokenSeq& tokens,
                                  const std::string& delimiter = kStepDelimiter);

TokenSeq join_steps(const std::vector<TokenSeq>& steps,
                    const std::string& delimiter = kStepDelimiter);

struct BucketRule {
  std::string label;
  std::function<bool(const std::string&)> matches;
};

// "x\n\n" for any token carrying a double newline, " " for a bare space,
// "other" for everything else.
std::vector<BucketRule> default_bucket_rules();

struct BucketStat {
  std::size_t count = 0;
  double probability = 0.0;
};

struct PrecedingTokenDistribution {
  std::string keyword;
  std::size_t occurrences = 0;
  std::map<std::string, BucketStat> buckets;  // nonzero buckets only
};

// Lowercased alphabetic characters of a token: " Wait," -> "wait".
std::string alphabetic_core(const std::string& token);

PrecedingTokenDistribution preceding_token_distribution(
    const std::vector<ReasoningTrace>& traces, const std::string& keyword,
    const std::vector<BucketRule>& rules = default_bucket_rules());

// keyword,bucket,probability,count with newlines in labels written as "\n".
void write_distribution_csv(std::ostream& out,
                            const std::vector<PrecedingTokenDistribution>& dists,
                            bool header = true);

}  // namespace ncots
