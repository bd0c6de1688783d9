#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace ncots {

using FeatureVector = std::vector<double>;
using TokenSeq = std::vector<std::string>;

inline constexpr const char* kStepDelimiter = "\n\n";

// Raised for malformed inputs: bad files, dimension mismatches, unknown ids.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Operator {
  std::size_t id = 0;
  std::string text;

  friend bool operator==(const Operator&, const Operator&) = default;
};

// The finite action space of thinking tokens. Ids are positions.
class OperatorSet {
 public:
  OperatorSet() = default;
  OperatorSet(std::string name, const std::vector<std::string>& tokens);

  // The 16-token set used by the search.
  static OperatorSet full();
  // The 8 connective tokens used for uniform random exploration.
  static OperatorSet random8();
  static OperatorSet by_name(const std::string& name);

  const std::string& name() const { return name_; }
  std::size_t size() const { return operators_.size(); }
  const Operator& operator[](std::size_t id) const { return operators_.at(id); }
  const std::vector<Operator>& operators() const { return operators_; }
  std::optional<Operator> find(const std::string& text) const;
  std::vector<std::string> tokens() const;

  nlohmann::json to_json() const;
  static OperatorSet from_json(const nlohmann::json& j);

  friend bool operator==(const OperatorSet&, const OperatorSet&) = default;

 private:
  std::string name_;
  std::vector<Operator> operators_;
};

struct Query {
  std::string id;
  TokenSeq prompt;
  std::string answer_key;
};

struct ReasoningStep {
  std::optional<Operator> op;  // absent for the first, un-intervened step
  TokenSeq tokens;
  std::optional<FeatureVector> entry_features;
  std::optional<FeatureVector> lookahead_features;

  std::size_t token_count() const { return tokens.size(); }

  friend bool operator==(const ReasoningStep&, const ReasoningStep&) = default;
};

enum class Termination { answer, step_budget, token_budget };

const char* to_string(Termination t);
Termination termination_from_string(const std::string& s);

struct ReasoningTrace {
  std::string query_id;
  std::vector<ReasoningStep> steps;
  std::size_t total_tokens = 0;
  bool correct = false;
  Termination terminated_by = Termination::answer;
  std::string policy_tag;
  std::uint64_t seed = 0;

  // Operator sequence of steps 2..T.
  std::vector<Operator> architecture() const;

  friend bool operator==(const ReasoningTrace&, const ReasoningTrace&) = default;
};

// Step tokens plus one delimiter between consecutive steps.
std::size_t count_trace_tokens(const std::vector<ReasoningStep>& steps);

// The trace as one token stream, steps joined by the delimiter.
TokenSeq flatten(const ReasoningTrace& trace, const std::string& delimiter = kStepDelimiter);

struct Budgets {
  std::size_t step_budget = 50;
  std::size_t token_budget = 4096;
};

std::vector<std::string> validate_trace(const ReasoningTrace& trace, const Budgets& budgets,
                                        const OperatorSet* operators = nullptr);

nlohmann::json trace_to_json(const ReasoningTrace& trace);
ReasoningTrace trace_from_json(const nlohmann::json& j, const OperatorSet& operators);

std::size_t write_traces(const std::filesystem::path& path,
                         const std::vector<ReasoningTrace>& traces);
std::vector<ReasoningTrace> read_traces(const std::filesystem::path& path,
                                        const OperatorSet& operators);

}  // namespace ncots
