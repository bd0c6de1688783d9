#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <json.hpp>

#include "ncots/backend.hpp"
#include "ncots/heads.hpp"
#include "ncots/rng.hpp"

namespace ncots {

enum class SelectionMode { sample, argmax };

struct SearchConfig {
  double lambda = 1.0;
  double tau = 1.0;
  Budgets budgets;
  OperatorSet operators = OperatorSet::full();
  bool use_potential = true;
  bool use_progress = true;
  std::uint64_t seed = 0;
  SelectionMode sampling = SelectionMode::sample;

  void validate() const;
  nlohmann::json to_json() const;
  static SearchConfig from_json(const nlohmann::json& j);
};

struct BranchScore {
  Operator op;
  double potential = 0.0;  // potential-head logit at h_t
  double progress = 0.0;   // progress head at h'_{t,o}, unclamped
  double total = 0.0;
};

struct Selection {
  Operator op;
  std::vector<double> p_search;
};

struct DecisionRecord {
  std::size_t step_index = 0;
  std::vector<BranchScore> scores;
  std::vector<double> p_search;
  std::size_t chosen = 0;

  nlohmann::json to_json() const;
};

// h'_{t,o} for one candidate, computed on a copy of the session.
FeatureVector lookahead(const Session& session, const Operator& op, const OperatorSet& allowed);

// Null heads are treated as absent and contribute zero.
std::vector<BranchScore> score_branches(std::span<const double> h_t,
                                        const std::vector<FeatureVector>& lookaheads,
                                        const PotentialHead* pot, const ProgressHead* prog,
                                        const SearchConfig& cfg);

std::vector<double> search_policy(const std::vector<BranchScore>& scores, double tau);

Selection select_operator(const std::vector<BranchScore>& scores, double tau, SelectionMode mode,
                          Rng& rng);

// What a policy does at one decision point.
struct Decision {
  std::optional<Operator> op;                 // forced operator, if any
  std::unique_ptr<Session> committed;         // session already holding op, if prepared
  std::optional<FeatureVector> entry_features;
  std::optional<FeatureVector> lookahead_features;
};

using DecisionPolicy = std::function<Decision(std::size_t step_index, Session& session)>;

// Shared generation loop: first step unforced, then one policy call per
// decision point until the answer or a budget stops it.
ReasoningTrace run_rollout(const Query& query, const Backend& backend, const Budgets& budgets,
                           const OperatorSet& operators, const DecisionPolicy& policy,
                           std::string policy_tag, std::uint64_t stream_seed);

// Unguided generation (the original model).
ReasoningTrace run_native(const Query& query, const Backend& backend, const Budgets& budgets,
                          std::uint64_t stream_seed);

// Selection randomness is keyed by (cfg.seed, stream_seed).
ReasoningTrace run_search(const Query& query, const Backend& backend, const PotentialHead* pot,
                          const ProgressHead* prog, const SearchConfig& cfg,
                          std::uint64_t stream_seed,
                          std::vector<DecisionRecord>* diagnostics = nullptr);

struct HybridResult {
  ReasoningTrace trace;
  double guiding_fraction = 0.0;
};

double guiding_fraction(const ReasoningTrace& trace);

// The planner's argmax operator is forced at every decision point; the
// executor writes the rest of each step.
HybridResult run_hybrid_guidance(const Query& query, const Backend& executor,
                                 const Planner& planner, const SearchConfig& cfg,
                                 std::uint64_t stream_seed);

}  // namespace ncots
