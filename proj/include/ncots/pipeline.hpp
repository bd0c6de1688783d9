#pragma once

#include <cstdint>
#include <vector>

#include "ncots/datasets.hpp"
#include "ncots/search.hpp"
#include "ncots/synthetic_env.hpp"

namespace ncots {

// Rollout stream for repeat `r` of a query; shared by every policy so runs
// on the same query are paired.
inline std::uint64_t rollout_stream(const EnvQuery& q, std::size_t repeat) {
  return hash_keys({q.seed, repeat});
}

QueryIndex index_queries(const std::vector<EnvQuery>& queries);
std::vector<Query> to_queries(const std::vector<EnvQuery>& queries);

enum class PolicyKind { native, random, ncots, hybrid };
const char* to_string(PolicyKind k);

struct PolicyRun {
  std::vector<ReasoningTrace> traces;     // query-major, `repeats` per query
  std::vector<double> guiding_fractions;  // hybrid only
};

struct PolicyInputs {
  const PotentialHead* potential = nullptr;
  const ProgressHead* progress = nullptr;
  const Planner* planner = nullptr;
};

PolicyRun run_policy(PolicyKind kind, const SyntheticEnv& env, const std::vector<EnvQuery>& queries,
                     const SearchConfig& cfg, const PolicyInputs& inputs, std::size_t repeats = 1,
                     std::size_t threads = 1);

struct HeadTraining {
  PotentialHead potential;
  ProgressHead progress;
  std::vector<double> potential_curve;
  std::vector<double> progress_curve;
  std::size_t teacher_samples = 0;
  std::size_t progress_samples = 0;
  std::size_t skipped_traces = 0;
};

// Distills the environment teacher and fits the progress head on native
// traces of `queries`. The potential head starts from the operator embeddings.
HeadTraining train_heads(const SyntheticEnv& env, const std::vector<EnvQuery>& queries,
                         const OperatorSet& operators, const TrainConfig& potential_cfg,
                         const TrainConfig& progress_cfg, std::size_t threads = 1);

PotentialHead train_potential_head(const SyntheticEnv& env, const std::vector<ReasoningTrace>& traces,
                                   const QueryIndex& queries, const OperatorSet& operators,
                                   const TrainConfig& cfg, std::vector<double>* curve = nullptr,
                                   std::size_t* samples = nullptr);

}  // namespace ncots
