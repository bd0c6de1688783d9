#include "ncots/pipeline.hpp"

#include "ncots/explorer.hpp"
#include "ncots/parallel.hpp"

namespace ncots {

QueryIndex index_queries(const std::vector<EnvQuery>& queries) {
  QueryIndex idx;
  for (const auto& q : queries) idx.emplace(q.id, q.to_query());
  return idx;
}

std::vector<Query> to_queries(const std::vector<EnvQuery>& queries) {
  std::vector<Query> out;
  out.reserve(queries.size());
  for (const auto& q : queries) out.push_back(q.to_query());
  return out;
}

const char* to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::native: return "original";
    case PolicyKind::random: return "random";
    case PolicyKind::ncots: return "ncots";
    case PolicyKind::hybrid: return "hybrid";
  }
  return "original";
}

PolicyRun run_policy(PolicyKind kind, const SyntheticEnv& env, const std::vector<EnvQuery>& queries,
                     const SearchConfig& cfg, const PolicyInputs& inputs, std::size_t repeats,
                     std::size_t threads) {
  if (kind == PolicyKind::hybrid && !inputs.planner) throw DataError("hybrid run needs a planner");
  PolicyRun run;
  const std::size_t n = queries.size() * repeats;
  run.traces.resize(n);
  if (kind == PolicyKind::hybrid) run.guiding_fractions.resize(n);
  parallel_for(n, threads, [&](std::size_t flat) {
    const auto& eq = queries[flat / repeats];
    const std::uint64_t stream = rollout_stream(eq, flat % repeats);
    const Query q = eq.to_query();
    switch (kind) {
      case PolicyKind::native:
        run.traces[flat] = run_native(q, env, cfg.budgets, stream);
        break;
      case PolicyKind::random:
        run.traces[flat] = random_rollout(q, env, cfg.operators, cfg.budgets, stream, cfg.seed);
        break;
      case PolicyKind::ncots:
        run.traces[flat] = run_search(q, env, inputs.potential, inputs.progress, cfg, stream);
        break;
      case PolicyKind::hybrid: {
        auto r = run_hybrid_guidance(q, env, *inputs.planner, cfg, stream);
        run.traces[flat] = std::move(r.trace);
        run.guiding_fractions[flat] = r.guiding_fraction;
        break;
      }
    }
  });
  return run;
}

PotentialHead train_potential_head(const SyntheticEnv& env, const std::vector<ReasoningTrace>& traces,
                                   const QueryIndex& queries, const OperatorSet& operators,
                                   const TrainConfig& cfg, std::vector<double>* curve,
                                   std::size_t* samples) {
  const EnvTeacher teacher(env);
  const auto data = build_teacher_dataset(traces, env, queries, teacher, operators);
  if (samples) *samples = data.size();
  auto init = init_potential_from_embeddings(env.operator_embeddings(operators), operators.size(),
                                             operators.name());
  return train_potential(data, std::move(init), cfg, curve);
}

HeadTraining train_heads(const SyntheticEnv& env, const std::vector<EnvQuery>& queries,
                         const OperatorSet& operators, const TrainConfig& potential_cfg,
                         const TrainConfig& progress_cfg, std::size_t threads) {
  SearchConfig cfg;
  cfg.operators = operators;
  const auto run = run_policy(PolicyKind::native, env, queries, cfg, {}, 1, threads);
  const auto index = index_queries(queries);

  HeadTraining out;
  out.potential = train_potential_head(env, run.traces, index, operators, potential_cfg,
                                       &out.potential_curve, &out.teacher_samples);
  const auto progress_data = build_progress_dataset(run.traces, env, index, &out.skipped_traces);
  out.progress_samples = progress_data.size();
  out.progress = train_progress(progress_data, progress_cfg, &out.progress_curve);
  return out;
}

}  // namespace ncots
