#include "ncots/search.hpp"

#include <algorithm>
#include <cmath>

namespace ncots {

using nlohmann::json;

void SearchConfig::validate() const {
  if (!(tau > 0.0)) throw DataError("tau must be positive");
  if (lambda < 0.0) throw DataError("lambda must be non-negative");
  if (budgets.step_budget < 1 || budgets.token_budget < 1) throw DataError("budgets must be >= 1");
  if (operators.size() == 0) throw DataError("operator set is empty");
}

json SearchConfig::to_json() const {
  return json{{"lambda", lambda},
              {"tau", tau},
              {"step_budget", budgets.step_budget},
              {"token_budget", budgets.token_budget},
              {"operator_set", operators.to_json()},
              {"use_potential", use_potential},
              {"use_progress", use_progress},
              {"seed", seed},
              {"sampling", sampling == SelectionMode::sample ? "sample" : "argmax"}};
}

SearchConfig SearchConfig::from_json(const json& j) {
  SearchConfig c;
  c.lambda = j.value("lambda", c.lambda);
  c.tau = j.value("tau", c.tau);
  c.budgets.step_budget = j.value("step_budget", c.budgets.step_budget);
  c.budgets.token_budget = j.value("token_budget", c.budgets.token_budget);
  if (j.contains("operator_set")) {
    const auto& s = j.at("operator_set");
    c.operators = s.is_string() ? OperatorSet::by_name(s.get<std::string>()) : OperatorSet::from_json(s);
  }
  c.use_potential = j.value("use_potential", c.use_potential);
  c.use_progress = j.value("use_progress", c.use_progress);
  c.seed = j.value("seed", c.seed);
  const auto mode = j.value("sampling", std::string("sample"));
  if (mode == "sample")
    c.sampling = SelectionMode::sample;
  else if (mode == "argmax")
    c.sampling = SelectionMode::argmax;
  else
    throw DataError("sampling must be \"sample\" or \"argmax\"");
  c.validate();
  return c;
}

json DecisionRecord::to_json() const {
  json scores_json = json::array();
  for (const auto& s : scores)
    scores_json.push_back(json{{"operator_id", s.op.id}, {"potential", s.potential},
                               {"progress", s.progress}, {"S", s.total}});
  return json{{"step_index", step_index}, {"scores", std::move(scores_json)},
              {"P_search", p_search}, {"chosen", chosen}};
}

FeatureVector lookahead(const Session& session, const Operator& op, const OperatorSet& allowed) {
  if (op.id >= allowed.size() || allowed[op.id] != op)
    throw DataError("operator \"" + op.text + "\" is not in the configured set");
  return session.clone()->apply_operator(op);
}

std::vector<BranchScore> score_branches(std::span<const double> h_t,
                                        const std::vector<FeatureVector>& lookaheads,
                                        const PotentialHead* pot, const ProgressHead* prog,
                                        const SearchConfig& cfg) {
  const auto& ops = cfg.operators;
  if (lookaheads.size() != ops.size()) throw DataError("one lookahead per operator required");
  std::vector<double> logits(ops.size(), 0.0);
  if (pot) {
    if (pot->num_operators != ops.size()) throw DataError("potential head / operator set mismatch");
    logits = potential_forward(*pot, h_t).logits;
  }
  std::vector<BranchScore> scores;
  scores.reserve(ops.size());
  for (std::size_t o = 0; o < ops.size(); ++o) {
    BranchScore s{ops[o]};
    s.potential = logits[o];
    if (prog) s.progress = progress_forward(*prog, lookaheads[o]);
    s.total = (cfg.use_potential ? s.potential : 0.0) +
              (cfg.use_progress ? cfg.lambda * s.progress : 0.0);
    scores.push_back(s);
  }
  return scores;
}

std::vector<double> search_policy(const std::vector<BranchScore>& scores, double tau) {
  std::vector<double> totals;
  totals.reserve(scores.size());
  for (const auto& s : scores) totals.push_back(s.total);
  return softmax(totals, tau);
}

Selection select_operator(const std::vector<BranchScore>& scores, double tau, SelectionMode mode,
                          Rng& rng) {
  if (scores.empty()) throw DataError("select_operator: no branches");
  if (!(tau > 0.0)) throw DataError("select_operator: tau must be positive");
  Selection sel{scores.front().op, search_policy(scores, tau)};
  std::size_t pick = 0;
  if (mode == SelectionMode::argmax) {
    for (std::size_t i = 1; i < scores.size(); ++i)
      if (scores[i].total > scores[pick].total) pick = i;
  } else {
    const double u = rng.uniform();
    double acc = 0.0;
    pick = scores.size() - 1;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      acc += sel.p_search[i];
      if (u < acc) {
        pick = i;
        break;
      }
    }
    // Rounding can leave acc just under 1; never land on a zero-mass branch.
    while (sel.p_search[pick] == 0.0 && pick > 0) --pick;
  }
  sel.op = scores[pick].op;
  return sel;
}

ReasoningTrace run_rollout(const Query& query, const Backend& backend, const Budgets& budgets,
                           const OperatorSet& operators, const DecisionPolicy& policy,
                           std::string policy_tag, std::uint64_t stream_seed) {
  ReasoningTrace trace;
  trace.query_id = query.id;
  trace.policy_tag = std::move(policy_tag);
  trace.seed = stream_seed;

  auto session = backend.begin(query, stream_seed);
  std::size_t total = 0;

  // Appends a generated step, truncating it to the token budget.
  auto commit = [&](StepOutput out, Decision&& d) -> bool {
    ReasoningStep step;
    if (d.op)
      step.op = d.op;
    else if (out.operator_text)
      step.op = operators.find(*out.operator_text);
    step.entry_features = std::move(d.entry_features);
    step.lookahead_features = std::move(d.lookahead_features);
    step.tokens = std::move(out.tokens);
    const std::size_t room = budgets.token_budget - total;
    const bool truncated = step.tokens.size() > room;
    if (truncated) step.tokens.resize(room);
    total += step.tokens.size();
    trace.steps.push_back(std::move(step));
    return truncated;
  };

  bool truncated = commit(session->generate_step(), Decision{});
  while (true) {
    if (truncated) {
      trace.terminated_by = Termination::token_budget;
      break;
    }
    if (session->done()) {
      trace.terminated_by = Termination::answer;
      break;
    }
    if (trace.steps.size() >= budgets.step_budget) {
      trace.terminated_by = Termination::step_budget;
      break;
    }
    // Room for the delimiter plus at least one token of the next step.
    if (total + 2 > budgets.token_budget) {
      trace.terminated_by = Termination::token_budget;
      break;
    }
    total += 1;
    Decision d = policy(trace.steps.size() + 1, *session);
    if (d.committed)
      session = std::move(d.committed);
    else if (d.op)
      session->apply_operator(*d.op);
    truncated = commit(session->generate_step(), std::move(d));
  }
  trace.total_tokens = total;
  trace.correct = trace.terminated_by == Termination::answer && session->judge();
  return trace;
}

ReasoningTrace run_native(const Query& query, const Backend& backend, const Budgets& budgets,
                          std::uint64_t stream_seed) {
  const OperatorSet full = OperatorSet::full();
  return run_rollout(
      query, backend, budgets, full,
      [](std::size_t, Session& s) {
        Decision d;
        d.entry_features = s.decision_features();
        return d;
      },
      "original", stream_seed);
}

ReasoningTrace run_search(const Query& query, const Backend& backend, const PotentialHead* pot,
                          const ProgressHead* prog, const SearchConfig& cfg,
                          std::uint64_t stream_seed, std::vector<DecisionRecord>* diagnostics) {
  cfg.validate();
  const std::size_t d = backend.feature_dim();
  if (pot && (pot->dim != d || pot->num_operators != cfg.operators.size()))
    throw DataError("potential head does not match backend / operator set");
  if (prog && prog->dim() != d) throw DataError("progress head does not match backend");

  Rng rng(hash_keys({cfg.seed, stream_seed}));
  const auto& ops = cfg.operators;
  auto policy = [&](std::size_t step_index, Session& session) {
    FeatureVector h = session.decision_features();
    std::vector<std::unique_ptr<Session>> branches;
    std::vector<FeatureVector> looks;
    branches.reserve(ops.size());
    looks.reserve(ops.size());
    for (const auto& op : ops.operators()) {
      branches.push_back(session.clone());
      looks.push_back(branches.back()->apply_operator(op));
    }
    const auto scores = score_branches(h, looks, pot, prog, cfg);
    const Selection sel = select_operator(scores, cfg.tau, cfg.sampling, rng);
    if (diagnostics)
      diagnostics->push_back(DecisionRecord{step_index, scores, sel.p_search, sel.op.id});
    Decision dec;
    dec.op = sel.op;
    dec.committed = std::move(branches[sel.op.id]);
    dec.entry_features = std::move(h);
    dec.lookahead_features = std::move(looks[sel.op.id]);
    return dec;
  };
  return run_rollout(query, backend, cfg.budgets, ops, policy, "ncots", stream_seed);
}

double guiding_fraction(const ReasoningTrace& trace) {
  if (trace.total_tokens == 0) return 0.0;
  std::size_t forced = 0;
  for (std::size_t i = 1; i < trace.steps.size(); ++i)
    if (trace.steps[i].op && !trace.steps[i].tokens.empty()) ++forced;
  return static_cast<double>(forced) / static_cast<double>(trace.total_tokens);
}

HybridResult run_hybrid_guidance(const Query& query, const Backend& executor,
                                 const Planner& planner, const SearchConfig& cfg,
                                 std::uint64_t stream_seed) {
  cfg.validate();
  const auto& ops = cfg.operators;
  auto policy = [&](std::size_t, Session& session) {
    const auto p = planner.distribution(session, ops);
    if (p.size() != ops.size()) throw DataError("planner distribution has wrong size");
    const auto best = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    Decision d;
    d.op = ops[best];
    d.entry_features = session.decision_features();
    d.lookahead_features = session.apply_operator(ops[best]);
    // Already applied; hand the session back as committed.
    d.committed = session.clone();
    return d;
  };
  HybridResult r;
  r.trace = run_rollout(query, executor, cfg.budgets, ops, policy, "hybrid", stream_seed);
  r.guiding_fraction = guiding_fraction(r.trace);
  return r;
}

}  // namespace ncots
