#include "ncots/backend.hpp"

namespace ncots {

std::vector<FeatureVector> replay_token_features(const Backend& backend, const Query& query,
                                                 const ReasoningTrace& trace) {
  std::vector<FeatureVector> out;
  out.reserve(trace.total_tokens);
  auto session = backend.begin(query, trace.seed);
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& step = trace.steps[i];
    if (i > 0) {
      // The delimiter token's hidden state is the decision-point state.
      out.push_back(session->decision_features());
      if (step.op) session->apply_operator(*step.op);
    }
    const StepOutput gen = session->generate_step();
    if (gen.tokens.size() < step.tokens.size())
      throw DataError("replay of " + trace.query_id + " diverged at step " + std::to_string(i + 1));
    auto feats = session->step_token_features();
    feats.resize(step.tokens.size());  // budget truncation keeps a prefix
    for (auto& f : feats) out.push_back(std::move(f));
  }
  return out;
}

}  // namespace ncots
