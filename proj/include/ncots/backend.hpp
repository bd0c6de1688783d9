#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ncots/trace.hpp"

namespace ncots {

struct StepOutput {
  TokenSeq tokens;                          // excludes the trailing delimiter
  std::optional<std::string> operator_text; // first token when the step opens with an operator
  bool done = false;                        // the step produced the final answer
};

// One in-flight generation. Copying a session (clone) is how lookahead stays
// off the committed path.
class Session {
 public:
  virtual ~Session() = default;

  virtual std::unique_ptr<Session> clone() const = 0;

  // Hidden state at the current decision point (the delimiter position).
  virtual FeatureVector decision_features() const = 0;

  // Appends exactly one operator token; returns the feature vector observed
  // right after it. The next generate_step continues from that operator.
  virtual FeatureVector apply_operator(const Operator& op) = 0;

  // Generates the rest of the step. Without a pending operator the model
  // chooses its own opening token.
  virtual StepOutput generate_step() = 0;

  // Per-token features of the most recently generated step.
  virtual std::vector<FeatureVector> step_token_features() const = 0;

  virtual bool done() const = 0;
  virtual bool judge() const = 0;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::size_t feature_dim() const = 0;
  // stream_seed keys every random draw of the rollout.
  virtual std::unique_ptr<Session> begin(const Query& query, std::uint64_t stream_seed) const = 0;
};

// A policy that can look at a session and propose a distribution over an
// operator set (the teacher / planner role).
class Planner {
 public:
  virtual ~Planner() = default;
  virtual std::vector<double> distribution(const Session& session,
                                           const OperatorSet& operators) const = 0;
};

// Features for every token of a trace (delimiters included), obtained by
// re-running the backend with the trace's seed and recorded operators.
std::vector<FeatureVector> replay_token_features(const Backend& backend, const Query& query,
                                                 const ReasoningTrace& trace);

// Decision-point feature vectors h_t for steps 2..T, with the session state
// at each point handed to `visit`.
template <typename Visit>
void replay_decision_points(const Backend& backend, const Query& query,
                            const ReasoningTrace& trace, Visit&& visit) {
  auto session = backend.begin(query, trace.seed);
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    if (i > 0) {
      visit(i, *session);
      if (trace.steps[i].op) session->apply_operator(*trace.steps[i].op);
    }
    session->generate_step();
  }
}

using QueryIndex = std::map<std::string, Query>;

}  // namespace ncots
