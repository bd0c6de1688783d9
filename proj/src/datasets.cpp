#include "ncots/datasets.hpp"

#include <cmath>

namespace ncots {

const Query& lookup_query(const QueryIndex& queries, const std::string& id) {
  const auto it = queries.find(id);
  if (it == queries.end()) throw DataError("trace refers to unknown query " + id);
  return it->second;
}

std::vector<TeacherSample> build_teacher_dataset(const std::vector<ReasoningTrace>& traces,
                                                 const Backend& backend, const QueryIndex& queries,
                                                 const Planner& teacher,
                                                 const OperatorSet& operators) {
  std::vector<TeacherSample> data;
  for (const auto& trace : traces) {
    replay_decision_points(backend, lookup_query(queries, trace.query_id), trace,
                           [&](std::size_t, const Session& s) {
                             data.push_back({s.decision_features(),
                                             teacher.distribution(s, operators)});
                           });
  }
  return data;
}

std::vector<ProgressSample> build_progress_dataset(const std::vector<ReasoningTrace>& traces,
                                                   const Backend& backend,
                                                   const QueryIndex& queries,
                                                   std::size_t* skipped) {
  std::vector<ProgressSample> data;
  std::size_t skip = 0;
  for (const auto& trace : traces) {
    if (trace.terminated_by != Termination::answer) {
      ++skip;
      continue;
    }
    auto feats = replay_token_features(backend, lookup_query(queries, trace.query_id), trace);
    const double length = static_cast<double>(feats.size());
    for (std::size_t k = 0; k < feats.size(); ++k)
      data.push_back({std::move(feats[k]), static_cast<double>(k + 1) / length});
  }
  if (skipped) *skipped = skip;
  return data;
}

std::vector<double> exponential_smoothing(const std::vector<double>& raw, double smoothing) {
  if (!(smoothing > 0.0 && smoothing <= 1.0)) throw DataError("smoothing must be in (0, 1]");
  std::vector<double> out(raw.size());
  for (std::size_t k = 0; k < raw.size(); ++k)
    out[k] = k == 0 ? raw[0] : smoothing * raw[k] + (1.0 - smoothing) * out[k - 1];
  return out;
}

ProgressEvaluation evaluate_progress_series(const std::vector<double>& raw, double smoothing) {
  ProgressEvaluation ev;
  ev.raw = raw;
  ev.smoothed = exponential_smoothing(raw, smoothing);
  const double length = static_cast<double>(raw.size());
  double err = 0.0;
  for (std::size_t k = 0; k < raw.size(); ++k) {
    ev.truth.push_back(static_cast<double>(k + 1) / length);
    err += std::abs(ev.smoothed[k] - ev.truth[k]);
  }
  ev.mae = raw.empty() ? 0.0 : err / length;
  return ev;
}

ProgressEvaluation evaluate_progress(const ProgressHead& head, const ReasoningTrace& trace,
                                     const Backend& backend, const Query& query,
                                     double smoothing) {
  const auto feats = replay_token_features(backend, query, trace);
  std::vector<double> raw;
  raw.reserve(feats.size());
  for (const auto& f : feats) raw.push_back(progress_forward(head, f));
  return evaluate_progress_series(raw, smoothing);
}

}  // namespace ncots
