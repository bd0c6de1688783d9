#pragma once

#include <vector>

#include "ncots/backend.hpp"
#include "ncots/heads.hpp"

namespace ncots {

// One teacher sample per decision point (steps 2..T) of every trace.
std::vector<TeacherSample> build_teacher_dataset(const std::vector<ReasoningTrace>& traces,
                                                 const Backend& backend, const QueryIndex& queries,
                                                 const Planner& teacher,
                                                 const OperatorSet& operators);

// Token-level pairs (h_k, k/L), k = 1..L, for every trace that ended with an
// answer. Other traces are skipped and counted in *skipped.
std::vector<ProgressSample> build_progress_dataset(const std::vector<ReasoningTrace>& traces,
                                                   const Backend& backend,
                                                   const QueryIndex& queries,
                                                   std::size_t* skipped = nullptr);

struct ProgressEvaluation {
  std::vector<double> raw;
  std::vector<double> smoothed;
  std::vector<double> truth;  // k/L
  double mae = 0.0;           // smoothed vs truth
};

// Exponential smoothing with weight `smoothing` on the newest prediction.
std::vector<double> exponential_smoothing(const std::vector<double>& raw, double smoothing);

ProgressEvaluation evaluate_progress_series(const std::vector<double>& raw, double smoothing);

ProgressEvaluation evaluate_progress(const ProgressHead& head, const ReasoningTrace& trace,
                                     const Backend& backend, const Query& query,
                                     double smoothing = 0.1);

const Query& lookup_query(const QueryIndex& queries, const std::string& id);

}  // namespace ncots
