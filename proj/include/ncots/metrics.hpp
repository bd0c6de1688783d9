#pragma once

#include <array>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ncots/trace.hpp"

namespace ncots {

// (A/A0)^2 * (L0/L). Accuracy units cancel, so percent or fraction both work.
double efficiency_eta(double accuracy, double baseline_accuracy, double length,
                      double baseline_length);

struct RunMetrics {
  double accuracy = 0.0;
  double mean_length = 0.0;
  double baseline_accuracy = 0.0;
  double baseline_length = 0.0;
  double eta = 0.0;
  double delta_acc = 0.0;
  double delta_length_pct = 0.0;

  nlohmann::json to_json() const;
};

RunMetrics metrics_from(double accuracy, double length, double baseline_accuracy,
                        double baseline_length);

// Both runs must cover the same set of query ids; repeats per query may differ.
RunMetrics summarize_run(const std::vector<ReasoningTrace>& traces,
                         const std::vector<ReasoningTrace>& baseline);

// Multi-benchmark row: mean per-benchmark delta and mean per-benchmark eta.
struct AverageMetrics {
  double delta_acc = 0.0;
  double delta_length_pct = 0.0;
  double eta = 0.0;
};
AverageMetrics average_metrics(const std::vector<RunMetrics>& per_benchmark);

void write_metrics_csv(std::ostream& out, const std::vector<std::pair<std::string, RunMetrics>>& rows);

struct OperatorFrequency {
  std::string text;
  std::size_t count = 0;
  double percentage = 0.0;
};

// Share of decision points (steps 2..T) at which each operator was chosen,
// most frequent first.
std::vector<OperatorFrequency> operator_frequency(const std::vector<ReasoningTrace>& traces);

enum class ModeLabel { statement, reflection, summary, divergence };
inline constexpr std::array<ModeLabel, 4> kAllModes{ModeLabel::statement, ModeLabel::reflection,
                                                    ModeLabel::summary, ModeLabel::divergence};
const char* to_string(ModeLabel m);
ModeLabel mode_from_string(const std::string& s);

struct ModeCorrelation {
  std::vector<std::string> operators;                 // row labels, first-seen order
  std::vector<std::array<std::size_t, 4>> counts;     // columns in kAllModes order
  std::vector<std::array<double, 4>> probabilities;   // row-stochastic

  void write_csv(std::ostream& out) const;
};

ModeCorrelation mode_correlation(const std::vector<std::pair<std::string, ModeLabel>>& labeled);

// Rank correlation with average ranks for ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace ncots
