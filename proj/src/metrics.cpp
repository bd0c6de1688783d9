#include "ncots/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <set>

namespace ncots {

using nlohmann::json;

double efficiency_eta(double accuracy, double baseline_accuracy, double length,
                      double baseline_length) {
  if (!(baseline_accuracy > 0.0)) throw DataError("eta: baseline accuracy must be positive");
  if (!(length > 0.0) || !(baseline_length > 0.0)) throw DataError("eta: lengths must be positive");
  const double gain = accuracy / baseline_accuracy;
  return gain * gain * (baseline_length / length);
}

json RunMetrics::to_json() const {
  return json{{"accuracy", accuracy},
              {"mean_length", mean_length},
              {"baseline_accuracy", baseline_accuracy},
              {"baseline_length", baseline_length},
              {"eta", eta},
              {"delta_acc", delta_acc},
              {"delta_length_pct", delta_length_pct}};
}

RunMetrics metrics_from(double accuracy, double length, double baseline_accuracy,
                        double baseline_length) {
  RunMetrics m;
  m.accuracy = accuracy;
  m.mean_length = length;
  m.baseline_accuracy = baseline_accuracy;
  m.baseline_length = baseline_length;
  m.eta = efficiency_eta(accuracy, baseline_accuracy, length, baseline_length);
  m.delta_acc = accuracy - baseline_accuracy;
  m.delta_length_pct = (length - baseline_length) / baseline_length * 100.0;
  return m;
}

namespace {

std::pair<double, double> accuracy_and_length(const std::vector<ReasoningTrace>& traces) {
  double correct = 0.0, tokens = 0.0;
  for (const auto& t : traces) {
    correct += t.correct ? 1.0 : 0.0;
    tokens += static_cast<double>(t.total_tokens);
  }
  const double n = static_cast<double>(traces.size());
  return {correct / n, tokens / n};
}

std::set<std::string> query_set(const std::vector<ReasoningTrace>& traces) {
  std::set<std::string> ids;
  for (const auto& t : traces) ids.insert(t.query_id);
  return ids;
}

}  // namespace

RunMetrics summarize_run(const std::vector<ReasoningTrace>& traces,
                         const std::vector<ReasoningTrace>& baseline) {
  if (traces.empty() || baseline.empty()) throw DataError("summarize_run: empty run");
  if (query_set(traces) != query_set(baseline))
    throw DataError("summarize_run: run and baseline cover different queries");
  const auto [a, l] = accuracy_and_length(traces);
  const auto [a0, l0] = accuracy_and_length(baseline);
  return metrics_from(a, l, a0, l0);
}

AverageMetrics average_metrics(const std::vector<RunMetrics>& rows) {
  AverageMetrics avg;
  if (rows.empty()) return avg;
  for (const auto& m : rows) {
    avg.delta_acc += m.delta_acc;
    avg.delta_length_pct += m.delta_length_pct;
    avg.eta += m.eta;
  }
  const double n = static_cast<double>(rows.size());
  avg.delta_acc /= n;
  avg.delta_length_pct /= n;
  avg.eta /= n;
  return avg;
}

void write_metrics_csv(std::ostream& out,
                       const std::vector<std::pair<std::string, RunMetrics>>& rows) {
  out << "method,Acc,Length,eta,dAcc,dLength%\n" << std::setprecision(17);
  for (const auto& [name, m] : rows)
    out << name << ',' << m.accuracy << ',' << m.mean_length << ',' << m.eta << ','
        << m.delta_acc << ',' << m.delta_length_pct << '\n';
}

std::vector<OperatorFrequency> operator_frequency(const std::vector<ReasoningTrace>& traces) {
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& t : traces)
    for (const auto& op : t.architecture()) {
      ++counts[op.text];
      ++total;
    }
  std::vector<OperatorFrequency> out;
  for (const auto& [text, c] : counts)
    out.push_back({text, c, 100.0 * static_cast<double>(c) / static_cast<double>(total)});
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.count > b.count; });
  return out;
}

const char* to_string(ModeLabel m) {
  switch (m) {
    case ModeLabel::statement: return "statement";
    case ModeLabel::reflection: return "reflection";
    case ModeLabel::summary: return "summary";
    case ModeLabel::divergence: return "divergence";
  }
  return "statement";
}

ModeLabel mode_from_string(const std::string& s) {
  for (auto m : kAllModes)
    if (s == to_string(m)) return m;
  throw DataError("unknown thinking mode: " + s);
}

ModeCorrelation mode_correlation(const std::vector<std::pair<std::string, ModeLabel>>& labeled) {
  ModeCorrelation mc;
  std::map<std::string, std::size_t> row_of;
  for (const auto& [op, mode] : labeled) {
    auto [it, inserted] = row_of.emplace(op, mc.operators.size());
    if (inserted) {
      mc.operators.push_back(op);
      mc.counts.push_back({});
    }
    ++mc.counts[it->second][static_cast<std::size_t>(mode)];
  }
  for (const auto& row : mc.counts) {
    const double total = static_cast<double>(std::accumulate(row.begin(), row.end(), std::size_t{0}));
    std::array<double, 4> p{};
    for (std::size_t m = 0; m < 4; ++m) p[m] = static_cast<double>(row[m]) / total;
    mc.probabilities.push_back(p);
  }
  return mc;
}

void ModeCorrelation::write_csv(std::ostream& out) const {
  out << "operator";
  for (auto m : kAllModes) out << ",p_" << to_string(m);
  for (auto m : kAllModes) out << ",n_" << to_string(m);
  out << '\n' << std::setprecision(17);
  for (std::size_t r = 0; r < operators.size(); ++r) {
    out << '"' << operators[r] << '"';
    for (double p : probabilities[r]) out << ',' << p;
    for (std::size_t c : counts[r]) out << ',' << c;
    out << '\n';
  }
}

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw DataError("spearman: need two equal series");
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    cov += (ra[i] - ma) * (rb[i] - mb);
    va += (ra[i] - ma) * (ra[i] - ma);
    vb += (rb[i] - mb) * (rb[i] - mb);
  }
  return cov / std::sqrt(va * vb);
}

}  // namespace ncots
