#include "ncots/segmentation.hpp"

#include <cctype>
#include <iomanip>

namespace ncots {

std::vector<DecisionPoint> find_decision_points(const TokenSeq& tokens,
                                                const std::string& delimiter,
                                                bool substring_match) {
  std::vector<DecisionPoint> points;
  if (delimiter.empty()) return points;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const bool hit = tokens[i] == delimiter ||
                     (substring_match && tokens[i].find(delimiter) != std::string::npos);
    if (hit) points.push_back(DecisionPoint{points.size() + 2, i + 1});
  }
  return points;
}

std::vector<TokenSeq> split_steps(const TokenSeq& tokens, const std::string& delimiter) {
  std::vector<TokenSeq> steps(1);
  for (const auto& t : tokens) {
    if (t == delimiter)
      steps.emplace_back();
    else
      steps.back().push_back(t);
  }
  return steps;
}

TokenSeq join_steps(const std::vector<TokenSeq>& steps, const std::string& delimiter) {
  TokenSeq out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (i > 0) out.push_back(delimiter);
    out.insert(out.end(), steps[i].begin(), steps[i].end());
  }
  return out;
}

std::vector<BucketRule> default_bucket_rules() {
  return {
      {"x\n\n", [](const std::string& t) { return t.find("\n\n") != std::string::npos; }},
      {" ", [](const std::string& t) { return t == " "; }},
      {"other", [](const std::string&) { return true; }},
  };
}

std::string alphabetic_core(const std::string& token) {
  std::string core;
  for (unsigned char c : token)
    if (std::isalpha(c)) core.push_back(static_cast<char>(std::tolower(c)));
  return core;
}

PrecedingTokenDistribution preceding_token_distribution(const std::vector<ReasoningTrace>& traces,
                                                        const std::string& keyword,
                                                        const std::vector<BucketRule>& rules) {
  PrecedingTokenDistribution dist;
  dist.keyword = keyword;
  const std::string target = alphabetic_core(keyword);
  for (const auto& trace : traces) {
    const TokenSeq stream = flatten(trace);
    for (std::size_t i = 1; i < stream.size(); ++i) {
      if (alphabetic_core(stream[i]) != target) continue;
      for (const auto& rule : rules) {
        if (rule.matches(stream[i - 1])) {
          ++dist.buckets[rule.label].count;
          ++dist.occurrences;
          break;
        }
      }
    }
  }
  for (auto& [label, stat] : dist.buckets)
    stat.probability = static_cast<double>(stat.count) / static_cast<double>(dist.occurrences);
  return dist;
}

namespace {

std::string escape_label(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '\n')
      out += "\\n";
    else if (c == '"')
      out += "\"\"";
    else
      out.push_back(c);
  }
  return "\"" + out + "\"";
}

}  // namespace

void write_distribution_csv(std::ostream& out, const std::vector<PrecedingTokenDistribution>& dists,
                            bool header) {
  if (header) out << "keyword,bucket,probability,count\n";
  for (const auto& d : dists)
    for (const auto& [label, stat] : d.buckets)
      out << d.keyword << ',' << escape_label(label) << ',' << std::setprecision(17)
          << stat.probability << ',' << stat.count << '\n';
}

}  // namespace ncots
