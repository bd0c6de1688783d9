#include "ncots/trace.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace ncots {

using nlohmann::json;

OperatorSet::OperatorSet(std::string name, const std::vector<std::string>& tokens)
    : name_(std::move(name)) {
  std::set<std::string> seen;
  for (const auto& t : tokens) {
    if (t.empty()) throw DataError("operator text must be non-empty");
    if (!seen.insert(t).second) throw DataError("duplicate operator text: " + t);
    operators_.push_back(Operator{operators_.size(), t});
  }
}

OperatorSet OperatorSet::full() {
  return OperatorSet("full", {"The", "Thus", "Therefore", "So", "Then", "Let", "Wait",
                              "Alternatively", "Now", "I", "First", "Option", "**", "-", "\\[",
                              "\\"});
}

OperatorSet OperatorSet::random8() {
  return OperatorSet("random8",
                     {"The", "Thus", "Therefore", "So", "Then", "Let", "Wait", "Alternatively"});
}

OperatorSet OperatorSet::by_name(const std::string& name) {
  if (name == "full") return full();
  if (name == "random8") return random8();
  throw DataError("unknown operator set: " + name);
}

std::optional<Operator> OperatorSet::find(const std::string& text) const {
  for (const auto& op : operators_)
    if (op.text == text) return op;
  return std::nullopt;
}

std::vector<std::string> OperatorSet::tokens() const {
  std::vector<std::string> out;
  out.reserve(operators_.size());
  for (const auto& op : operators_) out.push_back(op.text);
  return out;
}

json OperatorSet::to_json() const { return json{{"name", name_}, {"tokens", tokens()}}; }

OperatorSet OperatorSet::from_json(const json& j) {
  return OperatorSet(j.at("name").get<std::string>(), j.at("tokens").get<std::vector<std::string>>());
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::answer: return "answer";
    case Termination::step_budget: return "step_budget";
    case Termination::token_budget: return "token_budget";
  }
  return "answer";
}

Termination termination_from_string(const std::string& s) {
  if (s == "answer") return Termination::answer;
  if (s == "step_budget") return Termination::step_budget;
  if (s == "token_budget") return Termination::token_budget;
  throw DataError("unknown terminated_by value: " + s);
}

std::vector<Operator> ReasoningTrace::architecture() const {
  std::vector<Operator> ops;
  for (std::size_t i = 1; i < steps.size(); ++i)
    if (steps[i].op) ops.push_back(*steps[i].op);
  return ops;
}

std::size_t count_trace_tokens(const std::vector<ReasoningStep>& steps) {
  std::size_t n = steps.empty() ? 0 : steps.size() - 1;
  for (const auto& s : steps) n += s.token_count();
  return n;
}

TokenSeq flatten(const ReasoningTrace& trace, const std::string& delimiter) {
  TokenSeq out;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    if (i > 0) out.push_back(delimiter);
    out.insert(out.end(), trace.steps[i].tokens.begin(), trace.steps[i].tokens.end());
  }
  return out;
}

namespace {

bool all_finite(const FeatureVector& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

std::vector<std::string> validate_trace(const ReasoningTrace& trace, const Budgets& budgets,
                                        const OperatorSet* operators) {
  std::vector<std::string> v;
  if (trace.steps.empty()) {
    v.emplace_back("steps empty");
    return v;
  }
  if (trace.steps.size() > budgets.step_budget) v.emplace_back("step budget exceeded");
  if (trace.total_tokens > budgets.token_budget) v.emplace_back("token budget exceeded");
  if (trace.total_tokens < count_trace_tokens(trace.steps))
    v.emplace_back("total_tokens below sum of step tokens");
  if (trace.steps.front().op) v.emplace_back("first step carries an operator");

  std::optional<std::size_t> dim;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& s = trace.steps[i];
    const std::string where = "step " + std::to_string(i + 1) + ": ";
    if (s.op) {
      if (s.tokens.empty() || s.tokens.front() != s.op->text)
        v.push_back(where + "tokens do not begin with operator text");
      if (operators && (s.op->id >= operators->size() || (*operators)[s.op->id] != *s.op))
        v.push_back(where + "operator not in operator set");
    }
    for (const auto* f : {&s.entry_features, &s.lookahead_features}) {
      if (!*f) continue;
      if ((*f)->empty() || !all_finite(**f)) v.push_back(where + "non-finite or empty features");
      if (dim && (*f)->size() != *dim) v.push_back(where + "feature dimension changes");
      dim = (*f)->size();
    }
  }
  return v;
}

namespace {

json optional_features(const std::optional<FeatureVector>& f) {
  return f ? json(*f) : json(nullptr);
}

std::optional<FeatureVector> features_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<FeatureVector>();
}

}  // namespace

json trace_to_json(const ReasoningTrace& trace) {
  json steps = json::array();
  for (const auto& s : trace.steps) {
    steps.push_back(json{{"operator_id", s.op ? json(s.op->id) : json(nullptr)},
                         {"tokens", s.tokens},
                         {"entry_features", optional_features(s.entry_features)},
                         {"lookahead_features", optional_features(s.lookahead_features)}});
  }
  return json{{"query_id", trace.query_id},
              {"steps", std::move(steps)},
              {"total_tokens", trace.total_tokens},
              {"correct", trace.correct},
              {"terminated_by", to_string(trace.terminated_by)},
              {"policy_tag", trace.policy_tag},
              {"seed", trace.seed}};
}

ReasoningTrace trace_from_json(const json& j, const OperatorSet& operators) {
  ReasoningTrace t;
  t.query_id = j.at("query_id").get<std::string>();
  for (const auto& js : j.at("steps")) {
    ReasoningStep s;
    const auto& id = js.at("operator_id");
    if (!id.is_null()) {
      const auto op_id = id.get<std::size_t>();
      if (op_id >= operators.size())
        throw DataError("unknown operator id " + std::to_string(op_id));
      s.op = operators[op_id];
    }
    s.tokens = js.at("tokens").get<TokenSeq>();
    s.entry_features = features_from(js, "entry_features");
    s.lookahead_features = features_from(js, "lookahead_features");
    t.steps.push_back(std::move(s));
  }
  t.total_tokens = j.at("total_tokens").get<std::size_t>();
  t.correct = j.at("correct").get<bool>();
  t.terminated_by = termination_from_string(j.at("terminated_by").get<std::string>());
  t.policy_tag = j.at("policy_tag").get<std::string>();
  t.seed = j.at("seed").get<std::uint64_t>();
  return t;
}

std::size_t write_traces(const std::filesystem::path& path,
                         const std::vector<ReasoningTrace>& traces) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  for (const auto& t : traces) out << trace_to_json(t).dump() << '\n';
  if (!out) throw DataError("write failed: " + path.string());
  return traces.size();
}

std::vector<ReasoningTrace> read_traces(const std::filesystem::path& path,
                                        const OperatorSet& operators) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open for reading: " + path.string());
  std::vector<ReasoningTrace> traces;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      traces.push_back(trace_from_json(json::parse(line), operators));
    } catch (const json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": malformed trace: " +
                      e.what());
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return traces;
}

}  // namespace ncots
