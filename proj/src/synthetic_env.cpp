#include "ncots/synthetic_env.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ncots/heads.hpp"
#include "ncots/rng.hpp"

namespace ncots {

using nlohmann::json;

namespace {

// Draw purposes, mixed into every hashed key.
enum : std::uint64_t {
  kKeyDecision = 0xD1,
  kKeyToken = 0x70,
  kKeyLength = 0x1E,
  kKeyError = 0xE1,
  kKeyFix = 0xF1,
  kKeyBranch = 0xB1,
  kKeyNative = 0x4A,
  kKeyInitialQuality = 0x90,
};

// Per-operator weights over the full set, in OperatorSet::full() order:
// The Thus Therefore So Then Let Wait Alternatively Now I First Option ** - \[ \ .
constexpr std::array<double, 16> kCleanWeight{1.0, 1.2, 1.1, 1.6, 1.5, 0.5, 1.5, 0.0,
                                                  0.9, 0.5, 0.3, 0.2, 0.2, 0.2, 0.2, 0.2};
constexpr std::array<double, 16> kQualityWeight{1, 1, 1, 1, 1, 0, 0, 0, 1, 1, 1, 0, 0, 0, 0, 0};
constexpr std::array<double, 16> kErrorWeight{-1, -1, -1, -1, -1, 0, 4.5, 0,
                                              -1, -1, -1, 0,  0,   0, 0,  0};
constexpr std::array<double, 16> kLowQualityWeight{0, 0, 0, 0, 0, 0, 0, 3.5,
                                                   0, 0, 0, 0, 0, 0, 0, 0};

// Latent layout.
enum LatentIndex : std::size_t {
  kProgress = 0,
  kProgressTarget,
  kRemaining,
  kError,
  kClean,
  kQuality,
  kLowQuality,
  kWithin,
  kClassStatement,
  kClassReflection,
  kClassDivergence,
  kClassSetup,
  kStepIndex,
  kPosition,
};

const OperatorSet& full_set() {
  static const OperatorSet set = OperatorSet::full();
  return set;
}

std::size_t full_index(const std::string& text) {
  const auto op = full_set().find(text);
  if (!op) throw DataError("synthetic environment has no operator \"" + text + "\"");
  return op->id;
}

double gaussian(std::uint64_t key, std::uint64_t k) {
  double u1 = hashed_uniform({key, k, 1});
  const double u2 = hashed_uniform({key, k, 2});
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t draw_length(const TokenRange& r, double u) {
  const std::size_t span = r.hi - r.lo + 1;
  return r.lo + std::min(span - 1, static_cast<std::size_t>(u * static_cast<double>(span)));
}

double draw_branch(const EnvSpec& spec, double u) {
  const double total = std::accumulate(spec.branch_weights.begin(), spec.branch_weights.end(), 0.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < spec.branch_values.size(); ++i) {
    acc += spec.branch_weights[i] / total;
    if (u < acc) return spec.branch_values[i];
  }
  return spec.branch_values.back();
}

const std::array<const char*, 10> kFiller{" we", " have", " x", " =", " 2", " +", " the",
                                          " value", " is", ","};

json range_json(const TokenRange& r) { return json::array({r.lo, r.hi}); }

TokenRange range_from(const json& j, const char* key, TokenRange fallback) {
  if (!j.contains(key)) return fallback;
  const auto v = j.at(key).get<std::vector<std::size_t>>();
  if (v.size() != 2) throw DataError(std::string("token range needs [lo, hi]: ") + key);
  return TokenRange{v[0], v[1]};
}

}  // namespace

const char* to_string(OpClass c) {
  switch (c) {
    case OpClass::statement: return "statement";
    case OpClass::reflection: return "reflection";
    case OpClass::divergence: return "divergence";
    case OpClass::setup: return "setup";
  }
  return "setup";
}

OpClass classify_operator(const std::string& text) {
  static const std::array<const char*, 8> statements{"The", "Thus", "Therefore", "So",
                                                     "Then", "Now", "First", "I"};
  for (const char* s : statements)
    if (text == s) return OpClass::statement;
  if (text == "Wait") return OpClass::reflection;
  if (text == "Alternatively") return OpClass::divergence;
  return OpClass::setup;
}

// ---------------------------------------------------------------------------
// EnvSpec

json EnvSpec::to_json() const {
  return json{{"feature_dim", feature_dim},
              {"work_init_range", json::array({work_min, work_max})},
              {"error_inject_prob", error_inject_prob},
              {"fix_prob", fix_prob},
              {"branch_values", branch_values},
              {"branch_weights", branch_weights},
              {"setup_tokens", range_json(setup_tokens)},
              {"statement_tokens", range_json(statement_tokens)},
              {"reflection_tokens", range_json(reflection_tokens)},
              {"divergence_tokens", range_json(divergence_tokens)},
              {"noise_sigma", noise_sigma},
              {"forced_error_statement", forced_error_statement},
              {"sampling_temperature", sampling_temperature},
              {"top_p", top_p},
              {"embedding_seed", embedding_seed},
              {"seed", seed}};
}

EnvSpec EnvSpec::from_json(const json& j) {
  EnvSpec s;
  s.feature_dim = j.value("feature_dim", s.feature_dim);
  if (j.contains("work_init_range")) {
    const auto r = j.at("work_init_range").get<std::vector<int>>();
    if (r.size() != 2) throw DataError("work_init_range needs [min, max]");
    s.work_min = r[0];
    s.work_max = r[1];
  }
  s.error_inject_prob = j.value("error_inject_prob", s.error_inject_prob);
  s.fix_prob = j.value("fix_prob", s.fix_prob);
  s.branch_values = j.value("branch_values", s.branch_values);
  s.branch_weights = j.value("branch_weights", s.branch_weights);
  s.setup_tokens = range_from(j, "setup_tokens", s.setup_tokens);
  s.statement_tokens = range_from(j, "statement_tokens", s.statement_tokens);
  s.reflection_tokens = range_from(j, "reflection_tokens", s.reflection_tokens);
  s.divergence_tokens = range_from(j, "divergence_tokens", s.divergence_tokens);
  s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
  s.forced_error_statement = j.value("forced_error_statement", s.forced_error_statement);
  s.sampling_temperature = j.value("sampling_temperature", s.sampling_temperature);
  s.top_p = j.value("top_p", s.top_p);
  s.embedding_seed = j.value("embedding_seed", s.embedding_seed);
  s.seed = j.value("seed", s.seed);
  s.validate();
  return s;
}

void EnvSpec::validate() const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (feature_dim == 0) throw DataError("feature_dim must be positive");
  if (work_min < 1 || work_max < work_min) throw DataError("invalid work_init_range");
  if (!prob(error_inject_prob) || !prob(fix_prob)) throw DataError("probabilities must be in [0,1]");
  if (branch_values.empty() || branch_values.size() != branch_weights.size())
    throw DataError("branch distribution malformed");
  double total = 0.0;
  for (std::size_t i = 0; i < branch_values.size(); ++i) {
    if (!prob(branch_values[i]) || branch_weights[i] < 0.0)
      throw DataError("branch distribution malformed");
    total += branch_weights[i];
  }
  if (std::abs(total - 1.0) > 1e-9) throw DataError("branch weights must sum to 1");
  for (const auto* r : {&setup_tokens, &statement_tokens, &reflection_tokens, &divergence_tokens})
    if (r->lo < 1 || r->hi < r->lo) throw DataError("token range must satisfy 1 <= lo <= hi");
  if (reflection_tokens.lo <= statement_tokens.hi)
    throw DataError("reflection steps must be strictly longer than statement steps");
  if (noise_sigma < 0.0) throw DataError("noise_sigma must be non-negative");
  if (!(sampling_temperature > 0.0) || !(top_p > 0.0) || top_p > 1.0)
    throw DataError("invalid sampling parameters");
}

const TokenRange& EnvSpec::tokens_for(OpClass c) const {
  switch (c) {
    case OpClass::statement: return statement_tokens;
    case OpClass::reflection: return reflection_tokens;
    case OpClass::divergence: return divergence_tokens;
    case OpClass::setup: return setup_tokens;
  }
  return setup_tokens;
}

// ---------------------------------------------------------------------------
// Queries

Query EnvQuery::to_query() const {
  return Query{id, {"Solve", " task", " " + id}, "work0=" + std::to_string(work0) +
                                                     ";seed=" + std::to_string(seed)};
}

EnvQuery EnvQuery::from_query(const Query& q) {
  EnvQuery e;
  e.id = q.id;
  std::istringstream in(q.answer_key);
  std::string part;
  bool have_work = false, have_seed = false;
  while (std::getline(in, part, ';')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) continue;
    const auto key = part.substr(0, eq);
    const auto val = part.substr(eq + 1);
    if (key == "work0") {
      e.work0 = std::stoi(val);
      have_work = true;
    } else if (key == "seed") {
      e.seed = std::stoull(val);
      have_seed = true;
    }
  }
  if (!have_work || !have_seed || e.work0 < 1)
    throw DataError("query " + q.id + " is not a synthetic-environment query");
  return e;
}

json EnvQuery::to_json() const { return json{{"id", id}, {"r0", work0}, {"seed", seed}}; }

EnvQuery EnvQuery::from_json(const json& j) {
  EnvQuery q{j.at("id").get<std::string>(), j.at("r0").get<int>(), j.at("seed").get<std::uint64_t>()};
  if (q.work0 < 1) throw DataError("query " + q.id + ": r0 must be >= 1");
  return q;
}

std::vector<EnvQuery> generate_queries(const EnvSpec& spec, std::size_t n) {
  std::vector<EnvQuery> out;
  out.reserve(n);
  const auto span = static_cast<std::uint64_t>(spec.work_max - spec.work_min + 1);
  for (std::size_t i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "q%05zu", i);
    const int work0 = spec.work_min + static_cast<int>(hash_keys({spec.seed, i, 0x57}) % span);
    out.push_back(EnvQuery{id, work0, hash_keys({spec.seed, i, 0x53})});
  }
  return out;
}

// ---------------------------------------------------------------------------
// SyntheticEnv

SyntheticEnv::SyntheticEnv(EnvSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  const std::size_t d = spec_.feature_dim;
  Rng rng(hash_keys({spec_.embedding_seed, 0xE4BEDULL}));
  latent_embedding_.resize(d * kLatentDim);
  for (double& a : latent_embedding_) a = 0.5 * rng.normal();
  op_embedding_.assign(full_set().size(), std::vector<double>(d));
  for (auto& row : op_embedding_) {
    double norm = 0.0;
    for (double& x : row) {
      x = rng.normal();
      norm += x * x;
    }
    norm = std::sqrt(norm);
    for (double& x : row) x /= norm;
  }
}

std::unique_ptr<SyntheticSession> SyntheticEnv::begin_env(const EnvQuery& q,
                                                          std::uint64_t stream_seed) const {
  EnvState s;
  s.work0 = q.work0;
  s.remaining = q.work0;
  s.stream = stream_seed;
  s.quality = draw_branch(spec_, hashed_uniform({stream_seed, kKeyInitialQuality}));
  return std::make_unique<SyntheticSession>(*this, s);
}

std::unique_ptr<Session> SyntheticEnv::begin(const Query& query, std::uint64_t stream_seed) const {
  return begin_env(EnvQuery::from_query(query), stream_seed);
}

std::vector<std::vector<double>> SyntheticEnv::operator_embeddings(const OperatorSet& set) const {
  std::vector<std::vector<double>> rows;
  for (const auto& op : set.operators()) rows.push_back(op_embedding_[full_index(op.text)]);
  return rows;
}

std::array<double, SyntheticEnv::kLatentDim> SyntheticEnv::encode(const EnvState& s,
                                                                  std::optional<OpClass> cls,
                                                                  double within,
                                                                  std::size_t position) const {
  std::array<double, kLatentDim> z{};
  const double stmt = cls == OpClass::statement ? 1.0 : 0.0;
  const double done_work = static_cast<double>(s.work0 - s.remaining);
  z[kProgress] = (done_work + within * stmt) / s.work0;
  z[kProgressTarget] = (done_work + stmt) / s.work0;
  z[kRemaining] = static_cast<double>(s.remaining) / spec_.work_max;
  z[kError] = s.error ? 1.0 : 0.0;
  z[kClean] = s.error ? 0.0 : 1.0;
  z[kQuality] = s.quality;
  z[kLowQuality] = 1.0 - s.quality;
  z[kWithin] = within;
  if (cls) z[kClassStatement + static_cast<std::size_t>(*cls)] = 1.0;
  z[kStepIndex] = static_cast<double>(s.step) / 50.0;
  z[kPosition] = static_cast<double>(position) / 1000.0;
  return z;
}

FeatureVector SyntheticEnv::embed(const std::array<double, kLatentDim>& z,
                                  std::optional<std::size_t> op, std::uint64_t noise_key) const {
  const std::size_t d = spec_.feature_dim;
  FeatureVector f(d, 0.0);
  for (std::size_t k = 0; k < d; ++k) {
    double v = 0.0;
    for (std::size_t j = 0; j < kLatentDim; ++j) v += latent_embedding_[k * kLatentDim + j] * z[j];
    if (op) v += kOperatorEmbeddingScale * op_embedding_[*op][k];
    if (spec_.noise_sigma > 0.0) v += spec_.noise_sigma * gaussian(noise_key, k);
    f[k] = v;
  }
  return f;
}

std::vector<double> SyntheticEnv::teacher_logits_from_latent(const std::array<double, kLatentDim>& z,
                                                             const OperatorSet& set) const {
  std::vector<double> logits;
  logits.reserve(set.size());
  for (const auto& op : set.operators()) {
    const std::size_t i = full_index(op.text);
    logits.push_back(kCleanWeight[i] * z[kClean] + kQualityWeight[i] * z[kQuality] +
                     kErrorWeight[i] * z[kError] + kLowQualityWeight[i] * z[kLowQuality]);
  }
  return logits;
}

std::vector<double> SyntheticEnv::teacher_logits(const EnvState& s, const OperatorSet& set) const {
  return teacher_logits_from_latent(encode(s, std::nullopt, 0.0, s.tokens), set);
}

std::vector<double> SyntheticEnv::teacher_policy(const EnvState& s, const OperatorSet& set) const {
  return softmax(teacher_logits(s, set));
}

std::vector<double> SyntheticEnv::native_distribution(const EnvState& s) const {
  std::vector<double> logits(full_set().size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    switch (classify_operator(full_set()[i].text)) {
      case OpClass::statement: logits[i] = kCleanWeight[i]; break;
      case OpClass::reflection: logits[i] = 1.8 + (s.error ? 0.5 : 0.0); break;
      case OpClass::divergence: logits[i] = 0.4; break;
      case OpClass::setup: logits[i] = kCleanWeight[i] + 0.1; break;
    }
  }
  auto p = softmax(logits, spec_.sampling_temperature);
  // Nucleus truncation.
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return p[a] > p[b]; });
  double cum = 0.0;
  std::size_t keep = 0;
  while (keep < order.size() && cum < spec_.top_p) cum += p[order[keep++]];
  for (std::size_t r = keep; r < order.size(); ++r) p[order[r]] = 0.0;
  for (double& x : p) x /= cum;
  return p;
}

// ---------------------------------------------------------------------------
// SyntheticSession

std::unique_ptr<Session> SyntheticSession::clone() const {
  return std::make_unique<SyntheticSession>(*this);
}

FeatureVector SyntheticSession::decision_features() const {
  return env_->embed(env_->encode(state_, std::nullopt, 0.0, state_.tokens + 1), std::nullopt,
                     hash_keys({state_.stream, state_.step, kKeyDecision}));
}

FeatureVector SyntheticSession::apply_operator(const Operator& op) {
  if (state_.done) throw DataError("apply_operator after the answer step");
  const std::size_t idx = full_index(op.text);
  state_.pending = idx;
  return env_->embed(env_->encode(state_, classify_operator(op.text), 0.0, state_.tokens + 2), idx,
                     hash_keys({state_.stream, state_.step, 0, kKeyToken}));
}

std::size_t SyntheticSession::advance() {
  if (state_.done) throw DataError("generate_step after the answer step");
  const EnvSpec& spec = env_->spec();
  LastStep last;
  last.entry = state_;
  if (state_.step == 0 && !state_.pending) {
    last.cls = OpClass::setup;
  } else {
    std::size_t op;
    if (state_.pending) {
      op = *state_.pending;
    } else {
      const auto p = env_->native_distribution(state_);
      const double u = hashed_uniform({state_.stream, state_.step, kKeyNative});
      double acc = 0.0;
      op = p.size() - 1;
      for (std::size_t i = 0; i < p.size(); ++i) {
        acc += p[i];
        if (u < acc && p[i] > 0.0) {
          op = i;
          break;
        }
      }
    }
    last.op = op;
    last.cls = classify_operator(full_set()[op].text);
  }
  last.tokens = draw_length(spec.tokens_for(last.cls),
                            hashed_uniform({state_.stream, state_.step, kKeyLength}));

  switch (last.cls) {
    case OpClass::statement: {
      ++state_.statements;
      const double u = hashed_uniform({state_.stream, state_.step, kKeyError});
      if (state_.statements == spec.forced_error_statement ||
          u < spec.error_inject_prob * (1.0 - state_.quality))
        state_.error = true;
      if (--state_.remaining <= 0) {
        state_.remaining = 0;
        state_.done = true;
      }
      break;
    }
    case OpClass::reflection:
      if (state_.error && hashed_uniform({state_.stream, state_.step, kKeyFix}) < spec.fix_prob)
        state_.error = false;
      break;
    case OpClass::divergence:
      state_.quality = draw_branch(spec, hashed_uniform({state_.stream, state_.step, kKeyBranch}));
      break;
    case OpClass::setup:
      break;
  }
  state_.tokens += (state_.step > 0 ? 1 : 0) + last.tokens;
  ++state_.step;
  state_.pending.reset();
  last_ = last;
  return last.tokens;
}

StepOutput SyntheticSession::generate_step() {
  const std::size_t n = advance();
  StepOutput out;
  out.tokens.reserve(n);
  if (last_.op) {
    out.operator_text = full_set()[*last_.op].text;
    out.tokens.push_back(*out.operator_text);
  }
  while (out.tokens.size() < n)
    out.tokens.emplace_back(kFiller[(out.tokens.size() * 7 + last_.entry.step) % kFiller.size()]);
  if (state_.done) out.tokens.back() = "\\boxed{}";
  out.done = state_.done;
  return out;
}

std::vector<FeatureVector> SyntheticSession::step_token_features() const {
  std::vector<FeatureVector> feats;
  feats.reserve(last_.tokens);
  const std::size_t start = last_.entry.tokens + (last_.entry.step > 0 ? 1 : 0);
  for (std::size_t j = 0; j < last_.tokens; ++j) {
    const double within = static_cast<double>(j) / static_cast<double>(last_.tokens);
    feats.push_back(env_->embed(env_->encode(last_.entry, last_.cls, within, start + j + 1), last_.op,
                                hash_keys({last_.entry.stream, last_.entry.step, j, kKeyToken})));
  }
  return feats;
}

std::vector<double> EnvTeacher::distribution(const Session& session,
                                             const OperatorSet& operators) const {
  const auto* s = dynamic_cast<const SyntheticSession*>(&session);
  if (!s) throw DataError("environment teacher needs a synthetic session");
  return env_->teacher_policy(s->state(), operators);
}

// ---------------------------------------------------------------------------
// Brute force

namespace {

struct Frontier {
  std::vector<SyntheticSession> sessions;
  std::vector<std::size_t> lengths;
};

struct BruteForceSearch {
  const OperatorSet& ops;
  std::size_t horizon;
  std::size_t best_correct = 0;
  std::size_t best_length = 0;
  bool have_best = false;
  std::vector<Operator> best;
  std::vector<Operator> prefix;

  void visit(const Frontier& f, std::size_t depth) {
    const bool all_done = std::all_of(f.sessions.begin(), f.sessions.end(),
                                      [](const auto& s) { return s.done(); });
    if (all_done || depth == horizon) {
      std::size_t correct = 0, length = 0;
      for (std::size_t i = 0; i < f.sessions.size(); ++i) {
        correct += f.sessions[i].judge() ? 1 : 0;
        length += f.lengths[i];
      }
      // Preorder visits sequences lexicographically, so ties keep the earlier one.
      if (!have_best || correct > best_correct ||
          (correct == best_correct && length < best_length)) {
        have_best = true;
        best_correct = correct;
        best_length = length;
        best = prefix;
      }
      return;
    }
    for (const auto& op : ops.operators()) {
      Frontier next = f;
      for (std::size_t i = 0; i < next.sessions.size(); ++i) {
        auto& s = next.sessions[i];
        if (s.done()) continue;
        s.apply_operator(op);
        next.lengths[i] += 1 + s.advance();
      }
      prefix.push_back(op);
      visit(next, depth + 1);
      prefix.pop_back();
    }
  }
};

}  // namespace

BruteForceResult brute_force_optimal(const SyntheticEnv& env, const EnvQuery& query,
                                     const OperatorSet& operators, std::size_t horizon,
                                     std::size_t n_eval, std::uint64_t seed) {
  constexpr double kMaxSequences = 16777216.0;  // 8^8
  if (std::pow(static_cast<double>(operators.size()), static_cast<double>(horizon)) > kMaxSequences)
    throw DataError("brute force refuses " + std::to_string(operators.size()) + "^" +
                    std::to_string(horizon) + " sequences (limit 8^8)");
  if (n_eval == 0) throw DataError("brute force needs n_eval >= 1");

  Frontier root;
  for (std::size_t i = 0; i < n_eval; ++i) {
    root.sessions.push_back(*env.begin_env(query, hash_keys({seed, i})));
    root.lengths.push_back(root.sessions.back().advance());
  }
  BruteForceSearch search{operators, horizon, 0, 0, false, {}, {}};
  search.visit(root, 0);
  const double n = static_cast<double>(n_eval);
  return BruteForceResult{search.best, static_cast<double>(search.best_correct) / n,
                          static_cast<double>(search.best_length) / n};
}

}  // namespace ncots
