#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ncots/backend.hpp"

namespace ncots {

// Functional class of a step, mirroring the four thinking modes. The answer
// step is a statement that exhausts the remaining work.
enum class OpClass { statement, reflection, divergence, setup };

const char* to_string(OpClass c);
OpClass classify_operator(const std::string& text);

struct TokenRange {
  std::size_t lo = 1;
  std::size_t hi = 1;
};

struct EnvSpec {
  std::size_t feature_dim = 16;
  int work_min = 2;
  int work_max = 6;
  double error_inject_prob = 0.3;
  double fix_prob = 0.9;
  std::vector<double> branch_values{0.1, 0.4, 0.7, 0.95};
  std::vector<double> branch_weights{0.25, 0.25, 0.25, 0.25};
  TokenRange setup_tokens{40, 80};
  TokenRange statement_tokens{60, 120};
  TokenRange reflection_tokens{150, 250};
  TokenRange divergence_tokens{80, 140};
  double noise_sigma = 0.05;
  // 1-based index of a statement step that always injects an error; 0 = none.
  int forced_error_statement = 0;
  // Token-sampling parameters of the native model; they shape its own
  // operator choice and are unrelated to the search temperature.
  double sampling_temperature = 0.6;
  double top_p = 0.95;
  std::uint64_t embedding_seed = 7;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  static EnvSpec from_json(const nlohmann::json& j);
  void validate() const;

  const TokenRange& tokens_for(OpClass c) const;
};

// Latent state of one rollout.
struct EnvState {
  int work0 = 1;        // initial remaining work
  int remaining = 1;    // r
  bool error = false;   // e
  double quality = 0.7; // q
  std::size_t step = 0; // steps generated so far
  std::size_t tokens = 0;  // tokens emitted so far, delimiters included
  int statements = 0;
  bool done = false;
  std::uint64_t stream = 0;
  std::optional<std::size_t> pending;  // index into OperatorSet::full()
};

struct EnvQuery {
  std::string id;
  int work0 = 2;
  std::uint64_t seed = 0;

  Query to_query() const;
  static EnvQuery from_query(const Query& q);
  nlohmann::json to_json() const;
  static EnvQuery from_json(const nlohmann::json& j);
};

std::vector<EnvQuery> generate_queries(const EnvSpec& spec, std::size_t n);

class SyntheticEnv;

class SyntheticSession final : public Session {
 public:
  SyntheticSession(const SyntheticEnv& env, EnvState state) : env_(&env), state_(state) {}

  std::unique_ptr<Session> clone() const override;
  FeatureVector decision_features() const override;
  FeatureVector apply_operator(const Operator& op) override;
  StepOutput generate_step() override;
  std::vector<FeatureVector> step_token_features() const override;
  bool done() const override { return state_.done; }
  bool judge() const override { return state_.done && !state_.error; }

  const EnvState& state() const { return state_; }
  // Cheaper than generate_step when token strings are not needed.
  std::size_t advance();

 private:
  struct LastStep {
    EnvState entry;
    std::optional<std::size_t> op;
    OpClass cls = OpClass::setup;
    std::size_t tokens = 0;
  };

  const SyntheticEnv* env_;
  EnvState state_;
  LastStep last_{};
};

// Stand-in for a reasoning model: a small latent state machine whose
// features are a fixed linear embedding of that state.
class SyntheticEnv final : public Backend {
 public:
  static constexpr std::size_t kLatentDim = 14;
  static constexpr double kOperatorEmbeddingScale = 0.25;

  explicit SyntheticEnv(EnvSpec spec);

  std::size_t feature_dim() const override { return spec_.feature_dim; }
  std::unique_ptr<Session> begin(const Query& query, std::uint64_t stream_seed) const override;
  std::unique_ptr<SyntheticSession> begin_env(const EnvQuery& q, std::uint64_t stream_seed) const;

  const EnvSpec& spec() const { return spec_; }

  // Operator embedding rows (unit norm) for the given set, |set| x d.
  std::vector<std::vector<double>> operator_embeddings(const OperatorSet& set) const;

  // Latent encoding z of a state, optionally inside a step of class cls at
  // fractional position `within`; `position` is the absolute token index.
  std::array<double, kLatentDim> encode(const EnvState& s, std::optional<OpClass> cls,
                                        double within, std::size_t position) const;
  FeatureVector embed(const std::array<double, kLatentDim>& z, std::optional<std::size_t> op,
                      std::uint64_t noise_key) const;

  // Teacher preferences: reflection under an error, divergence on a weak
  // branch, statements otherwise.
  std::vector<double> teacher_logits(const EnvState& s, const OperatorSet& set) const;
  std::vector<double> teacher_policy(const EnvState& s, const OperatorSet& set) const;
  // Logits over the latent encoding alone; zero latent state gives zero logits.
  std::vector<double> teacher_logits_from_latent(const std::array<double, kLatentDim>& z,
                                                 const OperatorSet& set) const;

  // The model's own myopic operator distribution over the full set.
  std::vector<double> native_distribution(const EnvState& s) const;

 private:
  EnvSpec spec_;
  std::vector<double> latent_embedding_;   // d x kLatentDim
  std::vector<std::vector<double>> op_embedding_;  // full set, 16 x d
};

class EnvTeacher final : public Planner {
 public:
  explicit EnvTeacher(const SyntheticEnv& env) : env_(&env) {}
  std::vector<double> distribution(const Session& session,
                                   const OperatorSet& operators) const override;

 private:
  const SyntheticEnv* env_;
};

struct BruteForceResult {
  std::vector<Operator> sequence;
  double accuracy = 0.0;
  double expected_length = 0.0;
};

// Exhaustive search over operator sequences of length <= horizon. Every
// sequence is scored on the same n_eval rollout streams.
BruteForceResult brute_force_optimal(const SyntheticEnv& env, const EnvQuery& query,
                                     const OperatorSet& operators, std::size_t horizon,
                                     std::size_t n_eval, std::uint64_t seed);

}  // namespace ncots
