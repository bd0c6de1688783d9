#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ncots/trace.hpp"

namespace ncots {

std::vector<double> softmax(std::span<const double> logits, double temperature = 1.0);

// Linear map from a decision-point feature vector to operator logits.
struct PotentialHead {
  std::size_t num_operators = 0;
  std::size_t dim = 0;
  std::vector<double> weights;  // row-major, num_operators x dim
  std::vector<double> bias;     // num_operators
  std::string operator_set_name;

  static PotentialHead zeros(std::size_t num_operators, std::size_t dim, std::string set_name);

  double& w(std::size_t op, std::size_t k) { return weights[op * dim + k]; }
  double w(std::size_t op, std::size_t k) const { return weights[op * dim + k]; }
};

struct ProgressHead {
  std::vector<double> weights;
  double bias = 0.0;

  std::size_t dim() const { return weights.size(); }
  static ProgressHead zeros(std::size_t dim) { return ProgressHead{std::vector<double>(dim, 0.0), 0.0}; }
};

struct PotentialOutput {
  std::vector<double> logits;
  std::vector<double> probs;
};

PotentialOutput potential_forward(const PotentialHead& head, std::span<const double> h);

// Raw affine output; callers clamp only for reporting.
double progress_forward(const ProgressHead& head, std::span<const double> h);
inline double clamp_progress(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

// D_KL(teacher || student). +inf when the student misses teacher support.
double kl_loss(std::span<const double> teacher, std::span<const double> student);

struct TeacherSample {
  FeatureVector features;
  std::vector<double> teacher_dist;
};

struct ProgressSample {
  FeatureVector features;
  double label = 0.0;
};

struct TrainConfig {
  double learning_rate = 1e-2;
  std::size_t epochs = 50;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  double l2 = 0.0;

  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

// Per-sample loss and its gradient with respect to head parameters. The
// gradient is returned in a head of the same shape.
double potential_loss(const PotentialHead& head, const TeacherSample& s);
PotentialHead potential_gradient(const PotentialHead& head, const TeacherSample& s);
double progress_loss(const ProgressHead& head, const ProgressSample& s);
ProgressHead progress_gradient(const ProgressHead& head, const ProgressSample& s);

double mean_potential_loss(const PotentialHead& head, const std::vector<TeacherSample>& data);
double mean_progress_loss(const ProgressHead& head, const std::vector<ProgressSample>& data);

// loss_curve, when given, receives the mean training loss before the first
// epoch and after every epoch.
PotentialHead train_potential(const std::vector<TeacherSample>& data, PotentialHead init,
                              const TrainConfig& cfg, std::vector<double>* loss_curve = nullptr);

// Starts from progress_random_init(dim, cfg.seed).
ProgressHead train_progress(const std::vector<ProgressSample>& data, const TrainConfig& cfg,
                            std::vector<double>* loss_curve = nullptr);

ProgressHead progress_random_init(std::size_t dim, std::uint64_t seed);

PotentialHead init_potential_from_embeddings(const std::vector<std::vector<double>>& rows,
                                             std::size_t expected_operators,
                                             std::string operator_set_name);

nlohmann::json potential_to_json(const PotentialHead& head, std::uint64_t train_seed);
PotentialHead potential_from_json(const nlohmann::json& j);
nlohmann::json progress_to_json(const ProgressHead& head, std::uint64_t train_seed);
ProgressHead progress_from_json(const nlohmann::json& j);

}  // namespace ncots
