#include "ncots/heads.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ncots/rng.hpp"

namespace ncots {

using nlohmann::json;

std::vector<double> softmax(std::span<const double> logits, double temperature) {
  std::vector<double> p(logits.size());
  if (logits.empty()) return p;
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp((logits[i] - m) / temperature);
    z += p[i];
  }
  for (double& x : p) x /= z;
  return p;
}

PotentialHead PotentialHead::zeros(std::size_t num_operators, std::size_t dim, std::string set_name) {
  return PotentialHead{num_operators, dim, std::vector<double>(num_operators * dim, 0.0),
                       std::vector<double>(num_operators, 0.0), std::move(set_name)};
}

PotentialOutput potential_forward(const PotentialHead& head, std::span<const double> h) {
  if (h.size() != head.dim)
    throw DataError("potential head expects dim " + std::to_string(head.dim) + ", got " +
                    std::to_string(h.size()));
  PotentialOutput out;
  out.logits = head.bias;
  for (std::size_t o = 0; o < head.num_operators; ++o)
    for (std::size_t k = 0; k < head.dim; ++k) out.logits[o] += head.w(o, k) * h[k];
  out.probs = softmax(out.logits);
  return out;
}

double progress_forward(const ProgressHead& head, std::span<const double> h) {
  if (h.size() != head.dim())
    throw DataError("progress head expects dim " + std::to_string(head.dim()) + ", got " +
                    std::to_string(h.size()));
  double v = head.bias;
  for (std::size_t k = 0; k < h.size(); ++k) v += head.weights[k] * h[k];
  return v;
}

double kl_loss(std::span<const double> teacher, std::span<const double> student) {
  if (teacher.size() != student.size()) throw DataError("kl_loss: distribution size mismatch");
  double kl = 0.0;
  for (std::size_t i = 0; i < teacher.size(); ++i) {
    if (teacher[i] <= 0.0) continue;
    if (student[i] <= 0.0) return std::numeric_limits<double>::infinity();
    kl += teacher[i] * std::log(teacher[i] / student[i]);
  }
  // Rounding can push identical inputs a hair below zero.
  return std::max(kl, 0.0);
}

json TrainConfig::to_json() const {
  return json{{"learning_rate", learning_rate}, {"epochs", epochs}, {"batch_size", batch_size},
              {"seed", seed}, {"l2", l2}};
}

TrainConfig TrainConfig::from_json(const json& j) {
  TrainConfig c;
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.seed = j.value("seed", c.seed);
  c.l2 = j.value("l2", c.l2);
  if (!(c.learning_rate > 0.0) || c.batch_size == 0 || c.l2 < 0.0)
    throw DataError("invalid train config");
  return c;
}

double potential_loss(const PotentialHead& head, const TeacherSample& s) {
  return kl_loss(s.teacher_dist, potential_forward(head, s.features).probs);
}

PotentialHead potential_gradient(const PotentialHead& head, const TeacherSample& s) {
  const auto out = potential_forward(head, s.features);
  PotentialHead g = PotentialHead::zeros(head.num_operators, head.dim, head.operator_set_name);
  // d KL / d logit_o = p_o - t_o for a normalized teacher.
  for (std::size_t o = 0; o < head.num_operators; ++o) {
    const double delta = out.probs[o] - s.teacher_dist[o];
    g.bias[o] = delta;
    for (std::size_t k = 0; k < head.dim; ++k) g.w(o, k) = delta * s.features[k];
  }
  return g;
}

double progress_loss(const ProgressHead& head, const ProgressSample& s) {
  const double r = progress_forward(head, s.features) - s.label;
  return r * r;
}

ProgressHead progress_gradient(const ProgressHead& head, const ProgressSample& s) {
  const double r = progress_forward(head, s.features) - s.label;
  ProgressHead g = ProgressHead::zeros(head.dim());
  for (std::size_t k = 0; k < head.dim(); ++k) g.weights[k] = 2.0 * r * s.features[k];
  g.bias = 2.0 * r;
  return g;
}

double mean_potential_loss(const PotentialHead& head, const std::vector<TeacherSample>& data) {
  double total = 0.0;
  for (const auto& s : data) total += potential_loss(head, s);
  return data.empty() ? 0.0 : total / static_cast<double>(data.size());
}

double mean_progress_loss(const ProgressHead& head, const std::vector<ProgressSample>& data) {
  double total = 0.0;
  for (const auto& s : data) total += progress_loss(head, s);
  return data.empty() ? 0.0 : total / static_cast<double>(data.size());
}

namespace {

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(hash_keys({seed, epoch}));
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
  return idx;
}

}  // namespace

PotentialHead train_potential(const std::vector<TeacherSample>& data, PotentialHead head,
                              const TrainConfig& cfg, std::vector<double>* loss_curve) {
  if (data.empty()) throw DataError("train_potential: empty dataset");
  for (const auto& s : data)
    if (s.features.size() != head.dim || s.teacher_dist.size() != head.num_operators)
      throw DataError("train_potential: sample shape does not match head");

  if (loss_curve) loss_curve->push_back(mean_potential_loss(head, data));
  std::vector<double> gw(head.weights.size()), gb(head.bias.size());
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto order = epoch_order(data.size(), cfg.seed, epoch);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::fill(gw.begin(), gw.end(), 0.0);
      std::fill(gb.begin(), gb.end(), 0.0);
      for (std::size_t i = start; i < end; ++i) {
        const auto& s = data[order[i]];
        const auto probs = potential_forward(head, s.features).probs;
        for (std::size_t o = 0; o < head.num_operators; ++o) {
          const double delta = probs[o] - s.teacher_dist[o];
          gb[o] += delta;
          for (std::size_t k = 0; k < head.dim; ++k) gw[o * head.dim + k] += delta * s.features[k];
        }
      }
      const double scale = cfg.learning_rate / static_cast<double>(end - start);
      for (std::size_t i = 0; i < gw.size(); ++i)
        head.weights[i] -= scale * gw[i] + cfg.learning_rate * cfg.l2 * head.weights[i];
      for (std::size_t o = 0; o < gb.size(); ++o) head.bias[o] -= scale * gb[o];
    }
    if (loss_curve) loss_curve->push_back(mean_potential_loss(head, data));
  }
  return head;
}

ProgressHead progress_random_init(std::size_t dim, std::uint64_t seed) {
  Rng rng(hash_keys({seed, 0x70726f67ULL}));
  ProgressHead h = ProgressHead::zeros(dim);
  for (double& w : h.weights) w = 0.01 * rng.normal();
  return h;
}

ProgressHead train_progress(const std::vector<ProgressSample>& data, const TrainConfig& cfg,
                            std::vector<double>* loss_curve) {
  if (data.empty()) throw DataError("train_progress: empty dataset");
  const std::size_t dim = data.front().features.size();
  for (const auto& s : data)
    if (s.features.size() != dim) throw DataError("train_progress: inconsistent feature dim");

  ProgressHead head = progress_random_init(dim, cfg.seed);
  if (loss_curve) loss_curve->push_back(mean_progress_loss(head, data));
  std::vector<double> gw(dim);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto order = epoch_order(data.size(), cfg.seed, epoch);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::fill(gw.begin(), gw.end(), 0.0);
      double gb = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const auto& s = data[order[i]];
        const double r = 2.0 * (progress_forward(head, s.features) - s.label);
        gb += r;
        for (std::size_t k = 0; k < dim; ++k) gw[k] += r * s.features[k];
      }
      const double scale = cfg.learning_rate / static_cast<double>(end - start);
      for (std::size_t k = 0; k < dim; ++k)
        head.weights[k] -= scale * gw[k] + cfg.learning_rate * cfg.l2 * head.weights[k];
      head.bias -= scale * gb;
    }
    if (loss_curve) loss_curve->push_back(mean_progress_loss(head, data));
  }
  return head;
}

PotentialHead init_potential_from_embeddings(const std::vector<std::vector<double>>& rows,
                                             std::size_t expected_operators,
                                             std::string operator_set_name) {
  if (rows.size() != expected_operators || rows.empty())
    throw DataError("embedding rows (" + std::to_string(rows.size()) +
                    ") do not match operator count (" + std::to_string(expected_operators) + ")");
  const std::size_t dim = rows.front().size();
  PotentialHead head = PotentialHead::zeros(rows.size(), dim, std::move(operator_set_name));
  for (std::size_t o = 0; o < rows.size(); ++o) {
    if (rows[o].size() != dim) throw DataError("ragged embedding matrix");
    std::copy(rows[o].begin(), rows[o].end(), head.weights.begin() + o * dim);
  }
  return head;
}

json potential_to_json(const PotentialHead& head, std::uint64_t train_seed) {
  json rows = json::array();
  for (std::size_t o = 0; o < head.num_operators; ++o)
    rows.push_back(std::vector<double>(head.weights.begin() + o * head.dim,
                                       head.weights.begin() + (o + 1) * head.dim));
  return json{{"kind", "potential"}, {"dim", head.dim},
              {"operator_set_name", head.operator_set_name},
              {"weights", std::move(rows)}, {"bias", head.bias}, {"train_seed", train_seed}};
}

PotentialHead potential_from_json(const json& j) {
  if (j.at("kind") != "potential") throw DataError("checkpoint is not a potential head");
  const auto rows = j.at("weights").get<std::vector<std::vector<double>>>();
  auto head = init_potential_from_embeddings(rows, rows.size(),
                                             j.value("operator_set_name", std::string{}));
  if (head.dim != j.at("dim").get<std::size_t>()) throw DataError("checkpoint dim mismatch");
  head.bias = j.at("bias").get<std::vector<double>>();
  if (head.bias.size() != head.num_operators) throw DataError("checkpoint bias size mismatch");
  return head;
}

json progress_to_json(const ProgressHead& head, std::uint64_t train_seed) {
  return json{{"kind", "progress"}, {"dim", head.dim()}, {"weights", head.weights},
              {"bias", head.bias}, {"train_seed", train_seed}};
}

ProgressHead progress_from_json(const json& j) {
  if (j.at("kind") != "progress") throw DataError("checkpoint is not a progress head");
  ProgressHead head{j.at("weights").get<std::vector<double>>(), j.at("bias").get<double>()};
  if (head.dim() != j.at("dim").get<std::size_t>()) throw DataError("checkpoint dim mismatch");
  return head;
}

}  // namespace ncots
