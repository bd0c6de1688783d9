// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.
//
//   acceptance <path-to-ncots-cli> [criterion numbers...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "ncots/datasets.hpp"
#include "ncots/explorer.hpp"
#include "ncots/metrics.hpp"
#include "ncots/pipeline.hpp"
#include "reference_tables.hpp"

namespace fs = std::filesystem;
using namespace ncots;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string g_cli;

// ---------------------------------------------------------------------------
// 1. Efficiency column reproduction.

Outcome c1_eta_reproduction() {
  double worst = 0.0;
  std::size_t checked = 0;
  std::string where;
  auto check = [&](double got, double printed, const std::string& label) {
    const double err = std::abs(got - printed);
    ++checked;
    if (err > worst) {
      worst = err;
      where = label;
    }
  };
  for (const auto& block : reference::kMainResults) {
    for (const auto& row : block.rows) {
      std::vector<RunMetrics> per;
      for (std::size_t b = 0; b < 4; ++b) {
        const auto& cell = row.cells[b];
        const auto& base = block.original().cells[b];
        const double eta = efficiency_eta(cell.acc, base.acc, cell.length, base.length);
        check(eta, cell.eta, std::string(block.model) + "/" + row.method + "/" + reference::kBenchmarks[b]);
        per.push_back(metrics_from(cell.acc, cell.length, base.acc, base.length));
      }
      check(average_metrics(per).eta, row.average_eta, std::string(block.model) + "/" + row.method + "/Average");
    }
  }
  const auto& base = reference::kAblation.front();
  for (const auto& row : reference::kAblation)
    check(efficiency_eta(row.acc, base.acc, row.length, base.length), row.eta,
          std::string("ablation/") + row.method);
  return {worst <= 0.005, fmt("%zu values, max |err| %.4f (%s)", checked, worst, where.c_str())};
}

// ---------------------------------------------------------------------------
// 2. Selection policy validity.

Outcome c2_policy_validity() {
  Rng rng(2);
  double worst_sum = 0.0, worst_shift = 0.0;
  std::size_t agree = 0;
  constexpr std::size_t kVectors = 10000;
  for (std::size_t t = 0; t < kVectors; ++t) {
    const std::size_t n = 2 + rng.below(15);
    std::vector<BranchScore> scores(n);
    for (std::size_t i = 0; i < n; ++i) scores[i] = {Operator{i, "o"}, 0, 0, (2 * rng.uniform() - 1) * 1e4};
    const double tau = std::pow(10.0, -3.0 + 4.0 * rng.uniform());
    const auto p = search_policy(scores, tau);
    double sum = 0.0;
    for (double v : p) sum += v;
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));

    const double shift = std::round((2 * rng.uniform() - 1) * 1e3);
    auto shifted = scores;
    for (auto& s : shifted) s.total += shift;
    const auto q = search_policy(shifted, tau);
    for (std::size_t i = 0; i < n; ++i) worst_shift = std::max(worst_shift, std::abs(p[i] - q[i]));

    Rng draw(hash_keys({t, 77}));
    const auto sel = select_operator(scores, 1e-6, SelectionMode::sample, draw);
    const auto best = select_operator(scores, 1.0, SelectionMode::argmax, draw);
    agree += sel.op.id == best.op.id ? 1 : 0;
  }
  const double freq = static_cast<double>(agree) / kVectors;
  const bool ok = worst_sum <= 1e-9 && worst_shift <= 1e-9 && freq >= 0.999;
  return {ok, fmt("max |sum-1| %.2e, max shift diff %.2e, argmax agreement %.4f", worst_sum,
                  worst_shift, freq)};
}

// ---------------------------------------------------------------------------
// 3. Loss gradients and KL sign.

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); }

Outcome c3_loss_correctness() {
  Rng rng(3);
  constexpr double h = 1e-4;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t ops = 2 + rng.below(5), dim = 1 + rng.below(6);
    PotentialHead head = PotentialHead::zeros(ops, dim, "fd");
    for (auto& w : head.weights) w = rng.normal();
    for (auto& b : head.bias) b = rng.normal();
    TeacherSample s;
    for (std::size_t k = 0; k < dim; ++k) s.features.push_back(rng.normal());
    std::vector<double> logits(ops);
    for (auto& l : logits) l = 2 * rng.normal();
    s.teacher_dist = softmax(logits);
    const auto g = potential_gradient(head, s);
    for (std::size_t i = 0; i < head.weights.size(); ++i) {
      auto hp = head, hm = head;
      hp.weights[i] += h;
      hm.weights[i] -= h;
      worst = std::max(worst, rel_err(g.weights[i], (potential_loss(hp, s) - potential_loss(hm, s)) / (2 * h)));
    }
    for (std::size_t i = 0; i < head.bias.size(); ++i) {
      auto hp = head, hm = head;
      hp.bias[i] += h;
      hm.bias[i] -= h;
      worst = std::max(worst, rel_err(g.bias[i], (potential_loss(hp, s) - potential_loss(hm, s)) / (2 * h)));
    }

    ProgressHead prog = ProgressHead::zeros(dim);
    for (auto& w : prog.weights) w = rng.normal();
    prog.bias = rng.normal();
    ProgressSample ps{s.features, rng.uniform()};
    const auto pg = progress_gradient(prog, ps);
    for (std::size_t i = 0; i < dim; ++i) {
      auto hp = prog, hm = prog;
      hp.weights[i] += h;
      hm.weights[i] -= h;
      worst = std::max(worst, rel_err(pg.weights[i], (progress_loss(hp, ps) - progress_loss(hm, ps)) / (2 * h)));
    }
    auto hp = prog, hm = prog;
    hp.bias += h;
    hm.bias -= h;
    worst = std::max(worst, rel_err(pg.bias, (progress_loss(hp, ps) - progress_loss(hm, ps)) / (2 * h)));
  }

  std::size_t kl_ok = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng.below(7);
    std::vector<double> a(n), b(n);
    for (auto& v : a) v = 2 * rng.normal();
    for (auto& v : b) v = 2 * rng.normal();
    const auto p = softmax(a), q = softmax(b);
    if (kl_loss(p, q) > 0.0 && kl_loss(p, p) == 0.0 && kl_loss(q, q) == 0.0) ++kl_ok;
  }
  return {worst <= 1e-5 && kl_ok == 100,
          fmt("max relative gradient error %.2e, KL sign/equality %zu/100", worst, kl_ok)};
}

// ---------------------------------------------------------------------------
// 4. Distillation on a linear-realizable teacher.

Outcome c4_distillation() {
  constexpr std::size_t d = 16, ops = 8;
  Rng rng(4);
  std::vector<double> w_star(ops * d), b_star(ops);
  for (auto& w : w_star) w = rng.normal();
  for (auto& b : b_star) b = 0.5 * rng.normal();
  auto make = [&](std::size_t n) {
    std::vector<TeacherSample> out;
    for (std::size_t i = 0; i < n; ++i) {
      TeacherSample s;
      for (std::size_t k = 0; k < d; ++k) s.features.push_back(rng.normal());
      std::vector<double> logits(ops);
      for (std::size_t o = 0; o < ops; ++o) {
        logits[o] = b_star[o];
        for (std::size_t k = 0; k < d; ++k) logits[o] += w_star[o * d + k] * s.features[k];
      }
      s.teacher_dist = softmax(logits);
      out.push_back(std::move(s));
    }
    return out;
  };
  const auto train = make(5000), held = make(1000);
  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  std::vector<double> curve;
  const auto head = train_potential(train, PotentialHead::zeros(ops, d, "random8"), cfg, &curve);
  std::size_t agree = 0;
  for (const auto& s : held) {
    const auto p = potential_forward(head, s.features).probs;
    const auto a = std::max_element(p.begin(), p.end()) - p.begin();
    const auto b = std::max_element(s.teacher_dist.begin(), s.teacher_dist.end()) - s.teacher_dist.begin();
    agree += a == b ? 1 : 0;
  }
  const double rate = static_cast<double>(agree) / held.size();
  return {rate >= 0.95, fmt("held-out argmax agreement %.3f (KL %.4f -> %.4f)", rate, curve.front(), curve.back())};
}

// ---------------------------------------------------------------------------
// Shared synthetic setup for 5, 7, 8 and 10.

struct Batch {
  EnvSpec spec;
  std::unique_ptr<SyntheticEnv> env;
  std::vector<EnvQuery> train, test;
  HeadTraining heads;
};

constexpr std::size_t kRepeats = 8;  // paired rollout streams per held-out query
constexpr std::size_t kThreads = 4;

Batch& batch() {
  static Batch b = [] {
    Batch x;
    x.spec.seed = 11;
    x.env = std::make_unique<SyntheticEnv>(x.spec);
    x.train = generate_queries(x.spec, 300);
    EnvSpec held = x.spec;
    held.seed = 12;
    x.test = generate_queries(held, 200);
    TrainConfig cfg;
    cfg.seed = 1;
    x.heads = train_heads(*x.env, x.train, OperatorSet::full(), cfg, cfg, kThreads);
    return x;
  }();
  return b;
}

// ---------------------------------------------------------------------------
// 5. Progress fidelity.

Outcome c5_progress() {
  auto& b = batch();
  const auto idx = index_queries(b.test);
  const auto traces = run_policy(PolicyKind::native, *b.env, b.test, SearchConfig{}, {}, 1, kThreads).traces;
  std::vector<double> pred, truth;
  std::vector<ProgressSample> perfect_train;
  std::size_t used = 0;
  for (const auto& t : traces) {
    if (t.terminated_by != Termination::answer) continue;
    ++used;
    const auto ev = evaluate_progress(b.heads.progress, t, *b.env, idx.at(t.query_id), 0.1);
    pred.insert(pred.end(), ev.raw.begin(), ev.raw.end());
    truth.insert(truth.end(), ev.truth.begin(), ev.truth.end());
  }
  const double rho = spearman(pred, truth);

  // Perfect-feature control: a head fitted on features that carry k/L
  // itself, evaluated through the same smoothing.
  const auto train_traces =
      run_policy(PolicyKind::native, *b.env, b.train, SearchConfig{}, {}, 1, kThreads).traces;
  for (const auto& t : train_traces) {
    if (t.terminated_by != Termination::answer) continue;
    const double L = static_cast<double>(t.total_tokens);
    for (std::size_t k = 1; k <= t.total_tokens; ++k)
      perfect_train.push_back({{static_cast<double>(k) / L}, static_cast<double>(k) / L});
  }
  const auto perfect = train_progress(perfect_train, TrainConfig{});
  double mae = 0.0;
  for (const auto& t : traces) {
    if (t.terminated_by != Termination::answer) continue;
    std::vector<double> raw;
    for (std::size_t k = 1; k <= t.total_tokens; ++k) {
      const double x = static_cast<double>(k) / static_cast<double>(t.total_tokens);
      raw.push_back(progress_forward(perfect, std::vector<double>{x}));
    }
    mae += evaluate_progress_series(raw, 0.1).mae;
  }
  mae /= static_cast<double>(used);
  return {used >= 1 && rho > 0.9 && mae < 0.05,
          fmt("%zu held-out traces, Spearman %.4f, perfect-feature smoothed MAE %.4f", used, rho, mae)};
}

// ---------------------------------------------------------------------------
// 6. Search vs brute force on deterministic instances.

EnvSpec deterministic_spec(int forced_error) {
  EnvSpec s;
  s.noise_sigma = 0.0;
  s.error_inject_prob = 0.0;
  s.fix_prob = 1.0;
  s.branch_values = {0.9};
  s.branch_weights = {1.0};
  s.setup_tokens = {50, 50};
  s.statement_tokens = {80, 80};
  s.reflection_tokens = {200, 200};
  s.divergence_tokens = {120, 120};
  s.work_min = 1;
  s.work_max = 3;
  s.forced_error_statement = forced_error;
  return s;
}

Outcome c6_oracle_equivalence() {
  constexpr std::size_t kHorizon = 4;
  const OperatorSet ops = OperatorSet::random8();
  std::vector<std::unique_ptr<SyntheticEnv>> envs;
  for (int f = 0; f <= 2; ++f) envs.push_back(std::make_unique<SyntheticEnv>(deterministic_spec(f)));

  // Heads trained on original-model traces pooled over the three variants;
  // they share the embedding so one head serves all of them.
  std::vector<TeacherSample> teacher_data;
  std::vector<ProgressSample> progress_data;
  for (std::size_t v = 0; v < envs.size(); ++v) {
    EnvSpec s = envs[v]->spec();
    s.seed = 100 + v;
    const auto qs = generate_queries(s, 200);
    const auto idx = index_queries(qs);
    const auto traces = run_policy(PolicyKind::native, *envs[v], qs, SearchConfig{}, {}, 1, kThreads).traces;
    const EnvTeacher teacher(*envs[v]);
    auto td = build_teacher_dataset(traces, *envs[v], idx, teacher, ops);
    teacher_data.insert(teacher_data.end(), td.begin(), td.end());
    auto pd = build_progress_dataset(traces, *envs[v], idx);
    progress_data.insert(progress_data.end(), pd.begin(), pd.end());
  }
  const auto pot = train_potential(
      teacher_data, init_potential_from_embeddings(envs[0]->operator_embeddings(ops), ops.size(), ops.name()),
      TrainConfig{});
  const auto prog = train_progress(progress_data, TrainConfig{});

  SearchConfig cfg;
  cfg.operators = ops;
  cfg.sampling = SelectionMode::argmax;
  cfg.budgets.step_budget = kHorizon + 1;  // the first step is not a decision

  std::size_t matched = 0, length_ok = 0;
  std::string first_miss;
  for (std::size_t i = 0; i < 50; ++i) {
    const auto& env = *envs[(i / 3) % 3];
    const EnvQuery q{fmt("det%02zu", i), static_cast<int>(1 + i % 3), hash_keys({6, i})};
    const auto bf = brute_force_optimal(env, q, ops, kHorizon, 2, hash_keys({66, i}));
    const auto t = run_search(q.to_query(), env, &pot, &prog, cfg, rollout_stream(q, 0));
    const double acc = t.correct ? 1.0 : 0.0;
    const double mean_step = static_cast<double>(t.total_tokens) / static_cast<double>(t.steps.size());
    if (acc == bf.accuracy) ++matched;
    else if (first_miss.empty()) first_miss = q.id;
    if (static_cast<double>(t.total_tokens) <= bf.expected_length + mean_step) ++length_ok;
  }
  return {matched >= 45 && length_ok == 50,
          fmt("accuracy matches %zu/50, length within one step %zu/50%s%s", matched, length_ok,
              first_miss.empty() ? "" : ", first miss ", first_miss.c_str())};
}

// ---------------------------------------------------------------------------
// 7 and 8. End-to-end gain and ablation ordering.

struct EndToEnd {
  RunMetrics full, no_progress, no_potential, random;
  bool computed = false;
};

EndToEnd& end_to_end() {
  static EndToEnd e;
  if (e.computed) return e;
  auto& b = batch();
  SearchConfig cfg;
  cfg.seed = 5;
  const PolicyInputs in{&b.heads.potential, &b.heads.progress};
  const auto native = run_policy(PolicyKind::native, *b.env, b.test, cfg, {}, kRepeats, kThreads).traces;
  auto eval = [&](PolicyKind k, const SearchConfig& c, const PolicyInputs& i) {
    return summarize_run(run_policy(k, *b.env, b.test, c, i, kRepeats, kThreads).traces, native);
  };
  e.full = eval(PolicyKind::ncots, cfg, in);
  SearchConfig a = cfg;
  a.use_progress = false;
  e.no_progress = eval(PolicyKind::ncots, a, in);
  SearchConfig c = cfg;
  c.use_potential = false;
  e.no_potential = eval(PolicyKind::ncots, c, in);
  SearchConfig r = cfg;
  r.operators = OperatorSet::random8();
  e.random = eval(PolicyKind::random, r, {});
  e.computed = true;
  return e;
}

Outcome c7_pareto() {
  const auto& e = end_to_end();
  const double d_acc = e.full.accuracy - e.random.accuracy;
  const double d_len = e.full.mean_length - e.random.mean_length;
  return {d_acc >= 0.0 && d_len <= 0.0 && e.full.eta > 1.1,
          fmt("vs random: dAcc %+.4f, dLength %+.1f; eta vs original %.3f (acc %.3f/%.3f, len %.1f/%.1f)",
              d_acc, d_len, e.full.eta, e.full.accuracy, e.full.baseline_accuracy, e.full.mean_length,
              e.full.baseline_length)};
}

Outcome c8_ablation() {
  const auto& e = end_to_end();
  return {e.full.eta > e.no_progress.eta && e.full.eta > e.no_potential.eta,
          fmt("eta full %.3f, w/o progress %.3f, w/o potential %.3f", e.full.eta, e.no_progress.eta,
              e.no_potential.eta)};
}

// ---------------------------------------------------------------------------
// 9. Monte Carlo aggregation vs exact enumeration.

Outcome c9_aggregation() {
  Rng rng(9);
  double worst = 0.0;
  std::size_t fixtures = 0;
  for (std::size_t n = 1; n <= 6; ++n)
    for (std::size_t k = 1; std::pow(k, n) <= 64; ++k) {
      PathMatrix pm;
      for (std::size_t i = 0; i < n; ++i) {
        pm.query_ids.push_back(fmt("q%zu", i));
        std::vector<PathEntry> row;
        for (std::size_t j = 0; j < k; ++j) row.push_back({100 + rng.below(900), rng.uniform() < 0.5});
        pm.paths.push_back(row);
      }
      const auto mc = monte_carlo_aggregate(pm, 100000, DensityBins{}, 90 + fixtures, std::nullopt, true);
      worst = std::max(worst, total_variation(mc.point_distribution(), exact_aggregate(pm)));
      ++fixtures;
    }

  // N=2, K=2: four equally likely combinations.
  PathMatrix two;
  two.query_ids = {"a", "b"};
  two.paths = {{{100, true}, {300, false}}, {{200, true}, {500, false}}};
  const std::set<std::pair<double, double>> expected{{150, 1.0}, {300, 0.5}, {250, 0.5}, {400, 0.0}};
  const auto exact = exact_aggregate(two);
  std::set<std::pair<double, double>> got_exact, got_mc;
  bool quarter = true;
  for (const auto& p : exact) {
    got_exact.insert({p.mean_length, p.mean_accuracy});
    quarter = quarter && p.probability == 0.25;
  }
  for (const auto& p : monte_carlo_aggregate(two, 100000, DensityBins{}, 1, std::nullopt, true).point_distribution())
    got_mc.insert({p.mean_length, p.mean_accuracy});
  const bool fixture_ok = got_exact == expected && got_mc == expected && quarter;
  return {worst < 0.02 && fixture_ok,
          fmt("%zu fixtures with K^N <= 64, max TV %.4f; N=2,K=2 fixture %s", fixtures, worst,
              fixture_ok ? "reproduced" : "MISMATCH")};
}

// ---------------------------------------------------------------------------
// 10. Hybrid guidance.

Outcome c10_hybrid() {
  auto& b = batch();
  SearchConfig cfg;
  const EnvTeacher teacher(*b.env);
  const auto alone = run_policy(PolicyKind::native, *b.env, b.test, cfg, {}, 1, kThreads).traces;
  const auto hy = run_policy(PolicyKind::hybrid, *b.env, b.test, cfg, PolicyInputs{nullptr, nullptr, &teacher}, 1, kThreads);
  const auto m = summarize_run(hy.traces, alone);
  double gf = 0.0;
  for (double g : hy.guiding_fractions) gf += g;
  gf /= static_cast<double>(hy.guiding_fractions.size());
  return {m.accuracy >= m.baseline_accuracy && gf < 0.10,
          fmt("accuracy hybrid %.3f vs executor alone %.3f, mean guiding fraction %.4f", m.accuracy,
              m.baseline_accuracy, gf)};
}

// ---------------------------------------------------------------------------
// 11. CLI determinism across thread counts, trace round-trip.

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool run_cli(const std::string& args) {
  const std::string cmd = "\"" + g_cli + "\" " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str()) == 0;
}

Outcome c11_determinism() {
  if (g_cli.empty()) return {false, "no CLI path given"};
  const fs::path root = fs::temp_directory_path() / fmt("ncots_accept_%d", static_cast<int>(::getpid()));
  fs::remove_all(root);
  std::vector<fs::path> dirs;
  bool ran = true;
  for (int threads : {1, 4, 1}) {
    dirs.push_back(root / fmt("run%zu_t%d", dirs.size(), threads));
    fs::create_directories(dirs.back());
    const std::string d = dirs.back().string(), t = " --threads " + std::to_string(threads) + " --seed 21";
    const std::string env = " --env " + d + "/env.json --queries " + d + "/queries.jsonl";
    const std::string labels = (root / "labels.jsonl").string();
    std::ofstream(labels) << "{\"operator\":\"Wait\",\"mode\":\"reflection\"}\n"
                             "{\"operator\":\"So\",\"mode\":\"statement\"}\n"
                             "{\"operator\":\"So\",\"mode\":\"summary\"}\n"
                             "{\"operator\":\"Alternatively\",\"mode\":\"divergence\"}\n";
    const std::vector<std::string> steps{
        "--out " + d + t + " gen-env --n-queries 24",
        "--out " + d + t + " train" + env,
        "--out " + d + "/orig" + t + " search --original --repeats 2" + env,
        "--out " + d + t + " search --repeats 2 --diagnostics --potential " + d + "/potential.json --progress " + d +
            "/progress.json" + env,
        "--out " + d + "/random" + t + " random --repeats 4" + env,
        "--out " + d + "/hybrid" + t + " hybrid" + env,
        "--out " + d + t + " aggregate --iterations 20000 --paths " + d + "/random/path_matrix.jsonl --baseline " + d +
            "/orig/traces.jsonl",
        "--out " + d + t + " metrics --run ncots=" + d + "/traces.jsonl --run random=" + d +
            "/random/traces.jsonl --baseline " + d + "/orig/traces.jsonl",
        "--out " + d + "/ops" + t + " analyze --kind operators --traces " + d + "/traces.jsonl",
        "--out " + d + "/pre" + t + " analyze --kind preceding --traces " + d + "/random/traces.jsonl",
        "--out " + d + "/modes" + t + " analyze --kind modes --labels " + labels,
        "--out " + d + "/prog" + t + " analyze --kind progress --traces " + d + "/orig/traces.jsonl --progress " + d +
            "/progress.json" + env,
    };
    for (const auto& s : steps) ran = ran && run_cli(s);
  }
  if (!ran) return {false, "a CLI pipeline exited nonzero"};

  std::size_t files = 0;
  std::string differs;
  for (const auto& entry : fs::recursive_directory_iterator(dirs[0])) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), dirs[0]);
    if (rel.filename().string().find(".manifest.json") != std::string::npos) continue;
    ++files;
    const std::string a = slurp(entry.path());
    for (std::size_t i = 1; i < dirs.size(); ++i) {
      if (slurp(dirs[i] / rel) != a && differs.empty()) differs = rel.string();
    }
  }

  // Trace JSONL round-trip on the produced traces.
  const auto traces = read_traces(dirs[0] / "traces.jsonl", OperatorSet::full());
  const fs::path copy = root / "roundtrip.jsonl";
  write_traces(copy, traces);
  const bool round = read_traces(copy, OperatorSet::full()) == traces &&
                     slurp(copy) == slurp(dirs[0] / "traces.jsonl");
  fs::remove_all(root);
  return {differs.empty() && files >= 20 && round,
          fmt("%zu artifacts byte-identical across --threads 1/4/1%s%s; trace round-trip %s", files,
              differs.empty() ? "" : ", differs: ", differs.c_str(), round ? "lossless" : "LOSSY")};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_cli = argv[1];
  std::set<int> only;
  for (int i = 2; i < argc; ++i) only.insert(std::atoi(argv[i]));

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"eta reproduction on reference rows", c1_eta_reproduction},
      {"selection policy validity", c2_policy_validity},
      {"loss gradients and KL", c3_loss_correctness},
      {"distillation fidelity", c4_distillation},
      {"progress fidelity", c5_progress},
      {"oracle equivalence (search vs brute force)", c6_oracle_equivalence},
      {"end-to-end Pareto gain", c7_pareto},
      {"ablation ordering", c8_ablation},
      {"Monte Carlo aggregation oracle", c9_aggregation},
      {"hybrid guidance", c10_hybrid},
      {"CLI determinism and trace round-trip", c11_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %2d %s: %s (%.2fs)\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
