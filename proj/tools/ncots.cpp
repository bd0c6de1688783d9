// ncots: command-line driver for the search, exploration and metrics pipelines.
//
// Every primary artifact is a pure function of (inputs, config, seed); the
// <command>.manifest.json written beside it is the only file that carries
// wall-clock information.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ncots/datasets.hpp"
#include "ncots/explorer.hpp"
#include "ncots/metrics.hpp"
#include "ncots/parallel.hpp"
#include "ncots/pipeline.hpp"
#include "ncots/segmentation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ncots;

namespace {

constexpr const char* kToolVersion = "ncots 1.0.0";

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::size_t threads = 1;
};

json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open for reading: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << text;
}

void write_json_file(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::vector<EnvQuery> read_queries(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open for reading: " + path.string());
  std::vector<EnvQuery> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(EnvQuery::from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

// Collects what a command read and wrote, then writes the manifest.
class Manifest {
 public:
  Manifest(std::string command, const Globals& g)
      : command_(std::move(command)), globals_(g), start_(std::chrono::steady_clock::now()) {
    fs::create_directories(g.out);
  }

  fs::path output(const std::string& name) {
    outputs_.push_back(name);
    return fs::path(globals_.out) / name;
  }
  void input(const std::string& path) { inputs_.push_back(path); }
  void seed(const std::string& key, std::uint64_t v) { seeds_[key] = v; }

  void write() const {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json j{{"command", command_},
           {"config_paths", globals_.config.empty() ? json::array() : json::array({globals_.config})},
           {"seeds", seeds_},
           {"inputs", inputs_},
           {"outputs", outputs_},
           {"threads", globals_.threads},
           {"tool_version", kToolVersion},
           {"wall_clock_seconds", secs}};
    write_json_file(fs::path(globals_.out) / (command_ + ".manifest.json"), j);
  }

 private:
  std::string command_;
  Globals globals_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> inputs_, outputs_;
  json seeds_ = json::object();
};

json config_or_empty(const Globals& g) {
  return g.config.empty() ? json::object() : read_json_file(g.config);
}

// ---------------------------------------------------------------------------

struct GenEnvArgs {
  std::size_t n_queries = 200;
};

void cmd_gen_env(const Globals& g, const GenEnvArgs& a) {
  Manifest m("gen-env", g);
  EnvSpec spec = g.config.empty() ? EnvSpec{} : EnvSpec::from_json(read_json_file(g.config));
  if (g.seed) spec.seed = *g.seed;
  spec.validate();
  m.seed("env", spec.seed);
  const auto queries = generate_queries(spec, a.n_queries);
  write_json_file(m.output("env.json"), spec.to_json());
  std::string lines;
  for (const auto& q : queries) lines += q.to_json().dump() + "\n";
  write_text(m.output("queries.jsonl"), lines);
  m.write();
}

struct EnvInputs {
  std::string env = "env.json";
  std::string queries = "queries.jsonl";
};

SyntheticEnv load_env(Manifest& m, const EnvInputs& in) {
  m.input(in.env);
  return SyntheticEnv(EnvSpec::from_json(read_json_file(in.env)));
}

std::vector<EnvQuery> load_queries(Manifest& m, const EnvInputs& in) {
  m.input(in.queries);
  return read_queries(in.queries);
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  EnvInputs env;
  std::string heads = "both";
  std::string traces;
  std::string operator_set = "full";
};

void cmd_train(const Globals& g, const TrainArgs& a) {
  Manifest m("train", g);
  const json cfg_json = config_or_empty(g);
  TrainConfig pot_cfg, prog_cfg;
  if (cfg_json.contains("potential") || cfg_json.contains("progress")) {
    pot_cfg = TrainConfig::from_json(cfg_json.value("potential", json::object()));
    prog_cfg = TrainConfig::from_json(cfg_json.value("progress", json::object()));
  } else {
    pot_cfg = prog_cfg = TrainConfig::from_json(cfg_json);
  }
  if (g.seed) pot_cfg.seed = prog_cfg.seed = *g.seed;
  m.seed("potential", pot_cfg.seed);
  m.seed("progress", prog_cfg.seed);

  const auto env = load_env(m, a.env);
  const auto queries = load_queries(m, a.env);
  const auto index = index_queries(queries);
  const OperatorSet ops = OperatorSet::by_name(a.operator_set);

  std::vector<ReasoningTrace> traces;
  if (!a.traces.empty()) {
    m.input(a.traces);
    traces = read_traces(a.traces, OperatorSet::full());
  } else {
    traces = run_policy(PolicyKind::native, env, queries, SearchConfig{}, {}, 1, g.threads).traces;
    write_traces(m.output("train_traces.jsonl"), traces);
  }

  json report{{"traces", traces.size()}};
  if (a.heads == "potential" || a.heads == "both") {
    std::vector<double> curve;
    std::size_t samples = 0;
    const auto head = train_potential_head(env, traces, index, ops, pot_cfg, &curve, &samples);
    write_json_file(m.output("potential.json"), potential_to_json(head, pot_cfg.seed));
    report["potential"] = json{{"config", pot_cfg.to_json()},
                               {"samples", samples},
                               {"loss_curve", curve},
                               {"final_loss", curve.back()}};
  }
  if (a.heads == "progress" || a.heads == "both") {
    std::size_t skipped = 0;
    const auto data = build_progress_dataset(traces, env, index, &skipped);
    std::vector<double> curve;
    const auto head = train_progress(data, prog_cfg, &curve);
    write_json_file(m.output("progress.json"), progress_to_json(head, prog_cfg.seed));
    report["progress"] = json{{"config", prog_cfg.to_json()},
                              {"samples", data.size()},
                              {"skipped_traces", skipped},
                              {"loss_curve", curve},
                              {"final_loss", curve.back()}};
  }
  write_json_file(m.output("train_report.json"), report);
  m.write();
}

// ---------------------------------------------------------------------------

struct RolloutArgs {
  EnvInputs env;
  std::size_t repeats = 1;
  std::string potential;
  std::string progress;
  std::string operator_set;  // overrides the config's set when given
  bool original = false;
  bool diagnostics = false;
};

SearchConfig load_search_config(const Globals& g, Manifest& m, const RolloutArgs& a) {
  SearchConfig cfg = g.config.empty() ? SearchConfig{} : SearchConfig::from_json(read_json_file(g.config));
  if (g.seed) cfg.seed = *g.seed;
  if (!a.operator_set.empty()) cfg.operators = OperatorSet::by_name(a.operator_set);
  m.seed("policy", cfg.seed);
  return cfg;
}

void cmd_search(const Globals& g, const RolloutArgs& a) {
  Manifest m("search", g);
  const SearchConfig cfg = load_search_config(g, m, a);
  const auto env = load_env(m, a.env);
  const auto queries = load_queries(m, a.env);

  std::vector<ReasoningTrace> traces;
  if (a.original) {
    traces = run_policy(PolicyKind::native, env, queries, cfg, {}, a.repeats, g.threads).traces;
  } else {
    std::optional<PotentialHead> pot;
    std::optional<ProgressHead> prog;
    if (!a.potential.empty()) {
      m.input(a.potential);
      pot = potential_from_json(read_json_file(a.potential));
    }
    if (!a.progress.empty()) {
      m.input(a.progress);
      prog = progress_from_json(read_json_file(a.progress));
    }
    if (cfg.use_potential && !pot) throw DataError("use_potential is set but --potential is missing");
    if (cfg.use_progress && !prog) throw DataError("use_progress is set but --progress is missing");
    const PotentialHead* pp = pot ? &*pot : nullptr;
    const ProgressHead* gp = prog ? &*prog : nullptr;

    const std::size_t n = queries.size() * a.repeats;
    traces.resize(n);
    std::vector<std::vector<DecisionRecord>> records(a.diagnostics ? n : 0);
    parallel_for(n, g.threads, [&](std::size_t flat) {
      const auto& q = queries[flat / a.repeats];
      traces[flat] = run_search(q.to_query(), env, pp, gp, cfg, rollout_stream(q, flat % a.repeats),
                                a.diagnostics ? &records[flat] : nullptr);
    });
    if (a.diagnostics) {
      std::string lines;
      for (std::size_t i = 0; i < n; ++i)
        for (const auto& r : records[i]) {
          json j = r.to_json();
          j["query_id"] = traces[i].query_id;
          j["seed"] = traces[i].seed;
          lines += j.dump() + "\n";
        }
      write_text(m.output("decisions.jsonl"), lines);
    }
  }
  write_json_file(m.output("search_config.json"), cfg.to_json());
  write_traces(m.output("traces.jsonl"), traces);
  m.write();
}

void cmd_random(const Globals& g, RolloutArgs a) {
  Manifest m("random", g);
  if (a.operator_set.empty()) a.operator_set = "random8";
  const SearchConfig cfg = load_search_config(g, m, a);
  const auto env = load_env(m, a.env);
  const auto queries = load_queries(m, a.env);
  const auto pm = characterize(to_queries(queries), env, a.repeats, cfg.operators, cfg.budgets,
                               cfg.seed, g.threads, true);
  std::vector<ReasoningTrace> traces;
  for (const auto& row : pm.traces) traces.insert(traces.end(), row.begin(), row.end());
  write_traces(m.output("traces.jsonl"), traces);
  write_path_matrix(m.output("path_matrix.jsonl"), pm);
  m.write();
}

void cmd_hybrid(const Globals& g, const RolloutArgs& a) {
  Manifest m("hybrid", g);
  const SearchConfig cfg = load_search_config(g, m, a);
  const auto env = load_env(m, a.env);
  const auto queries = load_queries(m, a.env);
  const EnvTeacher teacher(env);
  const auto run = run_policy(PolicyKind::hybrid, env, queries, cfg, PolicyInputs{nullptr, nullptr, &teacher},
                              a.repeats, g.threads);
  write_traces(m.output("traces.jsonl"), run.traces);
  std::string lines;
  for (std::size_t i = 0; i < run.traces.size(); ++i)
    lines += json{{"query_id", run.traces[i].query_id},
                  {"seed", run.traces[i].seed},
                  {"total_tokens", run.traces[i].total_tokens},
                  {"guiding_fraction", run.guiding_fractions[i]}}
                 .dump() +
             "\n";
  write_text(m.output("guiding.jsonl"), lines);
  m.write();
}

// ---------------------------------------------------------------------------

struct AggregateArgs {
  std::string paths = "path_matrix.jsonl";
  std::size_t iterations = 100000;
  double length_width = 64.0;
  std::size_t accuracy_bins = 0;
  std::string baseline;  // trace JSONL of the original model
};

void cmd_aggregate(const Globals& g, AggregateArgs a) {
  Manifest m("aggregate", g);
  const json cfg = config_or_empty(g);
  a.iterations = cfg.value("iterations", a.iterations);
  a.length_width = cfg.value("length_bin_width", a.length_width);
  a.accuracy_bins = cfg.value("accuracy_bins", a.accuracy_bins);
  const std::uint64_t seed = g.seed.value_or(cfg.value("seed", std::uint64_t{0}));
  m.seed("monte_carlo", seed);

  m.input(a.paths);
  const auto pm = read_path_matrix(a.paths);
  std::optional<Baseline> base;
  if (!a.baseline.empty()) {
    m.input(a.baseline);
    const auto traces = read_traces(a.baseline, OperatorSet::full());
    const auto r = summarize_run(traces, traces);
    base = Baseline{r.mean_length, r.accuracy};
  }
  const auto grid = monte_carlo_aggregate(pm, a.iterations, DensityBins{a.length_width, a.accuracy_bins},
                                          seed, base);
  std::ostringstream csv;
  grid.write_csv(csv);
  write_text(m.output("density.csv"), csv.str());
  json side = grid.sidecar_json();
  side["iterations"] = a.iterations;
  side["seed"] = seed;
  write_json_file(m.output("density.json"), side);
  m.write();
}

struct MetricsArgs {
  std::vector<std::string> runs;  // name=path
  std::string baseline;
};

void cmd_metrics(const Globals& g, const MetricsArgs& a) {
  Manifest m("metrics", g);
  m.input(a.baseline);
  const auto base = read_traces(a.baseline, OperatorSet::full());
  std::vector<std::pair<std::string, RunMetrics>> rows;
  json j = json::object();
  for (const auto& spec : a.runs) {
    const auto eq = spec.find('=');
    const std::string name = eq == std::string::npos ? fs::path(spec).stem().string() : spec.substr(0, eq);
    const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
    m.input(path);
    const auto r = summarize_run(read_traces(path, OperatorSet::full()), base);
    rows.emplace_back(name, r);
    j[name] = r.to_json();
  }
  write_json_file(m.output("metrics.json"), j);
  std::ostringstream csv;
  write_metrics_csv(csv, rows);
  write_text(m.output("metrics.csv"), csv.str());
  m.write();
}

struct AnalyzeArgs {
  std::string kind = "operators";
  std::string traces;
  std::vector<std::string> keywords{"wait", "alternatively"};
  std::string labels;  // JSONL {operator, mode}
  std::string progress;
  EnvInputs env;
  double smoothing = 0.1;
};

void cmd_analyze(const Globals& g, const AnalyzeArgs& a) {
  Manifest m("analyze", g);
  std::ostringstream csv;
  csv << std::setprecision(17);
  if (a.kind == "operators") {
    m.input(a.traces);
    const auto freq = operator_frequency(read_traces(a.traces, OperatorSet::full()));
    csv << "operator,count,percentage\n";
    for (const auto& f : freq) csv << json(f.text).dump() << ',' << f.count << ',' << f.percentage << '\n';
    write_text(m.output("operator_frequency.csv"), csv.str());
  } else if (a.kind == "preceding") {
    m.input(a.traces);
    const auto traces = read_traces(a.traces, OperatorSet::full());
    std::vector<PrecedingTokenDistribution> dists;
    for (const auto& k : a.keywords) dists.push_back(preceding_token_distribution(traces, k));
    write_distribution_csv(csv, dists);
    write_text(m.output("preceding_tokens.csv"), csv.str());
  } else if (a.kind == "modes") {
    m.input(a.labels);
    std::ifstream in(a.labels, std::ios::binary);
    if (!in) throw DataError("cannot open for reading: " + a.labels);
    std::vector<std::pair<std::string, ModeLabel>> labeled;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      try {
        const auto j = json::parse(line);
        labeled.emplace_back(j.at("operator").get<std::string>(), mode_from_string(j.at("mode").get<std::string>()));
      } catch (const json::exception& e) {
        throw DataError(a.labels + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
    mode_correlation(labeled).write_csv(csv);
    write_text(m.output("mode_correlation.csv"), csv.str());
  } else if (a.kind == "progress") {
    m.input(a.traces);
    m.input(a.progress);
    const auto env = load_env(m, a.env);
    const auto index = index_queries(load_queries(m, a.env));
    const auto head = progress_from_json(read_json_file(a.progress));
    const auto traces = read_traces(a.traces, OperatorSet::full());
    csv << "query_id,seed,k,raw,smoothed,truth\n";
    json summary = json::array();
    for (const auto& t : traces) {
      if (t.terminated_by != Termination::answer) continue;
      const auto ev = evaluate_progress(head, t, env, lookup_query(index, t.query_id), a.smoothing);
      for (std::size_t k = 0; k < ev.raw.size(); ++k)
        csv << t.query_id << ',' << t.seed << ',' << k + 1 << ',' << ev.raw[k] << ','
            << ev.smoothed[k] << ',' << ev.truth[k] << '\n';
      summary.push_back(json{{"query_id", t.query_id}, {"seed", t.seed}, {"mae", ev.mae},
                             {"spearman", spearman(ev.raw, ev.truth)}});
    }
    write_text(m.output("progress_series.csv"), csv.str());
    write_json_file(m.output("progress_summary.json"), summary);
  } else {
    throw CLI::ValidationError("--kind", "unknown analysis: " + a.kind);
  }
  m.write();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural chain-of-thought search: rollouts, training, exploration and metrics"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Seed (overrides the config)");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--threads", g.threads, "Worker threads (wall-clock only)")->check(CLI::Range(1, 1024));

  auto add_env = [](CLI::App* c, EnvInputs& e) {
    c->add_option("--env", e.env, "EnvSpec JSON")->check(CLI::ExistingFile);
    c->add_option("--queries", e.queries, "Query JSONL")->check(CLI::ExistingFile);
  };

  GenEnvArgs gen;
  auto* c_gen = app.add_subcommand("gen-env", "Write an EnvSpec and a query set");
  c_gen->add_option("--n-queries", gen.n_queries, "Number of queries");

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train the potential and/or progress head");
  add_env(c_train, train.env);
  c_train->add_option("--heads", train.heads)->check(CLI::IsMember({"potential", "progress", "both"}));
  c_train->add_option("--traces", train.traces, "Training traces (default: fresh original-model rollouts)")
      ->check(CLI::ExistingFile);
  c_train->add_option("--operator-set", train.operator_set)->check(CLI::IsMember({"full", "random8"}));

  RolloutArgs search, random, hybrid;
  random.repeats = 16;
  auto* c_search = app.add_subcommand("search", "Guided rollouts (or --original for the unguided model)");
  auto* c_random = app.add_subcommand("random", "Uniform-random operator rollouts and the path matrix");
  auto* c_hybrid = app.add_subcommand("hybrid", "Planner/executor guidance with the environment teacher");
  for (auto [c, r] : {std::pair{c_search, &search}, {c_random, &random}, {c_hybrid, &hybrid}}) {
    add_env(c, r->env);
    c->add_option("--repeats", r->repeats, "Rollouts per query")->check(CLI::PositiveNumber);
    c->add_option("--operator-set", r->operator_set)->check(CLI::IsMember({"full", "random8"}));
  }
  c_search->add_option("--potential", search.potential, "Potential head checkpoint")->check(CLI::ExistingFile);
  c_search->add_option("--progress", search.progress, "Progress head checkpoint")->check(CLI::ExistingFile);
  c_search->add_flag("--original", search.original, "Run the unguided model");
  c_search->add_flag("--diagnostics", search.diagnostics, "Write per-decision scores");

  AggregateArgs agg;
  auto* c_agg = app.add_subcommand("aggregate", "Monte Carlo density of a path matrix");
  c_agg->add_option("--paths", agg.paths)->check(CLI::ExistingFile);
  c_agg->add_option("--iterations", agg.iterations)->check(CLI::PositiveNumber);
  c_agg->add_option("--length-bin", agg.length_width)->check(CLI::PositiveNumber);
  c_agg->add_option("--accuracy-bins", agg.accuracy_bins);
  c_agg->add_option("--baseline", agg.baseline, "Original-model traces")->check(CLI::ExistingFile);

  MetricsArgs met;
  auto* c_met = app.add_subcommand("metrics", "Accuracy, length and efficiency against a baseline");
  c_met->add_option("--run", met.runs, "name=traces.jsonl (repeatable)")->required();
  c_met->add_option("--baseline", met.baseline)->required()->check(CLI::ExistingFile);

  AnalyzeArgs an;
  auto* c_an = app.add_subcommand("analyze", "Operator frequency, preceding tokens, modes, progress");
  c_an->add_option("--kind", an.kind)->check(CLI::IsMember({"operators", "preceding", "modes", "progress"}));
  c_an->add_option("--traces", an.traces)->check(CLI::ExistingFile);
  c_an->add_option("--keyword", an.keywords, "Keyword(s) for the preceding-token analysis");
  c_an->add_option("--labels", an.labels, "JSONL of {operator, mode}")->check(CLI::ExistingFile);
  c_an->add_option("--progress", an.progress, "Progress head checkpoint")->check(CLI::ExistingFile);
  c_an->add_option("--smoothing", an.smoothing)->check(CLI::Range(1e-12, 1.0));
  add_env(c_an, an.env);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (c_gen->parsed()) cmd_gen_env(g, gen);
    if (c_train->parsed()) cmd_train(g, train);
    if (c_search->parsed()) cmd_search(g, search);
    if (c_random->parsed()) cmd_random(g, random);
    if (c_hybrid->parsed()) cmd_hybrid(g, hybrid);
    if (c_agg->parsed()) cmd_aggregate(g, agg);
    if (c_met->parsed()) cmd_metrics(g, met);
    if (c_an->parsed()) {
      if (an.kind == "modes" ? an.labels.empty() : an.traces.empty())
        throw CLI::RequiredError(an.kind == "modes" ? "--labels" : "--traces");
      cmd_analyze(g, an);
    }
  } catch (const CLI::Error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
