// geo: command-line front end for scoring, critic training, co-evolution,
// planning and the simulated engine.

#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

#include "CLI11.hpp"
#include "geo/coevolution.hpp"
#include "geo/config.hpp"
#include "geo/dataset.hpp"
#include "geo/impressions.hpp"
#include "geo/planner.hpp"
#include "geo/text.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace geo;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitBackend = 3;

struct BackendFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string backend;
  std::string out = ".";
};

RunConfig effective_config(const Globals& g) {
  RunConfig c = g.config.empty() ? RunConfig{} : load_config(g.config);
  if (g.seed_set) c.seed = g.seed;
  if (!g.backend.empty()) c.backend = g.backend;
  c.validate();
  return c;
}

std::unique_ptr<Engine> engine_for(const RunConfig& c) {
  EngineConfig e;
  e.kind = c.backend;
  e.simulated.seed = c.seed;
  e.remote = c.remote_params();
  return make_engine(e);
}

Dataset dataset_for(const std::string& path, const RunConfig& c) {
  if (!path.empty()) return load_dataset(path);
  return make_synthetic_dataset({static_cast<std::size_t>(c.dataset_size), 5, c.seed});
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

std::string out_path(const Globals& g, const std::string& name) {
  fs::create_directories(g.out);
  return (fs::path(g.out) / name).string();
}

// ---- labels: {"query":{id,text},"doc":{id,text},"strategy":{...},"gain":g} ----

struct Label {
  Query query;
  Document doc;
  Strategy strategy;
  double gain = 0.0;
};

std::vector<Label> read_labels(const std::string& path) {
  std::vector<Label> out;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Label l;
      l.query = {j.at("query").at("id").get<std::string>(), j.at("query").at("text").get<std::string>()};
      l.doc.id = j.at("doc").at("id").get<std::string>();
      l.doc.text = j.at("doc").at("text").get<std::string>();
      l.strategy = strategy_from_json(j.at("strategy"));
      l.gain = j.at("gain").get<double>();
      out.push_back(std::move(l));
    } catch (const std::exception& e) {
      throw std::invalid_argument("labels line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::string labels_to_jsonl(const std::vector<Label>& v) {
  std::string out;
  for (const auto& l : v) {
    nlohmann::json j = {{"query", {{"id", l.query.id}, {"text", l.query.text}}},
                        {"doc", {{"id", l.doc.id}, {"text", l.doc.text}}},
                        {"strategy", to_json(l.strategy)},
                        {"gain", l.gain}};
    out += j.dump() + "\n";
  }
  return out;
}

/// Seeds plus `mutants` random single-operator children of each seed.
std::vector<Strategy> label_pool(std::uint64_t seed, int mutants) {
  auto pool = seed_strategies();
  Rng rng(seed);
  const auto seeds = pool;
  const auto space = SearchSpace::full();
  for (const auto& s : seeds) {
    for (int m = 0; m < mutants; ++m) {
      std::vector<Op> ops;
      for (Op op : all_ops()) {
        if (op_arity(op) == 1 && is_applicable(op, s.genotype, false, space)) ops.push_back(op);
      }
      const Op op = ops[rng.uniform(ops.size())];
      Lineage lin{{s.id}, 1, {op}};
      pool.push_back(make_strategy(s.id + "-m" + std::to_string(m), apply_operator(op, s.genotype, nullptr, rng, space), lin));
    }
  }
  return pool;
}

std::vector<Label> generate_labels(Engine& engine, const Dataset& data, const std::vector<Strategy>& pool) {
  StrategyEvaluator ev(engine);
  std::vector<Label> out;
  for (const auto& x : data) {
    for (const auto& s : pool) {
      const auto e = ev.evaluate(x.query, s, x.cands);
      if (!e.reward) throw BackendFailure("evaluation of " + s.id + " failed: " + e.error);
      out.push_back({x.query, x.target(), s, *e.reward});
    }
  }
  return out;
}

std::vector<LabeledSample> to_samples(const Critic& c, const std::vector<Label>& labels) {
  std::vector<LabeledSample> out;
  for (const auto& l : labels) {
    out.push_back({c.featurizer().features(l.query, l.doc, l.strategy), l.gain, l.query.id + "/" + l.doc.id,
                   l.strategy.id});
  }
  return out;
}

// ---- subcommands ----

int cmd_eval(const Globals&, const std::string& answer, int target, int n, bool share, const std::string& scores) {
  if (!scores.empty()) {
    std::vector<double> v;
    std::istringstream in(read_file(scores));
    for (std::string tok; in >> tok;) {
      try {
        v.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw std::invalid_argument("not a number in " + scores + ": '" + tok + "'");
      }
    }
    const auto p = sensitivity_profile(v);
    std::cout << "max_gain " << fmt(p.max_gain) << "\nsensitivity " << fmt(p.sensitivity) << "\n";
    return 0;
  }
  if (answer.empty()) throw std::invalid_argument("eval needs --answer or --scores");
  if (n < 1) throw std::invalid_argument("--n must be >= 1");
  if (target < 1 || target > n) throw std::invalid_argument("--target must be in 1..n");
  std::vector<ParseWarning> warnings;
  const auto a = parse_cited_answer(read_file(answer), n, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: sentence " << w.sentence << ": " << w.message << "\n";
  const auto all = compute_all_impressions(a, n, share);
  const auto& s = all[static_cast<std::size_t>(target) - 1];
  std::cout << "word " << fmt(s.word) << "\npos " << fmt(s.pos) << "\noverall " << fmt(s.overall) << "\n";
  return 0;
}

int cmd_train_critic(const Globals& g, const std::string& labels_path, const std::string& dataset_path, int mutants) {
  const auto cfg = effective_config(g);
  std::vector<Label> labels;
  if (!labels_path.empty()) {
    labels = read_labels(labels_path);
  } else {
    auto engine = engine_for(cfg);
    labels = generate_labels(*engine, dataset_for(dataset_path, cfg), label_pool(cfg.seed, mutants));
    write_file(out_path(g, "labels.jsonl"), labels_to_jsonl(labels));
  }
  if (labels.empty()) throw std::invalid_argument("no labels to train on");
  Critic critic(critic_config(cfg));
  const auto samples = to_samples(critic, labels);
  TrainConfig tc;
  tc.lambda = cfg.lambda;
  tc.epochs = cfg.critic_offline_epochs;
  tc.lr = cfg.critic_lr;
  tc.batch_contexts = cfg.batch_contexts;
  tc.seed = cfg.seed;
  const auto rep = train_critic(critic, samples, tc);
  critic.save(out_path(g, "critic.bin"));
  std::cout << "samples " << rep.samples << "\npairs " << rep.pairs << "\ninitial_loss " << fmt(rep.initial_loss)
            << "\nfinal_loss " << fmt(rep.epochs.empty() ? rep.initial_loss : rep.epochs.back().loss)
            << "\npairwise_accuracy " << fmt(pairwise_accuracy(critic, samples)) << "\n";
  return 0;
}

int cmd_evolve(const Globals& g, const std::string& dataset_path, bool resume) {
  std::unique_ptr<Coevolution> co;
  std::unique_ptr<Engine> engine;
  if (resume) {
    const auto cfg = load_config((fs::path(g.out) / "config.cfg").string());
    engine = engine_for(cfg);
    co = Coevolution::resume(g.out, *engine);
  } else {
    const auto cfg = effective_config(g);
    engine = engine_for(cfg);
    co = std::make_unique<Coevolution>(cfg, dataset_for(dataset_path, cfg), *engine);
  }
  while (co->iteration() < co->config().T) {
    const auto r = co->step();
    std::cout << to_json(r).dump() << "\n";
    co->save(g.out);
  }
  co->save(g.out);
  std::size_t degraded = 0;
  for (const auto& r : co->reports()) degraded += r.degraded ? 1 : 0;
  std::cerr << "iterations " << co->iteration() << ", archive " << co->archive().size() << ", best GE reward "
            << fmt(co->reports().empty() ? 0.0 : co->reports().back().best_ge_reward) << ", degraded " << degraded
            << "\n";
  if (degraded > 0 && degraded == co->reports().size()) throw BackendFailure("every iteration was degraded");
  return 0;
}

int cmd_optimize(const Globals& g, const std::string& query_path, const std::string& doc_path,
                 const std::string& archive_path, std::string critic_path) {
  const auto cfg = effective_config(g);
  if (critic_path.empty()) critic_path = (fs::path(archive_path).parent_path() / "critic.bin").string();
  const auto archive = Archive::load(archive_path);
  const auto critic = Critic::load(critic_path);
  Query q{"query", std::string(text::trim(read_file(query_path)))};
  Document d{"doc", std::string(text::trim(read_file(doc_path))), 0};
  validate(q);
  if (d.text.empty()) throw std::invalid_argument("document is empty");
  auto engine = engine_for(cfg);
  const auto res = optimize(q, d, archive, critic, *engine,
                            {static_cast<std::size_t>(cfg.planner_k), cfg.planner_t_max});
  std::cerr << std::left << std::setw(6) << "step" << std::setw(28) << "strategy" << "score\n";
  for (std::size_t i = 0; i < res.trace.steps.size(); ++i) {
    std::cerr << std::setw(6) << i + 1 << std::setw(28) << res.trace.steps[i].strategy_id
              << fmt(res.trace.steps[i].score) << "\n";
  }
  std::cerr << "stop: " << stop_reason_name(res.trace.stop) << "\n";
  const auto j = to_json(res).dump(1) + "\n";
  write_file(out_path(g, "plan.json"), j);
  write_file(out_path(g, "optimized.txt"), res.document.text + "\n");
  std::cout << j;
  if (res.trace.stop == StopReason::rewrite_failed && res.trace.steps.empty()) throw BackendFailure(res.trace.error);
  return 0;
}

int cmd_simulate(const Globals& g, const std::string& dataset_path) {
  auto cfg = effective_config(g);
  cfg.backend = "simulated";
  auto engine = engine_for(cfg);
  std::string out;
  for (const auto& x : dataset_for(dataset_path, cfg)) {
    auto r = engine->synthesize_answer(x.query, x.cands);
    if (!ok(r)) throw BackendFailure(std::get<BackendError>(r).message);
    const auto& a = std::get<CitedAnswer>(r);
    const auto s = compute_impressions(a, static_cast<int>(x.cands.target_index) + 1);
    nlohmann::json j = {{"query", x.query.id},
                        {"target_index", x.cands.target_index},
                        {"answer", render_cited_answer(a)},
                        {"target_overall", s.overall}};
    out += j.dump() + "\n";
  }
  write_file(out_path(g, "simulated_answers.jsonl"), out);
  std::cout << out;
  return 0;
}

int cmd_ndcg(const Globals& g, const std::string& labels_path, const std::string& critic_path) {
  const auto critic = Critic::load(critic_path);
  const auto labels = read_labels(labels_path);
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i].query.id + "/" + labels[i].doc.id].push_back(i);
  const std::vector<int> ks = {1, 3, 5, 10};
  std::vector<double> sums(ks.size(), 0.0);
  for (const auto& [ctx, idx] : groups) {
    std::vector<double> gains, scores;
    for (auto i : idx) {
      gains.push_back(labels[i].gain);
      scores.push_back(critic.score(labels[i].query, labels[i].doc, labels[i].strategy));
    }
    // relevance must be non-negative: shift by the context minimum
    const double lo = *std::min_element(gains.begin(), gains.end());
    for (double& v : gains) v -= std::min(lo, 0.0);
    std::vector<std::size_t> order(idx.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    for (std::size_t k = 0; k < ks.size(); ++k) sums[k] += ndcg_at_k(order, gains, ks[k]);
  }
  if (groups.empty()) throw std::invalid_argument("no labels");
  std::string out;
  for (std::size_t k = 0; k < ks.size(); ++k) {
    out += "ndcg@" + std::to_string(ks[k]) + " " + fmt(sums[k] / static_cast<double>(groups.size())) + "\n";
  }
  write_file(out_path(g, "ndcg.txt"), out);
  std::cout << "contexts " << groups.size() << "\n" << out;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generative-engine visibility optimization toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "key = value run configuration file");
  app.add_option_function<std::uint64_t>(
      "--seed", [&](const std::uint64_t& v) { g.seed = v, g.seed_set = true; }, "random seed");
  app.add_option("--backend", g.backend, "engine backend")->check(CLI::IsMember({"simulated", "remote"}));
  app.add_option("--out", g.out, "output directory");

  std::string answer, scores, labels, dataset, critic, query, doc, archive;
  int target = 1, n = 5, mutants = 3;
  bool share = false, resume = false;

  auto* eval = app.add_subcommand("eval", "score a cited answer, or sensitivity of a score list");
  eval->add_option("--answer", answer, "cited answer text file");
  eval->add_option("--target", target, "1-based target document index");
  eval->add_option("--n", n, "number of candidate documents");
  eval->add_flag("--share", share, "report each metric as a percent share over candidates");
  eval->add_option("--scores", scores, "whitespace-separated overall scores, one per strategy");

  auto* train = app.add_subcommand("train-critic", "offline critic alignment");
  train->add_option("--labels", labels, "labels JSONL; generated with the backend when absent");
  train->add_option("--dataset", dataset, "dataset JSONL for label generation");
  train->add_option("--mutants", mutants, "random children per seed in the generated pool");

  auto* evolve = app.add_subcommand("evolve", "run strategy/critic co-evolution");
  evolve->add_option("--dataset", dataset, "dataset JSONL (synthetic when absent)");
  evolve->add_flag("--resume", resume, "continue the run stored in --out");

  auto* opt = app.add_subcommand("optimize", "multi-turn rewrite of one document");
  opt->add_option("--query", query, "query text file")->required();
  opt->add_option("--doc", doc, "document text file")->required();
  opt->add_option("--archive", archive, "archive JSONL")->required();
  opt->add_option("--critic", critic, "critic model (default: critic.bin beside the archive)");

  auto* sim = app.add_subcommand("simulate", "emit simulated-engine answers");
  sim->add_option("--dataset", dataset, "dataset JSONL (synthetic when absent)");

  auto* nd = app.add_subcommand("ndcg", "critic ranking quality on labeled data");
  nd->add_option("--labels", labels, "labels JSONL")->required();
  nd->add_option("--critic", critic, "critic model")->required();

  for (auto* sub : {eval, train, evolve, opt, sim, nd}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (eval->parsed()) return cmd_eval(g, answer, target, n, share, scores);
    if (train->parsed()) return cmd_train_critic(g, labels, dataset, mutants);
    if (evolve->parsed()) return cmd_evolve(g, dataset, resume);
    if (opt->parsed()) return cmd_optimize(g, query, doc, archive, critic);
    if (sim->parsed()) return cmd_simulate(g, dataset);
    if (nd->parsed()) return cmd_ndcg(g, labels, critic);
  } catch (const BackendFailure& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return kExitBackend;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitUsage;
}
