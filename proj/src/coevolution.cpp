#include "geo/coevolution.hpp"

#include <algorithm>
#include <filesystem>
#include <future>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "geo/text.hpp"

namespace geo {

// ---- records ----

nlohmann::json to_json(const ReplayEntry& e) {
  return {{"context", e.context_id},
          {"strategy", e.strategy_id},
          {"reward", e.reward},
          {"source", std::string(source_name(e.source))},
          {"iteration", e.iteration}};
}

ReplayEntry replay_entry_from_json(const nlohmann::json& j) {
  ReplayEntry e;
  e.context_id = j.at("context").get<std::string>();
  e.strategy_id = j.at("strategy").get<std::string>();
  e.reward = j.at("reward").get<double>();
  const auto src = j.at("source").get<std::string>();
  if (src == "ge") {
    e.source = RewardSource::ge;
  } else if (src == "critic") {
    e.source = RewardSource::critic;
  } else {
    throw std::invalid_argument("unknown reward source '" + src + "'");
  }
  e.iteration = j.at("iteration").get<int>();
  return e;
}

nlohmann::json to_json(const IterationReport& r) {
  return {{"iteration", r.iteration},
          {"context", r.context_id},
          {"candidates", r.candidates},
          {"evaluated", r.evaluated},
          {"ge_calls", r.ge_calls},
          {"failed", r.failed},
          {"degraded", r.degraded},
          {"inserted", r.inserted},
          {"replaced", r.replaced},
          {"rejected_novelty", r.rejected_novelty},
          {"rejected_value", r.rejected_value},
          {"refreshed", r.refreshed},
          {"pruned", r.pruned},
          {"archive_size", r.archive_size},
          {"best_ge_reward", r.best_ge_reward},
          {"critic_loss", r.critic_loss},
          {"evolver_loss_before", r.evolver_loss_before},
          {"evolver_loss_after", r.evolver_loss_after}};
}

namespace {

IterationReport report_from_json(const nlohmann::json& j) {
  IterationReport r;
  r.iteration = j.at("iteration").get<int>();
  r.context_id = j.at("context").get<std::string>();
  r.candidates = j.at("candidates").get<std::size_t>();
  r.evaluated = j.at("evaluated").get<std::size_t>();
  r.ge_calls = j.at("ge_calls").get<std::size_t>();
  r.failed = j.at("failed").get<std::size_t>();
  r.degraded = j.at("degraded").get<bool>();
  r.inserted = j.at("inserted").get<std::size_t>();
  r.replaced = j.at("replaced").get<std::size_t>();
  r.rejected_novelty = j.at("rejected_novelty").get<std::size_t>();
  r.rejected_value = j.at("rejected_value").get<std::size_t>();
  r.refreshed = j.at("refreshed").get<std::size_t>();
  r.pruned = j.at("pruned").get<std::size_t>();
  r.archive_size = j.at("archive_size").get<std::size_t>();
  r.best_ge_reward = j.at("best_ge_reward").get<double>();
  r.critic_loss = j.at("critic_loss").get<double>();
  r.evolver_loss_before = j.at("evolver_loss_before").get<double>();
  r.evolver_loss_after = j.at("evolver_loss_after").get<double>();
  return r;
}

nlohmann::json experience_to_json(const Experience& e) {
  nlohmann::json mask = nlohmann::json::array();
  for (bool b : e.mask) mask.push_back(b ? 1 : 0);
  return {{"x", e.x}, {"mask", mask}, {"op", std::string(op_name(e.op))}, {"advantage", e.advantage}};
}

Experience experience_from_json(const nlohmann::json& j) {
  Experience e;
  e.x = j.at("x").get<std::vector<double>>();
  const auto mask = j.at("mask").get<std::vector<int>>();
  if (mask.size() != e.mask.size()) throw std::invalid_argument("experience mask has the wrong size");
  for (std::size_t i = 0; i < mask.size(); ++i) e.mask[i] = mask[i] != 0;
  const auto op = op_from_name(j.at("op").get<std::string>());
  if (!op) throw std::invalid_argument("unknown operator in experience");
  e.op = *op;
  e.advantage = j.at("advantage").get<double>();
  return e;
}

template <class T, class F>
std::string to_jsonl(const std::vector<T>& v, F f) {
  std::string out;
  for (const auto& x : v) out += f(x).dump() + "\n";
  return out;
}

std::vector<nlohmann::json> read_jsonl(const std::string& path) {
  std::vector<nlohmann::json> out;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!text::trim(line).empty()) out.push_back(nlohmann::json::parse(line));
  }
  return out;
}

ArchiveConfig archive_config(const RunConfig& cfg) {
  ArchiveConfig a;
  a.capacity = static_cast<std::size_t>(cfg.capacity);
  a.cell_capacity = static_cast<std::size_t>(cfg.K_c);
  a.lambda_pnd = cfg.lambda_pnd;
  a.similarity_threshold = cfg.similarity_threshold;
  return a;
}

TrainConfig train_config(const RunConfig& cfg, int epochs, std::uint64_t seed) {
  TrainConfig t;
  t.lambda = cfg.lambda;
  t.epochs = epochs;
  t.lr = cfg.critic_lr;
  t.batch_contexts = cfg.batch_contexts;
  t.seed = seed;
  return t;
}

}  // namespace

std::vector<std::size_t> screen_candidates(const std::vector<double>& scores, int K_top, int K_rand, Rng& rng) {
  if (K_top < 0 || K_rand < 0) throw std::invalid_argument("K_top and K_rand must be >= 0");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  const std::size_t top = std::min(order.size(), static_cast<std::size_t>(K_top));
  std::vector<std::size_t> sel(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top));
  std::vector<std::size_t> rest(order.begin() + static_cast<std::ptrdiff_t>(top), order.end());
  std::sort(rest.begin(), rest.end());
  const std::size_t k = std::min(rest.size(), static_cast<std::size_t>(K_rand));
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(rest[i], rest[i + rng.uniform(rest.size() - i)]);
    sel.push_back(rest[i]);
  }
  return sel;
}

CriticConfig critic_config(const RunConfig& cfg) {
  CriticConfig c;
  c.dim = cfg.critic_dim;
  c.hidden = cfg.critic_hidden;
  c.seed = text::mix(cfg.seed ^ 0x63726974ULL);
  return c;
}

// ---- construction ----

Coevolution::Coevolution(Restore, RunConfig cfg, Dataset data, Engine& engine, CoevolutionOptions opts)
    : cfg_(std::move(cfg)),
      data_(std::move(data)),
      engine_(engine),
      opts_(std::move(opts)),
      evaluator_(engine),
      archive_(archive_config(cfg_)),
      critic_(critic_config(cfg_)),
      rng_(cfg_.seed) {
  cfg_.validate();
  if (data_.empty()) throw std::invalid_argument("co-evolution needs a non-empty dataset");
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!context_index_.emplace(data_[i].context_id(), i).second) {
      throw std::invalid_argument("duplicate context id '" + data_[i].context_id() + "'");
    }
  }
}

Coevolution::Coevolution(RunConfig cfg, Dataset data, Engine& engine, CoevolutionOptions opts)
    : Coevolution(Restore{}, std::move(cfg), std::move(data), engine, std::move(opts)) {
  order_.resize(data_.size());
  std::iota(order_.begin(), order_.end(), 0);
  for (std::size_t i = order_.size(); i > 1; --i) std::swap(order_[i - 1], order_[rng_.uniform(i)]);
  warm_start();
}

void Coevolution::warm_start() {
  if (opts_.seeds.empty()) throw std::invalid_argument("co-evolution needs at least one seed strategy");
  for (const auto& s : opts_.seeds) {
    if (!strategies_.emplace(s.id, s).second) throw std::invalid_argument("duplicate seed id '" + s.id + "'");
  }
  const std::size_t n_ctx = std::min(data_.size(), static_cast<std::size_t>(cfg_.warmup_contexts));
  std::map<std::string, std::vector<double>> sums;
  for (std::size_t c = 0; c < n_ctx; ++c) {
    const Example& x = data_[order_[c]];
    for (const auto& s : opts_.seeds) {
      ++warmup_ge_calls_;
      const auto ev = evaluator_.evaluate(x.query, s, x.cands);
      if (!ev.reward) continue;
      b_true_.push_back({x.context_id(), s.id, *ev.reward, RewardSource::ge, 0});
      sums[s.id].push_back(*ev.reward);
      if (!have_best_ || *ev.reward > best_ge_) best_ge_ = *ev.reward;
      have_best_ = true;
    }
  }
  if (!b_true_.empty() && cfg_.critic_offline_epochs > 0) {
    std::vector<LabeledSample> samples;
    for (const auto& e : b_true_) samples.push_back(labeled(e));
    train_critic(critic_, samples, train_config(cfg_, cfg_.critic_offline_epochs, text::mix(cfg_.seed ^ 0x77ULL)));
  }
  for (const auto& s : opts_.seeds) {
    const auto it = sums.find(s.id);
    if (it != sums.end()) {
      // one observation per warm-up context, so later measurements average in
      const auto& obs = it->second;
      if (archive_.try_insert(s, obs.front(), RewardSource::ge).admitted()) {
        for (std::size_t k = 1; k < obs.size(); ++k) archive_.observe(s.id, obs[k]);
      }
    } else {
      archive_.try_insert(s, 0.0, RewardSource::critic);
    }
  }
  archive_.prune();
}

const Strategy* Coevolution::strategy(const std::string& id) const {
  const auto it = strategies_.find(id);
  return it == strategies_.end() ? nullptr : &it->second;
}

std::size_t Coevolution::context_index(const std::string& context_id) const {
  const auto it = context_index_.find(context_id);
  if (it == context_index_.end()) throw std::invalid_argument("unknown context '" + context_id + "'");
  return it->second;
}

const ContextFeatures& Coevolution::context_features(std::size_t ci) const {
  if (context_cache_.size() != data_.size()) context_cache_.assign(data_.size(), std::nullopt);
  auto& slot = context_cache_.at(ci);
  if (!slot) slot = critic_.featurizer().context(data_[ci].query, data_[ci].target());
  return *slot;
}

const FeatureVector& Coevolution::strategy_features(const Strategy& s) const {
  auto it = strategy_cache_.find(s.id);
  if (it == strategy_cache_.end()) it = strategy_cache_.emplace(s.id, critic_.featurizer().strategy_block(s)).first;
  return it->second;
}

double Coevolution::critic_score(const Example& x, const Strategy& s) const {
  const auto it = context_index_.find(x.context_id());
  const bool known = it != context_index_.end() && data_[it->second].query.text == x.query.text &&
                     data_[it->second].target().text == x.target().text;
  if (!known) return critic_.score(x.query, x.target(), s);
  const std::size_t ci = it->second;
  return critic_.score(critic_.featurizer().combine(context_features(ci), strategy_features(s)));
}

LabeledSample Coevolution::labeled(const ReplayEntry& e) const {
  const std::size_t ci = context_index(e.context_id);
  const Strategy* s = strategy(e.strategy_id);
  if (s == nullptr) throw std::logic_error("replay entry references unknown strategy '" + e.strategy_id + "'");
  LabeledSample out;
  out.x = critic_.featurizer().combine(context_features(ci), strategy_features(*s));
  out.gain = e.reward;
  out.context_id = e.context_id;
  out.strategy_id = e.strategy_id;
  return out;
}

std::string Coevolution::next_id() { return "s" + std::to_string(++id_counter_); }

std::vector<std::size_t> Coevolution::replay_indices(std::size_t n_total, std::size_t n_new, std::size_t k) {
  const std::size_t n_old = n_total - n_new;
  std::vector<std::size_t> idx(n_old);
  std::iota(idx.begin(), idx.end(), 0);
  k = std::min(k, n_old);
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng_.uniform(n_old - i)]);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

// ---- the loop ----

std::size_t Coevolution::next_context_index() const {
  return order_[static_cast<std::size_t>(iteration_) % order_.size()];
}

IterationReport Coevolution::step() { return step_on(next_context_index()); }

IterationReport Coevolution::step_on(std::size_t ci) {
  const Example& x = data_.at(ci);
  const int t = ++iteration_;
  IterationReport rep;
  rep.iteration = t;
  rep.context_id = x.context_id();

  // Phase 1: proposals from archive parents.
  const auto parents = archive_.sample_parents(static_cast<std::size_t>(cfg_.n_parents), rng_);
  const ProposalCounts counts{cfg_.n_evolver, cfg_.n_ops};
  auto cands = propose_candidates(policy_, parents, counts, rng_, opts_.space, [this] { return next_id(); });
  rep.candidates = cands.size();

  // Phase 2: critic scoring and budgeted selection.
  const auto& ctx = context_features(ci);
  std::vector<double> scores;
  for (const auto& c : cands) scores.push_back(critic_.score(critic_.featurizer().combine(ctx, strategy_features(c.strategy))));
  const auto sel = screen_candidates(scores, cfg_.K_top, cfg_.K_rand, rng_);
  rep.ge_calls = sel.size();

  // Phase 3: GE evaluation, bounded in-flight, reduced in selection order.
  std::vector<std::optional<double>> ge(cands.size());
  std::vector<bool> selected(cands.size(), false);
  if (!sel.empty()) (void)evaluator_.baseline(x.query, x.cands);
  for (std::size_t start = 0; start < sel.size(); start += static_cast<std::size_t>(cfg_.in_flight)) {
    const std::size_t end = std::min(sel.size(), start + static_cast<std::size_t>(cfg_.in_flight));
    std::vector<std::future<Evaluation>> wave;
    for (std::size_t k = start; k < end; ++k) {
      const Strategy& s = cands[sel[k]].strategy;
      wave.push_back(std::async(std::launch::async, [this, &x, &s] { return evaluator_.evaluate(x.query, s, x.cands); }));
    }
    for (std::size_t k = start; k < end; ++k) {
      selected[sel[k]] = true;
      const auto ev = wave[k - start].get();
      if (ev.reward) {
        ge[sel[k]] = *ev.reward;
        ++rep.evaluated;
      } else {
        ++rep.failed;
      }
    }
  }
  rep.degraded = rep.failed > 0;

  // Phase 4: archive update with mixed rewards, and replay buffers.
  const std::size_t true_before = b_true_.size();
  std::vector<std::optional<double>> r_mix(cands.size());
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const Strategy& s = cands[i].strategy;
    strategies_.emplace(s.id, s);
    if (selected[i] && !ge[i]) continue;  // failed evaluation: leave the archive untouched
    const bool is_ge = selected[i];
    const double r = is_ge ? *ge[i] : scores[i];
    const RewardSource src = is_ge ? RewardSource::ge : RewardSource::critic;
    r_mix[i] = r;
    const Elite* twin = is_ge ? archive_.find_by_summary(s.summary) : nullptr;
    if (twin != nullptr) {
      archive_.observe(twin->strategy.id, r);
      ++rep.refreshed;
    } else {
      const auto d = archive_.try_insert(s, r, src);
      switch (d.outcome) {
        case InsertOutcome::inserted: ++rep.inserted; break;
        case InsertOutcome::replaced: ++rep.replaced; break;
        case InsertOutcome::rejected_novelty: ++rep.rejected_novelty; break;
        case InsertOutcome::rejected_value: ++rep.rejected_value; break;
      }
    }
    ReplayEntry e{rep.context_id, s.id, r, src, t};
    if (src == RewardSource::ge) {
      b_true_.push_back(e);
      if (!have_best_ || r > best_ge_) best_ge_ = r;
      have_best_ = true;
    } else {
      b_pred_.push_back(e);
    }
  }
  if (b_true_.size() > true_before && b_true_.back().source != RewardSource::ge) {
    throw std::logic_error("B_true received a non-GE entry");
  }
  if (!b_pred_.empty() && b_pred_.back().source != RewardSource::critic) {
    throw std::logic_error("B_pred received a GE entry");
  }

  // Evolver: sibling-aware advantages per parent group, AWR with replay.
  std::vector<std::string> group_order;
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (!r_mix[i]) continue;
    auto [it, fresh] = groups.try_emplace(cands[i].parent_id);
    if (fresh) group_order.push_back(cands[i].parent_id);
    it->second.push_back(i);
  }
  const std::size_t exp_before = experiences_.size();
  for (const auto& pid : group_order) {
    const auto& members = groups[pid];
    const auto pit = std::find_if(parents.begin(), parents.end(), [&](const Strategy& p) { return p.id == pid; });
    SiblingGroup g;
    g.parent_id = pid;
    g.parent_reward = critic_.score(critic_.featurizer().combine(ctx, strategy_features(*pit)));
    for (auto i : members) {
      const auto pnd = archive_.pnd_score(cands[i].strategy);
      g.children.push_back({cands[i].strategy.id, *r_mix[i], pnd.pnd - pnd.reward});
    }
    const auto adv = sibling_advantage(g, cfg_.alpha_sib);
    for (std::size_t k = 0; k < members.size(); ++k) {
      const auto& c = cands[members[k]];
      experiences_.push_back({c.x, c.mask, c.op, adv[k]});
    }
  }
  const std::size_t exp_new = experiences_.size() - exp_before;
  if (exp_new > 0 && cfg_.evolver_epochs > 0) {
    std::vector<Experience> batch;
    for (auto i : replay_indices(experiences_.size(), exp_new, static_cast<std::size_t>(cfg_.replay_sample))) {
      batch.push_back(experiences_[i]);
    }
    batch.insert(batch.end(), experiences_.begin() + static_cast<std::ptrdiff_t>(exp_before), experiences_.end());
    const auto ar = awr_update(policy_, batch, {cfg_.beta, cfg_.evolver_lr, cfg_.evolver_epochs});
    rep.evolver_loss_before = ar.loss_before;
    rep.evolver_loss_after = ar.loss_after;
  }

  // Critic: online calibration on the new GE labels plus a replay sample.
  const std::size_t true_new = b_true_.size() - true_before;
  if (true_new > 0 && cfg_.critic_online_epochs > 0) {
    std::vector<LabeledSample> samples;
    for (auto i : replay_indices(b_true_.size(), true_new, static_cast<std::size_t>(cfg_.replay_sample))) {
      samples.push_back(labeled(b_true_[i]));
    }
    for (std::size_t i = true_before; i < b_true_.size(); ++i) samples.push_back(labeled(b_true_[i]));
    const auto tr = calibrate_online(
        critic_, samples, train_config(cfg_, cfg_.critic_online_epochs, text::mix(cfg_.seed ^ static_cast<std::uint64_t>(t))));
    rep.critic_loss = tr.epochs.empty() ? tr.initial_loss : tr.epochs.back().loss;
  }

  rep.pruned = archive_.prune().size();
  rep.archive_size = archive_.size();
  rep.best_ge_reward = have_best_ ? best_ge_ : 0.0;
  reports_.push_back(rep);
  return rep;
}

std::vector<IterationReport> Coevolution::run() {
  std::vector<IterationReport> out;
  while (iteration_ < cfg_.T) out.push_back(step());
  return out;
}

// ---- persistence ----

void Coevolution::save(const std::string& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path p(dir);
  write_file((p / "config.cfg").string(), format_config(cfg_));
  save_dataset(data_, (p / "dataset.jsonl").string());
  archive_.save((p / "archive.jsonl").string());
  write_file((p / "b_true.jsonl").string(), to_jsonl(b_true_, [](const ReplayEntry& e) { return to_json(e); }));
  write_file((p / "b_pred.jsonl").string(), to_jsonl(b_pred_, [](const ReplayEntry& e) { return to_json(e); }));
  std::string strat;
  for (const auto& [id, s] : strategies_) strat += to_json(s).dump() + "\n";
  write_file((p / "strategies.jsonl").string(), strat);
  write_file((p / "experiences.jsonl").string(), to_jsonl(experiences_, experience_to_json));
  critic_.save((p / "critic.bin").string());
  write_file((p / "policy.json").string(), policy_.to_json().dump(1) + "\n");
  write_file((p / "reports.jsonl").string(), to_jsonl(reports_, [](const IterationReport& r) { return to_json(r); }));
  nlohmann::json seeds = nlohmann::json::array();
  for (const auto& s : opts_.seeds) seeds.push_back(s.id);
  const nlohmann::json state = {{"format", "geo-run"},
                                {"version", 1},
                                {"iteration", iteration_},
                                {"id_counter", id_counter_},
                                {"rng", rng_.state()},
                                {"order", order_},
                                {"best_ge_reward", best_ge_},
                                {"have_best", have_best_},
                                {"warmup_ge_calls", warmup_ge_calls_},
                                {"seeds", seeds}};
  write_file((p / "state.json").string(), state.dump(1) + "\n");
}

std::unique_ptr<Coevolution> Coevolution::resume(const std::string& dir, Engine& engine, CoevolutionOptions opts) {
  namespace fs = std::filesystem;
  const fs::path p(dir);
  const auto state = nlohmann::json::parse(read_file((p / "state.json").string()));
  if (state.value("format", "") != "geo-run" || state.value("version", 0) != 1) {
    throw std::invalid_argument(dir + " is not a version-1 run directory");
  }
  std::unique_ptr<Coevolution> ptr(new Coevolution(Restore{}, load_config((p / "config.cfg").string()),
                                                   load_dataset((p / "dataset.jsonl").string()), engine, std::move(opts)));
  Coevolution& co = *ptr;
  co.archive_ = Archive::load((p / "archive.jsonl").string());
  for (const auto& j : read_jsonl((p / "b_true.jsonl").string())) co.b_true_.push_back(replay_entry_from_json(j));
  for (const auto& j : read_jsonl((p / "b_pred.jsonl").string())) co.b_pred_.push_back(replay_entry_from_json(j));
  for (const auto& j : read_jsonl((p / "strategies.jsonl").string())) {
    auto s = strategy_from_json(j);
    co.strategies_.emplace(s.id, std::move(s));
  }
  for (const auto& j : read_jsonl((p / "experiences.jsonl").string())) co.experiences_.push_back(experience_from_json(j));
  for (const auto& j : read_jsonl((p / "reports.jsonl").string())) co.reports_.push_back(report_from_json(j));
  co.critic_ = Critic::load((p / "critic.bin").string());
  co.policy_ = EvolverPolicy::from_json(nlohmann::json::parse(read_file((p / "policy.json").string())));
  co.iteration_ = state.at("iteration").get<int>();
  co.id_counter_ = state.at("id_counter").get<std::uint64_t>();
  co.rng_.set_state(state.at("rng").get<std::string>());
  co.order_ = state.at("order").get<std::vector<std::size_t>>();
  co.best_ge_ = state.at("best_ge_reward").get<double>();
  co.have_best_ = state.at("have_best").get<bool>();
  co.warmup_ge_calls_ = state.at("warmup_ge_calls").get<std::size_t>();
  if (co.order_.size() != co.data_.size()) throw std::invalid_argument("run state order does not match the dataset");
  return ptr;
}

// ---- evaluation helpers ----

std::optional<double> mean_ge_gain(StrategyEvaluator& ev, const Dataset& data, const Strategy& s) {
  double sum = 0.0;
  int n = 0;
  for (const auto& x : data) {
    const auto e = ev.evaluate(x.query, s, x.cands);
    if (!e.reward) continue;
    sum += *e.reward;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

double best_mean_ge_gain(StrategyEvaluator& ev, const Dataset& data, const std::vector<Strategy>& pool) {
  double best = 0.0;
  bool any = false;
  for (const auto& s : pool) {
    const auto g = mean_ge_gain(ev, data, s);
    if (!g) continue;
    if (!any || *g > best) best = *g;
    any = true;
  }
  return best;
}

// ---- regret harness ----

namespace {

std::vector<int> universe_clauses() {
  return {clause_index("ConcreteFigures"), clause_index("NamedSources"), clause_index("ReputableQuote"),
          clause_index("QueryTerms")};
}

Genotype universe_member(unsigned mask, Strength st, LengthPolicy len) {
  Genotype g = noop_genotype();
  g.strength = st;
  g.length = len;
  const auto pool = universe_clauses();
  for (unsigned b = 0; b < pool.size(); ++b) {
    if (mask & (1u << b)) g.clauses.push_back(pool[b]);
  }
  std::sort(g.clauses.begin(), g.clauses.end());
  return g;
}

}  // namespace

std::vector<Genotype> regret_universe() {
  std::vector<Genotype> out;
  for (Strength st : {Strength::normal, Strength::strict}) {
    for (LengthPolicy len : {LengthPolicy::keep, LengthPolicy::shorten}) {
      for (unsigned mask = 0; mask < 16; ++mask) out.push_back(universe_member(mask, st, len));
    }
  }
  return out;
}

SearchSpace regret_space() {
  SearchSpace s;
  s.clause_pool = universe_clauses();
  std::sort(s.clause_pool.begin(), s.clause_pool.end());
  s.intents = {Intent::none};
  s.min_strength = Strength::normal;
  s.max_strength = Strength::strict;
  s.length_cycle = {LengthPolicy::keep, LengthPolicy::shorten};
  s.operators = {Op::mut_C_strengthen, Op::mut_C_relax, Op::mut_L_length_policy, Op::cx_swap_gene,
                 Op::cx_conflict_synthesis};
  return s;
}

std::vector<Strategy> regret_seeds() {
  std::vector<Strategy> out;
  out.push_back(make_strategy("u-base", universe_member(0, Strength::normal, LengthPolicy::keep)));
  for (unsigned b = 0; b < 4; ++b) {
    out.push_back(make_strategy("u-single-" + std::to_string(b), universe_member(1u << b, Strength::normal, LengthPolicy::keep)));
  }
  return out;
}

RegretReport run_regret(const RunConfig& cfg, const Dataset& data, Engine& engine, int T) {
  if (T < 0) throw std::invalid_argument("regret horizon must be >= 0");
  StrategyEvaluator ev(engine);
  const auto universe = regret_universe();
  std::vector<std::map<std::string, double>> table(data.size());
  std::vector<double> best(data.size(), 0.0);
  for (std::size_t c = 0; c < data.size(); ++c) {
    bool any = false;
    for (std::size_t u = 0; u < universe.size(); ++u) {
      const auto s = make_strategy("u" + std::to_string(u), universe[u]);
      const auto e = ev.evaluate(data[c].query, s, data[c].cands);
      if (!e.reward) throw std::runtime_error("regret table evaluation failed: " + e.error);
      table[c][s.summary] = *e.reward;
      if (!any || *e.reward > best[c]) best[c] = *e.reward;
      any = true;
    }
  }

  CoevolutionOptions opts;
  opts.space = regret_space();
  opts.seeds = regret_seeds();
  RunConfig run_cfg = cfg;
  run_cfg.T = T;
  Coevolution co(run_cfg, data, engine, opts);
  RegretReport rep;
  double cum = 0.0;
  for (int t = 0; t < T; ++t) {
    const std::size_t ci = co.next_context_index();
    const Example& x = data[ci];
    const Strategy* chosen = nullptr;
    double chosen_score = 0.0;
    for (const Elite* e : co.archive().elites()) {
      const double sc = co.critic_score(x, e->strategy);
      if (chosen == nullptr || sc > chosen_score || (sc == chosen_score && e->strategy.id < chosen->id)) {
        chosen = &e->strategy;
        chosen_score = sc;
      }
    }
    const auto it = table[ci].find(chosen->summary);
    if (it == table[ci].end()) throw std::logic_error("archive strategy outside the regret universe: " + chosen->summary);
    const double r = best[ci] - it->second;
    rep.instant.push_back(r);
    cum += r;
    rep.cumulative.push_back(cum);
    co.step();
  }
  return rep;
}

}  // namespace geo
