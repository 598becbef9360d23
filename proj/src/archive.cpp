#include "geo/archive.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace geo {

NgramSet char_ngrams(std::string_view s, int n) {
  if (n < 1 || n > 8) throw std::invalid_argument("n-gram size must be in 1..8");
  NgramSet out;
  const auto un = static_cast<std::size_t>(n);
  if (s.size() < un) return out;
  for (std::size_t i = 0; i + un <= s.size(); ++i) {
    std::uint64_t v = 0;
    for (std::size_t k = 0; k < un; ++k) v = (v << 8) | static_cast<unsigned char>(s[i + k]);
    out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double jaccard(const NgramSet& a, const NgramSet& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t i = 0, j = 0, inter = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++inter;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double ngram_similarity(std::string_view a, std::string_view b, int n) {
  return jaccard(char_ngrams(a, n), char_ngrams(b, n));
}

double diversity(const Strategy& s) {
  const double depth = std::min(s.lineage.depth, 5) / 5.0;
  std::vector<Op> ops = s.lineage.ops;
  std::sort(ops.begin(), ops.end());
  ops.erase(std::unique(ops.begin(), ops.end()), ops.end());
  const double op_frac = static_cast<double>(ops.size()) / kOpCount;
  const double fields = static_cast<double>(active_field_count(s.genotype)) / kTrackedFieldCount;
  return (depth + op_frac + fields) / 3.0;
}

std::string_view outcome_name(InsertOutcome o) {
  switch (o) {
    case InsertOutcome::inserted: return "inserted";
    case InsertOutcome::replaced: return "replaced";
    case InsertOutcome::rejected_novelty: return "rejected_novelty";
    case InsertOutcome::rejected_value: return "rejected_value";
  }
  return "?";
}

Archive::Archive(ArchiveConfig cfg) : cfg_(cfg) {
  if (cfg_.capacity == 0) throw std::invalid_argument("archive capacity must be >= 1");
  if (cfg_.cell_capacity == 0) throw std::invalid_argument("cell capacity must be >= 1");
  if (!std::isfinite(cfg_.lambda_pnd) || cfg_.lambda_pnd < 0) throw std::invalid_argument("lambda_pnd must be >= 0");
}

std::size_t Archive::size() const {
  std::size_t n = 0;
  for (const auto& [k, v] : cells_) n += v.size();
  return n;
}

std::vector<const Elite*> Archive::elites() const {
  refresh();
  std::vector<const Elite*> out;
  for (const auto& [k, v] : cells_) {
    for (const auto& e : v) out.push_back(&e);
  }
  return out;
}

const Elite* Archive::find(const std::string& id) const {
  refresh();
  for (const auto& [k, v] : cells_) {
    for (const auto& e : v) {
      if (e.strategy.id == id) return &e;
    }
  }
  return nullptr;
}

double Archive::novelty_of(const NgramSet& grams, const std::string& exclude_id) const {
  double best = 0.0;
  bool any = false;
  for (const auto& [k, v] : cells_) {
    for (const auto& e : v) {
      if (e.strategy.id == exclude_id) continue;
      best = std::max(best, jaccard(grams, e.grams));
      any = true;
    }
  }
  return any ? 1.0 - best : 1.0;
}

double Archive::novelty(const Strategy& s) const {
  return novelty_of(char_ngrams(s.summary, cfg_.ngram), s.id);
}

PNDComponents Archive::pnd_score(const Strategy& s) const {
  PNDComponents c;
  c.reward = s.reward;
  c.novelty = novelty(s);
  c.diversity = diversity(s);
  c.pnd = pnd_value(c.reward, c.novelty, c.diversity, cfg_.lambda_pnd);
  return c;
}

void Archive::refresh() const {
  if (!dirty_) return;
  for (auto& [k, v] : cells_) {
    for (auto& e : v) {
      e.pnd.reward = e.strategy.reward;
      e.pnd.novelty = novelty_of(e.grams, e.strategy.id);
      e.pnd.diversity = diversity(e.strategy);
      e.pnd.pnd = pnd_value(e.pnd.reward, e.pnd.novelty, e.pnd.diversity, cfg_.lambda_pnd);
    }
  }
  dirty_ = false;
}

namespace {
void sort_cell(std::vector<Elite>& cell) {
  std::stable_sort(cell.begin(), cell.end(), [](const Elite& a, const Elite& b) {
    if (a.strategy.reward != b.strategy.reward) return a.strategy.reward > b.strategy.reward;
    return a.seq < b.seq;
  });
}
}  // namespace

InsertDecision Archive::try_insert(Strategy s, double reward, RewardSource source) {
  if (!std::isfinite(reward)) throw std::invalid_argument("reward must be finite");
  for (const auto& [k, v] : cells_) {
    for (const auto& e : v) {
      if (e.strategy.id == s.id) throw std::invalid_argument("strategy id '" + s.id + "' already archived");
    }
  }
  s.reward = reward;
  s.source = source;
  Elite e;
  e.grams = char_ngrams(s.summary, cfg_.ngram);
  const Descriptor key = descriptor(s.genotype);
  auto& cell = cells_[key];
  for (const auto& other : cell) {
    if (jaccard(e.grams, other.grams) > cfg_.similarity_threshold) {
      return {InsertOutcome::rejected_novelty, {}};
    }
  }
  InsertDecision d;
  if (cell.size() < cfg_.cell_capacity) {
    d.outcome = InsertOutcome::inserted;
  } else if (reward > cell.back().strategy.reward) {
    d.outcome = InsertOutcome::replaced;
    d.replaced_id = cell.back().strategy.id;
    cell.pop_back();
  } else {
    return {InsertOutcome::rejected_value, {}};
  }
  e.strategy = std::move(s);
  e.seq = next_seq_++;
  cell.push_back(std::move(e));
  sort_cell(cell);
  dirty_ = true;
  return d;
}

bool Archive::observe(const std::string& id, double reward) {
  if (!std::isfinite(reward)) throw std::invalid_argument("reward must be finite");
  for (auto& [k, cell] : cells_) {
    for (auto& e : cell) {
      if (e.strategy.id != id) continue;
      ++e.observations;
      e.strategy.reward += (reward - e.strategy.reward) / e.observations;
      e.strategy.source = RewardSource::ge;
      sort_cell(cell);
      dirty_ = true;
      return true;
    }
  }
  return false;
}

const Elite* Archive::find_by_summary(std::string_view summary) const {
  for (const auto& [k, cell] : cells_) {
    for (const auto& e : cell) {
      if (e.strategy.summary == summary) return &e;
    }
  }
  return nullptr;
}

std::vector<std::string> Archive::prune() {
  std::vector<std::string> removed;
  std::size_t alive = size();
  if (alive <= cfg_.capacity) return removed;

  // Pairwise similarities are computed once; each removal round only
  // re-derives novelty from the surviving rows.
  struct Slot {
    Elite* e;
    std::size_t cell;
  };
  std::vector<Slot> slots;
  std::vector<std::size_t> cell_alive;
  std::vector<Descriptor> cell_keys;
  for (auto& [k, v] : cells_) {
    for (auto& e : v) slots.push_back({&e, cell_keys.size()});
    cell_alive.push_back(v.size());
    cell_keys.push_back(k);
  }
  const std::size_t n = slots.size();
  std::vector<double> sim(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      sim[i * n + j] = sim[j * n + i] = jaccard(slots[i].e->grams, slots[j].e->grams);
    }
  }
  std::vector<bool> live(n, true);

  while (alive > cfg_.capacity) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!live[i]) continue;
      Elite& e = *slots[i].e;
      double best = 0.0;
      bool any = false;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i || !live[j]) continue;
        best = std::max(best, sim[i * n + j]);
        any = true;
      }
      e.pnd.reward = e.strategy.reward;
      e.pnd.novelty = any ? 1.0 - best : 1.0;
      e.pnd.diversity = diversity(e.strategy);
      e.pnd.pnd = pnd_value(e.pnd.reward, e.pnd.novelty, e.pnd.diversity, cfg_.lambda_pnd);
    }
    std::size_t victim = n;
    bool victim_shared = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!live[i]) continue;
      const Elite& e = *slots[i].e;
      const bool shared = cell_alive[slots[i].cell] > 1;
      bool better;
      if (victim == n) {
        better = true;
      } else if (shared != victim_shared) {
        better = shared;  // prefer cells that keep an elite afterwards
      } else if (e.pnd.pnd != slots[victim].e->pnd.pnd) {
        better = e.pnd.pnd < slots[victim].e->pnd.pnd;
      } else {
        better = e.seq < slots[victim].e->seq;
      }
      if (better) {
        victim = i;
        victim_shared = shared;
      }
    }
    live[victim] = false;
    --cell_alive[slots[victim].cell];
    --alive;
    removed.push_back(slots[victim].e->strategy.id);
  }

  for (std::size_t c = 0; c < cell_keys.size(); ++c) {
    auto& cell = cells_[cell_keys[c]];
    std::erase_if(cell, [&](const Elite& x) { return std::find(removed.begin(), removed.end(), x.strategy.id) != removed.end(); });
    if (cell.empty()) cells_.erase(cell_keys[c]);
  }
  dirty_ = true;
  return removed;
}

std::vector<Strategy> Archive::sample_parents(std::size_t n, Rng& rng) const {
  refresh();
  if (cells_.empty()) throw std::invalid_argument("cannot sample from an empty archive");
  std::vector<std::vector<const Elite*>> pool;
  std::size_t total = 0;
  for (const auto& [k, v] : cells_) {
    std::vector<const Elite*> c;
    for (const auto& e : v) c.push_back(&e);
    total += c.size();
    pool.push_back(std::move(c));
  }
  std::vector<Strategy> out;
  if (n >= total) {
    for (const auto& c : pool) {
      for (const auto* e : c) out.push_back(e->strategy);
    }
    return out;
  }
  while (out.size() < n) {
    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (!pool[i].empty()) live.push_back(i);
    }
    auto& cell = pool[live[rng.uniform(live.size())]];
    double lo = cell.front()->pnd.pnd;
    for (const auto* e : cell) lo = std::min(lo, e->pnd.pnd);
    std::vector<double> w;
    double sum = 0.0;
    for (const auto* e : cell) {
      w.push_back(e->pnd.pnd - lo + 0.1);
      sum += w.back();
    }
    double u = rng.uniform01() * sum;
    std::size_t pick = cell.size() - 1;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (u < w[i]) {
        pick = i;
        break;
      }
      u -= w[i];
    }
    out.push_back(cell[pick]->strategy);
    cell.erase(cell.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return out;
}

std::vector<Strategy> Archive::top_k_by_pnd(std::size_t k) const {
  auto all = elites();
  std::stable_sort(all.begin(), all.end(), [](const Elite* a, const Elite* b) {
    if (a->pnd.pnd != b->pnd.pnd) return a->pnd.pnd > b->pnd.pnd;
    return a->seq > b->seq;
  });
  std::vector<Strategy> out;
  for (std::size_t i = 0; i < all.size() && i < k; ++i) out.push_back(all[i]->strategy);
  return out;
}

// ---- persistence ----

std::string Archive::to_jsonl() const {
  refresh();
  std::ostringstream out;
  nlohmann::json header = {{"format", "geo-archive"},
                           {"version", 1},
                           {"lambda_pnd", cfg_.lambda_pnd},
                           {"capacity", cfg_.capacity},
                           {"cell_capacity", cfg_.cell_capacity},
                           {"similarity_threshold", cfg_.similarity_threshold},
                           {"ngram", cfg_.ngram},
                           {"next_seq", next_seq_}};
  out << header.dump() << "\n";
  for (const auto& [k, v] : cells_) {
    for (const auto& e : v) {
      nlohmann::json line = {{"cell", descriptor_key(k)},
                             {"seq", e.seq},
                             {"observations", e.observations},
                             {"strategy", to_json(e.strategy)},
                             {"pnd",
                              {{"reward", e.pnd.reward},
                               {"novelty", e.pnd.novelty},
                               {"diversity", e.pnd.diversity},
                               {"pnd", e.pnd.pnd}}}};
      out << line.dump() << "\n";
    }
  }
  return out.str();
}

Archive Archive::from_jsonl(const std::string& data) {
  std::istringstream in(data);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("archive file is empty");
  auto h = nlohmann::json::parse(line);
  if (h.value("format", "") != "geo-archive" || h.value("version", 0) != 1) {
    throw std::invalid_argument("not a version-1 archive file");
  }
  ArchiveConfig cfg;
  cfg.lambda_pnd = h.at("lambda_pnd").get<double>();
  cfg.capacity = h.at("capacity").get<std::size_t>();
  cfg.cell_capacity = h.at("cell_capacity").get<std::size_t>();
  cfg.similarity_threshold = h.at("similarity_threshold").get<double>();
  cfg.ngram = h.at("ngram").get<int>();
  Archive a(cfg);
  a.next_seq_ = h.at("next_seq").get<std::uint64_t>();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    Elite e;
    e.strategy = strategy_from_json(j.at("strategy"));
    e.seq = j.at("seq").get<std::uint64_t>();
    e.observations = j.at("observations").get<int>();
    if (e.observations < 1) throw std::invalid_argument("archive line has observations < 1");
    e.grams = char_ngrams(e.strategy.summary, cfg.ngram);
    const auto key = descriptor(e.strategy.genotype);
    if (descriptor_key(key) != j.at("cell").get<std::string>()) {
      throw std::invalid_argument("strategy '" + e.strategy.id + "' stored under the wrong cell");
    }
    a.cells_[key].push_back(std::move(e));
  }
  for (auto& [k, v] : a.cells_) sort_cell(v);
  a.dirty_ = true;
  return a;
}

void Archive::save(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << to_jsonl();
}

Archive Archive::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return from_jsonl(ss.str());
}

}  // namespace geo
