#include "geo/planner.hpp"

#include <stdexcept>

#include "geo/text.hpp"

namespace geo {

std::string_view stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::none: return "none";
    case StopReason::marginal_gain: return "marginal_gain";
    case StopReason::max_steps: return "max_steps";
    case StopReason::pool_exhausted: return "pool_exhausted";
    case StopReason::rewrite_failed: return "rewrite_failed";
  }
  return "none";
}

ScoreFn critic_score_fn(const Critic& c) {
  return [&c](const Query& q, const Document& d, const Strategy& s) { return c.score(q, d, s); };
}

std::optional<Choice> select_strategy(const ScoreFn& score, const Query& q, const Document& d,
                                      const std::vector<Strategy>& pool, const std::set<std::string>& tabu) {
  std::optional<Choice> best;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (tabu.contains(pool[i].id)) continue;
    const double s = score(q, d, pool[i]);
    if (!best || s > best->score || (s == best->score && pool[i].id < pool[best->index].id)) best = Choice{i, s};
  }
  return best;
}

StopReason should_stop(double best_before, std::optional<double> best_after, int steps_done, int t_max) {
  if (!best_after) return StopReason::pool_exhausted;
  if (*best_after <= best_before) return StopReason::marginal_gain;
  if (steps_done >= t_max) return StopReason::max_steps;
  return StopReason::none;
}

PlanResult plan(const Query& q, const Document& d, const std::vector<Strategy>& pool, const ScoreFn& score,
                Engine& engine, int t_max) {
  if (t_max < 0) throw std::invalid_argument("t_max must be >= 0");
  PlanResult res;
  res.document = d;
  if (t_max == 0) {
    res.trace.stop = StopReason::max_steps;
    return res;
  }
  std::set<std::string> tabu;
  auto choice = select_strategy(score, q, res.document, pool, tabu);
  while (true) {
    if (!choice) {
      res.trace.stop = StopReason::pool_exhausted;
      return res;
    }
    const Strategy& s = pool[choice->index];
    auto r = engine.rewrite(res.document, s, q);
    if (!ok(r) || text::trim(std::get<Document>(r).text).empty()) {
      res.trace.stop = StopReason::rewrite_failed;
      res.trace.error = ok(r) ? "rewrite returned empty text" : std::get<BackendError>(r).message;
      return res;
    }
    res.document = std::get<Document>(r);
    tabu.insert(s.id);
    res.trace.steps.push_back({s.id, choice->score, res.document});
    auto next = select_strategy(score, q, res.document, pool, tabu);
    const auto after = next ? std::optional<double>(next->score) : std::nullopt;
    const auto stop = should_stop(choice->score, after, static_cast<int>(res.trace.steps.size()), t_max);
    if (stop != StopReason::none) {
      res.trace.stop = stop;
      return res;
    }
    choice = next;
  }
}

PlanResult optimize(const Query& q, const Document& d, const Archive& archive, const Critic& critic, Engine& engine,
                    const PlannerConfig& cfg) {
  if (archive.empty()) throw std::invalid_argument("optimize needs a non-empty archive");
  if (cfg.k < 1) throw std::invalid_argument("planner pool size must be >= 1");
  return plan(q, d, archive.top_k_by_pnd(cfg.k), critic_score_fn(critic), engine, cfg.t_max);
}

nlohmann::json to_json(const PlanResult& r) {
  nlohmann::json steps = nlohmann::json::array();
  for (std::size_t i = 0; i < r.trace.steps.size(); ++i) {
    const auto& s = r.trace.steps[i];
    steps.push_back({{"step", i + 1}, {"strategy", s.strategy_id}, {"score", s.score}, {"document", s.snapshot.text}});
  }
  nlohmann::json j = {{"document", {{"id", r.document.id}, {"text", r.document.text}}},
                      {"steps", steps},
                      {"stop", std::string(stop_reason_name(r.trace.stop))}};
  if (!r.trace.error.empty()) j["error"] = r.trace.error;
  return j;
}

}  // namespace geo
