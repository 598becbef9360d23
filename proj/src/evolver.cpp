#include "geo/evolver.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "geo/text.hpp"

namespace geo {

OpMask applicable_mask(const Genotype& parent, bool has_b, const SearchSpace& space) {
  OpMask m{};
  for (Op op : all_ops()) m[static_cast<int>(op)] = is_applicable(op, parent, has_b, space);
  return m;
}

// ---- policy ----

EvolverPolicy::EvolverPolicy(double temp) : weights(kOpCount * kFeatureDim, 0.0), temperature(temp) {
  if (!(temp > 0.0)) throw std::invalid_argument("policy temperature must be > 0");
}

std::vector<double> EvolverPolicy::features(const Genotype& parent, bool has_b) {
  std::vector<double> x(kFeatureDim, 0.0);
  const auto d = descriptor(parent);
  int offset = 0;
  for (std::size_t a = 0; a < d.size(); ++a) {
    x[offset + d[a]] = 1.0;
    offset += kDescriptorCardinality[a];
  }
  x[kDescriptorOneHotSize] = has_b ? 1.0 : 0.0;
  x[kDescriptorOneHotSize + 1] = 1.0;
  return x;
}

std::array<double, kOpCount> EvolverPolicy::probs(const std::vector<double>& x, const OpMask& mask) const {
  std::array<double, kOpCount> logits{};
  double hi = -INFINITY;
  for (int k = 0; k < kOpCount; ++k) {
    if (!mask[k]) continue;
    double z = 0.0;
    for (int i = 0; i < kFeatureDim; ++i) z += weights[k * kFeatureDim + i] * x[i];
    logits[k] = z / temperature;
    hi = std::max(hi, logits[k]);
  }
  if (hi == -INFINITY) throw std::invalid_argument("no applicable operator");
  std::array<double, kOpCount> p{};
  double sum = 0.0;
  for (int k = 0; k < kOpCount; ++k) {
    if (!mask[k]) continue;
    p[k] = std::exp(logits[k] - hi);
    sum += p[k];
  }
  for (double& v : p) v /= sum;
  return p;
}

Op EvolverPolicy::sample(const std::vector<double>& x, const OpMask& mask, Rng& rng) const {
  const auto p = probs(x, mask);
  double u = rng.uniform01();
  int last = -1;
  for (int k = 0; k < kOpCount; ++k) {
    if (!mask[k]) continue;
    last = k;
    if (u < p[k]) return static_cast<Op>(k);
    u -= p[k];
  }
  return static_cast<Op>(last);
}

nlohmann::json EvolverPolicy::to_json() const {
  nlohmann::json ops = nlohmann::json::array();
  for (Op op : all_ops()) ops.push_back(std::string(op_name(op)));
  return {{"format", "geo-policy"}, {"version", 1},        {"ops", ops},
          {"feature_dim", kFeatureDim}, {"temperature", temperature}, {"weights", weights}};
}

EvolverPolicy EvolverPolicy::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "geo-policy" || j.value("version", 0) != 1) {
    throw std::invalid_argument("not a version-1 policy file");
  }
  EvolverPolicy p(j.at("temperature").get<double>());
  p.weights = j.at("weights").get<std::vector<double>>();
  if (p.weights.size() != static_cast<std::size_t>(kOpCount * kFeatureDim)) {
    throw std::invalid_argument("policy weight matrix has the wrong size");
  }
  return p;
}

// ---- advantages and AWR ----

std::vector<double> sibling_advantage(const SiblingGroup& g, double alpha_sib) {
  if (g.children.empty()) throw std::invalid_argument("sibling group has no children");
  std::vector<double> delta;
  double mean = 0.0;
  for (const auto& c : g.children) {
    delta.push_back(c.reward - g.parent_reward);
    mean += delta.back();
  }
  mean /= static_cast<double>(delta.size());
  std::vector<double> a;
  for (std::size_t i = 0; i < delta.size(); ++i) {
    a.push_back(delta[i] - alpha_sib * mean + (delta[i] < 0.0 ? g.children[i].pnd : 0.0));
  }
  return a;
}

double awr_weight(double advantage, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("AWR temperature must be > 0");
  return std::min(std::exp(advantage / beta), kAwrWeightClip);
}

namespace {

double awr_loss(const EvolverPolicy& p, const std::vector<Experience>& batch, const std::vector<double>& w) {
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto pr = p.probs(batch[i].x, batch[i].mask);
    loss -= w[i] * std::log(std::max(pr[static_cast<int>(batch[i].op)], 1e-300));
  }
  return loss / static_cast<double>(batch.size());
}

}  // namespace

AwrReport awr_update(EvolverPolicy& policy, const std::vector<Experience>& batch, const AwrConfig& cfg) {
  AwrReport rep;
  rep.experiences = batch.size();
  if (batch.empty()) return rep;
  std::vector<double> w;
  for (const auto& e : batch) {
    if (!e.mask[static_cast<int>(e.op)]) throw std::invalid_argument("experience operator outside its mask");
    const double wi = awr_weight(e.advantage, cfg.beta);
    if (!std::isfinite(wi)) throw std::runtime_error("non-finite AWR weight for advantage " + std::to_string(e.advantage));
    w.push_back(wi);
  }
  rep.loss_before = awr_loss(policy, batch, w);
  const double n = static_cast<double>(batch.size());
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<double> grad(policy.weights.size(), 0.0);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto& e = batch[i];
      const auto pr = policy.probs(e.x, e.mask);
      for (int k = 0; k < kOpCount; ++k) {
        if (!e.mask[k]) continue;
        const double dz = w[i] * (pr[k] - (k == static_cast<int>(e.op) ? 1.0 : 0.0)) / (policy.temperature * n);
        for (int f = 0; f < EvolverPolicy::kFeatureDim; ++f) grad[k * EvolverPolicy::kFeatureDim + f] += dz * e.x[f];
      }
    }
    for (std::size_t k = 0; k < grad.size(); ++k) policy.weights[k] -= cfg.lr * grad[k];
  }
  rep.loss_after = awr_loss(policy, batch, w);
  if (!std::isfinite(rep.loss_after)) {
    throw std::runtime_error("AWR update produced a non-finite loss (lr " + std::to_string(cfg.lr) + ")");
  }
  return rep;
}

// ---- proposals ----

std::vector<Candidate> propose_candidates(const EvolverPolicy& policy, const std::vector<Strategy>& parents,
                                          const ProposalCounts& counts, Rng& rng, const SearchSpace& space,
                                          const IdGenerator& next_id) {
  std::vector<Candidate> out;
  if (parents.empty()) return out;
  std::set<std::string> seen;
  for (const auto& p : parents) seen.insert(p.summary);

  const int total = counts.n_evolver + counts.n_ops;
  for (int draw = 0; draw < total; ++draw) {
    const bool from_policy = draw < counts.n_evolver;
    const std::size_t ai = static_cast<std::size_t>(draw) % parents.size();
    const Strategy& a = parents[ai];
    const Strategy* b = parents.size() > 1 ? &parents[(ai + 1) % parents.size()] : nullptr;
    const auto mask = applicable_mask(a.genotype, b != nullptr, space);
    if (std::none_of(mask.begin(), mask.end(), [](bool v) { return v; })) continue;
    auto x = EvolverPolicy::features(a.genotype, b != nullptr);
    Op op;
    if (from_policy) {
      op = policy.sample(x, mask, rng);
    } else {
      std::vector<Op> options;
      for (Op o : all_ops()) {
        if (mask[static_cast<int>(o)]) options.push_back(o);
      }
      op = options[rng.uniform(options.size())];
    }
    const Genotype* gb = op_arity(op) == 2 ? &b->genotype : nullptr;
    Genotype child = apply_operator(op, a.genotype, gb, rng, space);

    Lineage lin;
    lin.parents.push_back(a.id);
    lin.depth = a.lineage.depth + 1;
    lin.ops = a.lineage.ops;
    if (gb != nullptr) {
      lin.parents.push_back(b->id);
      lin.depth = std::max(a.lineage.depth, b->lineage.depth) + 1;
    }
    lin.ops.push_back(op);

    const std::string summary = render_summary(child);
    if (!seen.insert(summary).second) continue;
    Candidate c;
    c.strategy = make_strategy(next_id(), std::move(child), std::move(lin));
    c.op = op;
    c.parent_id = a.id;
    c.x = std::move(x);
    c.mask = mask;
    c.from_policy = from_policy;
    out.push_back(std::move(c));
  }
  return out;
}

// ---- remote proposer ----

const char* const kEvolverSystemPrompt =
    "You are a prompt evolution agent for GEO. You must evolve a parent strategy (or combine two parents) "
    "into a better STRUCTURED GENOTYPE JSON (I/C/R/F/T).\n"
    "\n"
    "1) Choose an operator_id from the provided catalog.\n"
    "2) Produce a child_genotype JSON that results from applying that operator.\n"
    "\n"
    "Important constraints:\n"
    "- The output MUST be valid JSON (one object per line).\n"
    "- The child genotype MUST preserve the I/C/R/F/T structure.\n"
    "- If choosing a Crossover operator (starts with \"cx_\"): You MUST conceptually combine Parent A and "
    "Parent B.\n"
    "- If Parent B is NOT provided: Do NOT choose any \"cx_*\" operator.\n"
    "- Prefer DIVERSITY: Avoid repeating the same operator across candidates.";

std::string evolver_user_prompt(const Query& q, std::string_view content_summary, const Genotype& a,
                                const Genotype* b, int n) {
  std::ostringstream out;
  out << "## Query\n" << q.text << "\n\n"
      << "## Document Summary\n" << content_summary << "\n\n"
      << "## Parent Genotype A (JSON)\n" << to_json(a).dump() << "\n\n"
      << "## Parent Genotype B (JSON) [Optional]\n" << (b != nullptr ? to_json(*b).dump() : "") << "\n\n"
      << "## Operator Catalog\n" << operator_catalog_text() << "\n"
      << "## Task\n"
      << "Generate " << n << " candidates. Output exactly " << n << " JSON lines.";
  return out.str();
}

RemoteProposal parse_remote_actions(std::string_view reply, bool has_b) {
  RemoteProposal p;
  std::istringstream in{std::string(reply)};
  std::string line;
  while (std::getline(in, line)) {
    const auto t = text::trim(line);
    if (t.empty() || t.starts_with("```")) continue;
    try {
      auto j = nlohmann::json::parse(t);
      const auto op = op_from_name(j.at("operator_id").get<std::string>());
      if (!op) {
        ++p.invalid;
        continue;
      }
      if (op_arity(*op) == 2 && !has_b) {
        ++p.rejected_crossover;
        continue;
      }
      p.actions.push_back({*op, genotype_from_json(j.at("child_genotype"))});
    } catch (const std::exception&) {
      ++p.invalid;
    }
  }
  return p;
}

RemoteProposal remote_propose(const ChatClient& client, const Query& q, const Document& d, const Genotype& a,
                              const Genotype* b, int n) {
  auto words = text::split_words(d.text);
  if (words.size() > 80) words.resize(80);
  std::string summary;
  for (auto w : words) {
    if (!summary.empty()) summary.push_back(' ');
    summary.append(w);
  }
  auto r = client.complete({{"system", kEvolverSystemPrompt}, {"user", evolver_user_prompt(q, summary, a, b, n)}});
  if (!ok(r)) {
    RemoteProposal p;
    p.error = std::get<BackendError>(r).message;
    return p;
  }
  return parse_remote_actions(std::get<std::string>(r), b != nullptr);
}

}  // namespace geo
