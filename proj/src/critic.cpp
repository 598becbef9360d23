#include "geo/critic.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "geo/text.hpp"
#include "json.hpp"

namespace geo {

// ---- features ----

namespace {

constexpr std::uint64_t kSaltSummary = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kSaltQuery = 0xc2b2ae3d27d4eb4fULL;
constexpr std::uint64_t kSaltDoc = 0x165667b19e3779f9ULL;

void normalize(FeatureVector& f) {
  double ss = 0.0;
  for (double v : f.val) ss += v * v;
  if (ss <= 0.0) return;
  const double inv = 1.0 / std::sqrt(ss);
  for (double& v : f.val) v *= inv;
}

/// Sums the parts index-wise. Colliding values are added in part order, as a
/// running sum from zero.
FeatureVector merge(const std::vector<const FeatureVector*>& parts) {
  std::vector<std::pair<std::uint32_t, double>> all;
  std::size_t n = 0;
  for (const auto* p : parts) n += p->idx.size();
  all.reserve(n);
  for (const auto* p : parts) {
    for (std::size_t i = 0; i < p->idx.size(); ++i) all.emplace_back(p->idx[i], p->val[i]);
  }
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  FeatureVector out;
  out.idx.reserve(all.size());
  out.val.reserve(all.size());
  for (const auto& [k, v] : all) {
    if (out.idx.empty() || out.idx.back() != k) {
      out.idx.push_back(k);
      out.val.push_back(0.0);
    }
    out.val.back() += v;
  }
  return out;
}

}  // namespace

FeatureVector Featurizer::hashed_block(std::string_view s, std::uint64_t salt) const {
  std::map<std::uint32_t, double> counts;
  const auto dim = static_cast<std::uint64_t>(cfg_.dim);
  if (s.size() >= 3) {
    for (std::size_t i = 0; i + 3 <= s.size(); ++i) {
      const auto h = text::mix(text::fnv1a(s.substr(i, 3), salt));
      counts[static_cast<std::uint32_t>(h % dim)] += 1.0;
    }
  }
  FeatureVector f;
  for (const auto& [k, v] : counts) {
    f.idx.push_back(k);
    f.val.push_back(v);
  }
  normalize(f);
  return f;
}

ContextFeatures Featurizer::context(const Query& q, const Document& d) const {
  ContextFeatures c;
  c.query = hashed_block(text::to_lower(text::normalize_space(q.text)), kSaltQuery);
  auto words = text::split_words(d.text);
  if (words.size() > static_cast<std::size_t>(cfg_.doc_head_tokens)) words.resize(cfg_.doc_head_tokens);
  std::string head;
  for (auto w : words) {
    if (!head.empty()) head.push_back(' ');
    head.append(w);
  }
  c.doc = hashed_block(text::to_lower(head), kSaltDoc);
  return c;
}

FeatureVector Featurizer::strategy_block(const Strategy& s) const {
  FeatureVector out = hashed_block(s.summary, kSaltSummary);
  const auto d = descriptor(s.genotype);
  const double v = 1.0 / std::sqrt(static_cast<double>(d.size()));
  int offset = cfg_.dim;
  for (std::size_t a = 0; a < d.size(); ++a) {
    out.idx.push_back(static_cast<std::uint32_t>(offset + d[a]));
    out.val.push_back(v);
    offset += kDescriptorCardinality[a];
  }
  return out;
}

FeatureVector Featurizer::combine(const ContextFeatures& ctx, const FeatureVector& strategy_block) const {
  return merge({&strategy_block, &ctx.query, &ctx.doc});
}

FeatureVector Featurizer::combine(const ContextFeatures& ctx, const Strategy& s) const {
  return combine(ctx, strategy_block(s));
}

FeatureVector Featurizer::features(const Query& q, const Document& d, const Strategy& s) const {
  return combine(context(q, d), s);
}

// ---- losses ----

double huber(double e, double delta) {
  const double a = std::abs(e);
  return a <= delta ? 0.5 * e * e : delta * (a - 0.5 * delta);
}

double huber_grad(double e, double delta) {
  if (e > delta) return delta;
  if (e < -delta) return -delta;
  return e;
}

namespace {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }
double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

// ---- model ----

Critic::Critic(CriticConfig c) : cfg_(c), feat_(c) {
  if (c.dim < 1 || c.hidden < 1) throw std::invalid_argument("critic dimensions must be positive");
  const std::size_t din = static_cast<std::size_t>(input_dim());
  const std::size_t H = static_cast<std::size_t>(c.hidden);
  w1.resize(H * din);
  b1.assign(H, 0.0);
  w2.assign(H, 0.0);  // zero output layer: untrained critic scores 0
  Rng rng(c.seed);
  for (double& w : w1) w = rng.normal(0.0, c.init_scale);
}

namespace {

void hidden_act(const Critic& c, const FeatureVector& x, std::vector<double>& act) {
  const std::size_t din = static_cast<std::size_t>(c.input_dim());
  const std::size_t H = c.b1.size();
  act.assign(H, 0.0);
  for (std::size_t h = 0; h < H; ++h) {
    double z = c.b1[h];
    const double* row = c.w1.data() + h * din;
    for (std::size_t k = 0; k < x.idx.size(); ++k) z += row[x.idx[k]] * x.val[k];
    act[h] = std::tanh(z);
  }
}

}  // namespace

double Critic::score(const FeatureVector& x) const {
  std::vector<double> act;
  hidden_act(*this, x, act);
  double out = b2;
  for (std::size_t h = 0; h < act.size(); ++h) out += w2[h] * act[h];
  return out;
}

double Critic::score(const Query& q, const Document& d, const Strategy& s) const {
  return score(feat_.features(q, d, s));
}

LossParts Critic::loss(const std::vector<LabeledSample>& samples, const std::vector<PreferencePair>& pairs,
                       double lambda, double delta, CriticGradients* grad) const {
  if (samples.empty()) throw std::invalid_argument("hybrid loss on an empty batch");
  const std::size_t N = samples.size();
  const std::size_t H = b1.size();
  std::vector<std::vector<double>> acts(N);
  std::vector<double> out(N);
  for (std::size_t i = 0; i < N; ++i) {
    hidden_act(*this, samples[i].x, acts[i]);
    out[i] = b2;
    for (std::size_t h = 0; h < H; ++h) out[i] += w2[h] * acts[i][h];
  }

  LossParts L;
  std::vector<double> dout(N, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    const double e = out[i] - samples[i].gain;
    L.reg += huber(e, delta);
    dout[i] += lambda * huber_grad(e, delta) / static_cast<double>(N);
  }
  L.reg /= static_cast<double>(N);
  if (!pairs.empty()) {
    const double P = static_cast<double>(pairs.size());
    for (const auto& p : pairs) {
      const double m = out[p.plus] - out[p.minus];
      L.pair += p.weight * softplus(-m);
      const double g = -p.weight * sigmoid(-m) / P;
      dout[p.plus] += g;
      dout[p.minus] -= g;
    }
    L.pair /= P;
  }
  L.total = L.pair + lambda * L.reg;

  if (grad != nullptr) {
    const std::size_t din = static_cast<std::size_t>(input_dim());
    grad->w1.assign(w1.size(), 0.0);
    grad->b1.assign(H, 0.0);
    grad->w2.assign(H, 0.0);
    grad->b2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double g = dout[i];
      if (g == 0.0) continue;
      grad->b2 += g;
      for (std::size_t h = 0; h < H; ++h) {
        const double a = acts[i][h];
        grad->w2[h] += g * a;
        const double dz = g * w2[h] * (1.0 - a * a);
        if (dz == 0.0) continue;
        grad->b1[h] += dz;
        double* row = grad->w1.data() + h * din;
        const auto& x = samples[i].x;
        for (std::size_t k = 0; k < x.idx.size(); ++k) row[x.idx[k]] += dz * x.val[k];
      }
    }
  }
  return L;
}

bool Critic::operator==(const Critic& o) const {
  return cfg_.dim == o.cfg_.dim && cfg_.hidden == o.cfg_.hidden && w1 == o.w1 && b1 == o.b1 && w2 == o.w2 &&
         b2 == o.b2 && steps == o.steps && adam == o.adam;
}

// ---- persistence ----

namespace {
constexpr char kMagic[8] = {'G', 'E', 'O', 'C', 'R', 'I', 'T', '1'};

void write_doubles(std::ofstream& f, const std::vector<double>& v) {
  f.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}
void read_doubles(std::ifstream& f, std::vector<double>& v) {
  f.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}
}  // namespace

void Critic::save(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  nlohmann::json h = {{"dim", cfg_.dim},       {"hidden", cfg_.hidden},
                      {"doc_head_tokens", cfg_.doc_head_tokens},
                      {"init_scale", cfg_.init_scale}, {"seed", cfg_.seed},
                      {"steps", steps},        {"hash", "fnv1a-mix-char3"},
                      {"adam_t", adam.t},      {"adam_size", adam.m.size()}};
  const std::string hs = h.dump();
  const auto len = static_cast<std::uint32_t>(hs.size());
  f.write(kMagic, sizeof(kMagic));
  f.write(reinterpret_cast<const char*>(&len), sizeof(len));
  f.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  write_doubles(f, w1);
  write_doubles(f, b1);
  write_doubles(f, w2);
  f.write(reinterpret_cast<const char*>(&b2), sizeof(b2));
  write_doubles(f, adam.m);
  write_doubles(f, adam.v);
}

Critic Critic::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  char magic[8];
  f.read(magic, sizeof(magic));
  if (!f || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw std::runtime_error(path + " is not a critic model");
  std::uint32_t len = 0;
  f.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string hs(len, '\0');
  f.read(hs.data(), len);
  auto h = nlohmann::json::parse(hs);
  CriticConfig c;
  c.dim = h.at("dim").get<int>();
  c.hidden = h.at("hidden").get<int>();
  c.doc_head_tokens = h.at("doc_head_tokens").get<int>();
  c.init_scale = h.at("init_scale").get<double>();
  c.seed = h.at("seed").get<std::uint64_t>();
  Critic m(c);
  m.steps = h.at("steps").get<std::uint64_t>();
  read_doubles(f, m.w1);
  read_doubles(f, m.b1);
  read_doubles(f, m.w2);
  f.read(reinterpret_cast<char*>(&m.b2), sizeof(m.b2));
  m.adam.t = h.at("adam_t").get<std::uint64_t>();
  m.adam.m.resize(h.at("adam_size").get<std::size_t>());
  m.adam.v.resize(m.adam.m.size());
  read_doubles(f, m.adam.m);
  read_doubles(f, m.adam.v);
  if (!f) throw std::runtime_error(path + " is truncated");
  return m;
}

// ---- pairs ----

namespace {

std::vector<std::vector<std::size_t>> group_by_context(const std::vector<LabeledSample>& samples) {
  std::vector<std::vector<std::size_t>> groups;
  std::unordered_map<std::string, std::size_t> where;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto [it, fresh] = where.emplace(samples[i].context_id, groups.size());
    if (fresh) groups.emplace_back();
    groups[it->second].push_back(i);
  }
  return groups;
}

std::vector<std::size_t> ranked(const std::vector<LabeledSample>& s, std::vector<std::size_t> idx) {
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (s[a].gain != s[b].gain) return s[a].gain > s[b].gain;
    return s[a].strategy_id < s[b].strategy_id;
  });
  return idx;
}

std::vector<PreferencePair> pairs_for_group(const std::vector<LabeledSample>& s,
                                            const std::vector<std::size_t>& group, Rng& rng, int dense_top,
                                            int n_contrastive) {
  std::vector<PreferencePair> out;
  const auto r = ranked(s, group);
  const std::size_t n = r.size();
  const std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(dense_top), n);
  for (std::size_t a = 0; a < top; ++a) {
    for (std::size_t b = a + 1; b < top; ++b) {
      if (s[r[a]].gain > s[r[b]].gain) {
        out.push_back({r[a], r[b], pair_weight(static_cast<int>(a) + 1, static_cast<int>(b) + 1)});
      }
    }
  }
  if (n >= 2) {
    const std::size_t k = std::min<std::size_t>(3, n);
    for (int c = 0; c < n_contrastive; ++c) {
      const std::size_t a = rng.uniform(k);
      const std::size_t b = n - k + rng.uniform(k);
      if (s[r[a]].gain > s[r[b]].gain) {
        out.push_back({r[a], r[b], pair_weight(static_cast<int>(a) + 1, static_cast<int>(b) + 1)});
      }
    }
  }
  return out;
}

}  // namespace

std::vector<PreferencePair> build_pairs(const std::vector<LabeledSample>& samples, Rng& rng, int dense_top,
                                        int n_contrastive) {
  std::vector<PreferencePair> out;
  for (const auto& g : group_by_context(samples)) {
    auto p = pairs_for_group(samples, g, rng, dense_top, n_contrastive);
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

// ---- training ----

namespace {

void apply_adam(Critic& c, const CriticGradients& g, AdamState& opt, double lr, bool freeze_first) {
  constexpr double b1c = 0.9, b2c = 0.999, eps = 1e-8;
  ++opt.t;
  const double c1 = 1.0 - std::pow(b1c, static_cast<double>(opt.t));
  const double c2 = 1.0 - std::pow(b2c, static_cast<double>(opt.t));
  auto upd = [&](double& p, double grad, std::size_t k) {
    double& m = opt.m[k];
    double& v = opt.v[k];
    m = b1c * m + (1 - b1c) * grad;
    v = b2c * v + (1 - b2c) * grad * grad;
    p -= lr * (m / c1) / (std::sqrt(v / c2) + eps);
  };
  std::size_t k = 0;
  if (!freeze_first) {
    for (std::size_t i = 0; i < c.w1.size(); ++i) upd(c.w1[i], g.w1[i], k + i);
  }
  k += c.w1.size();
  if (!freeze_first) {
    for (std::size_t i = 0; i < c.b1.size(); ++i) upd(c.b1[i], g.b1[i], k + i);
  }
  k += c.b1.size();
  for (std::size_t i = 0; i < c.w2.size(); ++i) upd(c.w2[i], g.w2[i], k + i);
  k += c.w2.size();
  upd(c.b2, g.b2, k);
  ++c.steps;
}

std::vector<LabeledSample> subset(const std::vector<LabeledSample>& s, const std::vector<std::size_t>& idx) {
  std::vector<LabeledSample> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(s[i]);
  return out;
}

TrainReport run_training(Critic& c, const std::vector<LabeledSample>& samples, const TrainConfig& cfg) {
  TrainReport rep;
  rep.samples = samples.size();
  if (samples.empty()) return rep;
  if (cfg.batch_contexts < 1) throw std::invalid_argument("batch_contexts must be >= 1");
  Rng rng(cfg.seed);
  const auto pairs = build_pairs(samples, rng, cfg.dense_top, cfg.n_contrastive);
  rep.pairs = pairs.size();
  rep.initial_loss = c.loss(samples, pairs, cfg.lambda, cfg.huber_delta, nullptr).total;

  // per-context local views
  const auto groups = group_by_context(samples);
  std::vector<std::size_t> group_of(samples.size());
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    for (auto i : groups[gi]) group_of[i] = gi;
  }
  std::vector<std::vector<PreferencePair>> group_pairs(groups.size());
  for (const auto& p : pairs) group_pairs[group_of[p.plus]].push_back(p);

  const std::size_t n_params = c.w1.size() + c.b1.size() + c.w2.size() + 1;
  if (c.adam.m.size() != n_params) {
    c.adam.m.assign(n_params, 0.0);
    c.adam.v.assign(n_params, 0.0);
    c.adam.t = 0;
  }
  AdamState& opt = c.adam;
  CriticGradients grad;
  std::vector<std::size_t> order(groups.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const bool frozen = epoch < cfg.freeze_epochs;
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.uniform(i)]);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_contexts)) {
      std::vector<std::size_t> idx;
      std::vector<PreferencePair> bp;
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_contexts));
      for (std::size_t b = start; b < end; ++b) {
        const auto gi = order[b];
        std::unordered_map<std::size_t, std::size_t> local;
        for (auto i : groups[gi]) {
          local[i] = idx.size();
          idx.push_back(i);
        }
        for (const auto& p : group_pairs[gi]) bp.push_back({local[p.plus], local[p.minus], p.weight});
      }
      const auto batch = subset(samples, idx);
      const auto L = c.loss(batch, bp, cfg.lambda, cfg.huber_delta, &grad);
      if (!std::isfinite(L.total)) {
        std::ostringstream msg;
        msg << "critic training diverged at epoch " << epoch << ", step " << c.steps << " (loss " << L.total
            << ", lr " << cfg.lr << ")";
        throw std::runtime_error(msg.str());
      }
      apply_adam(c, grad, opt, cfg.lr, frozen);
    }
    const auto L = c.loss(samples, pairs, cfg.lambda, cfg.huber_delta, nullptr);
    if (!std::isfinite(L.total)) {
      throw std::runtime_error("critic training diverged after epoch " + std::to_string(epoch));
    }
    rep.epochs.push_back({epoch, frozen ? 1 : 2, L.total, L.pair, L.reg});
  }
  return rep;
}

}  // namespace

TrainReport train_critic(Critic& c, const std::vector<LabeledSample>& samples, const TrainConfig& cfg) {
  return run_training(c, samples, cfg);
}

TrainReport calibrate_online(Critic& c, const std::vector<LabeledSample>& samples, TrainConfig cfg) {
  cfg.freeze_epochs = 0;
  return run_training(c, samples, cfg);
}

double pairwise_accuracy(const Critic& c, const std::vector<LabeledSample>& samples) {
  std::size_t total = 0, right = 0;
  for (const auto& g : group_by_context(samples)) {
    std::vector<double> s;
    for (auto i : g) s.push_back(c.score(samples[i].x));
    for (std::size_t a = 0; a < g.size(); ++a) {
      for (std::size_t b = 0; b < g.size(); ++b) {
        if (samples[g[a]].gain > samples[g[b]].gain) {
          ++total;
          if (s[a] > s[b]) ++right;
        }
      }
    }
  }
  return total == 0 ? 1.0 : static_cast<double>(right) / static_cast<double>(total);
}

double ndcg_at_k(const std::vector<std::size_t>& predicted_order, const std::vector<double>& gains, int k) {
  if (k < 1) throw std::invalid_argument("ndcg_at_k: k must be >= 1");
  auto dcg = [&](const std::vector<std::size_t>& order) {
    double d = 0.0;
    for (std::size_t i = 0; i < order.size() && i < static_cast<std::size_t>(k); ++i) {
      d += gains.at(order[i]) / std::log2(static_cast<double>(i) + 2.0);
    }
    return d;
  };
  std::vector<std::size_t> ideal(gains.size());
  std::iota(ideal.begin(), ideal.end(), 0);
  std::stable_sort(ideal.begin(), ideal.end(), [&](std::size_t a, std::size_t b) { return gains[a] > gains[b]; });
  const double idcg = dcg(ideal);
  if (idcg <= 0.0) return 1.0;
  return dcg(predicted_order) / idcg;
}

namespace {
std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> o(v.size());
  std::iota(o.begin(), o.end(), 0);
  std::stable_sort(o.begin(), o.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < o.size();) {
    std::size_t j = i;
    while (j + 1 < o.size() && v[o[j + 1]] == v[o[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[o[k]] = avg;
    i = j + 1;
  }
  return r;
}
}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("spearman needs two equal-length samples");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0 || sbb == 0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace geo
