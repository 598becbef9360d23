#include "geo/config.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>
#include <variant>
#include <vector>

#include "geo/dataset.hpp"
#include "geo/text.hpp"

namespace geo {

namespace {

using Field = std::variant<int RunConfig::*, double RunConfig::*, std::uint64_t RunConfig::*,
                           std::string RunConfig::*>;

struct Key {
  const char* name;
  Field field;
};

const std::vector<Key>& keys() {
  static const std::vector<Key> k = {
      {"T", &RunConfig::T},
      {"K_top", &RunConfig::K_top},
      {"K_rand", &RunConfig::K_rand},
      {"n_parents", &RunConfig::n_parents},
      {"n_evolver", &RunConfig::n_evolver},
      {"n_ops", &RunConfig::n_ops},
      {"alpha_sib", &RunConfig::alpha_sib},
      {"beta", &RunConfig::beta},
      {"replay_sample", &RunConfig::replay_sample},
      {"in_flight", &RunConfig::in_flight},
      {"seed", &RunConfig::seed},
      {"lambda_pnd", &RunConfig::lambda_pnd},
      {"K_c", &RunConfig::K_c},
      {"capacity", &RunConfig::capacity},
      {"similarity_threshold", &RunConfig::similarity_threshold},
      {"lambda", &RunConfig::lambda},
      {"critic_lr", &RunConfig::critic_lr},
      {"critic_offline_epochs", &RunConfig::critic_offline_epochs},
      {"critic_online_epochs", &RunConfig::critic_online_epochs},
      {"batch_contexts", &RunConfig::batch_contexts},
      {"critic_dim", &RunConfig::critic_dim},
      {"critic_hidden", &RunConfig::critic_hidden},
      {"warmup_contexts", &RunConfig::warmup_contexts},
      {"evolver_lr", &RunConfig::evolver_lr},
      {"evolver_epochs", &RunConfig::evolver_epochs},
      {"dataset_size", &RunConfig::dataset_size},
      {"planner_k", &RunConfig::planner_k},
      {"planner_t_max", &RunConfig::planner_t_max},
      {"backend", &RunConfig::backend},
      {"remote_base_url", &RunConfig::remote_base_url},
      {"remote_model", &RunConfig::remote_model},
      {"remote_timeout_s", &RunConfig::remote_timeout_s},
      {"remote_max_retries", &RunConfig::remote_max_retries},
  };
  return k;
}

template <class T>
T parse_number(const std::string& key, std::string_view v) {
  T out{};
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) {
    throw ConfigError(key, "invalid value '" + std::string(v) + "' for key '" + key + "'");
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require(bool cond, const std::string& key, const std::string& rule) {
  if (!cond) throw ConfigError(key, "invalid '" + key + "': " + rule);
}

}  // namespace

void set_config_value(RunConfig& c, const std::string& key, const std::string& value) {
  for (const auto& k : keys()) {
    if (key != k.name) continue;
    std::visit(
        [&](auto member) {
          using T = std::remove_cvref_t<decltype(c.*member)>;
          if constexpr (std::is_same_v<T, std::string>) {
            c.*member = value;
          } else {
            c.*member = parse_number<T>(key, value);
          }
        },
        k.field);
    return;
  }
  throw ConfigError(key, "unknown config key '" + key + "'");
}

void RunConfig::validate() const {
  require(T >= 0, "T", "must be >= 0");
  require(K_top >= 0, "K_top", "must be >= 0");
  require(K_rand >= 0, "K_rand", "must be >= 0");
  require(n_parents >= 1, "n_parents", "must be >= 1");
  require(n_evolver >= 0, "n_evolver", "must be >= 0");
  require(n_ops >= 0, "n_ops", "must be >= 0");
  require(n_evolver + n_ops >= 1, "n_ops", "n_evolver + n_ops must be >= 1");
  require(alpha_sib >= 0.0 && alpha_sib <= 1.0, "alpha_sib", "must be in [0, 1]");
  require(beta > 0.0, "beta", "must be > 0");
  require(replay_sample >= 0, "replay_sample", "must be >= 0");
  require(in_flight >= 1, "in_flight", "must be >= 1");
  require(lambda_pnd >= 0.0, "lambda_pnd", "must be >= 0");
  require(K_c >= 1, "K_c", "must be >= 1");
  require(capacity >= 1, "capacity", "must be >= 1");
  require(similarity_threshold > 0.0 && similarity_threshold <= 1.0, "similarity_threshold", "must be in (0, 1]");
  require(lambda >= 0.0, "lambda", "must be >= 0");
  require(critic_lr > 0.0, "critic_lr", "must be > 0");
  require(critic_offline_epochs >= 0, "critic_offline_epochs", "must be >= 0");
  require(critic_online_epochs >= 0, "critic_online_epochs", "must be >= 0");
  require(batch_contexts >= 1, "batch_contexts", "must be >= 1");
  require(critic_dim >= 16, "critic_dim", "must be >= 16");
  require(critic_hidden >= 1, "critic_hidden", "must be >= 1");
  require(warmup_contexts >= 0, "warmup_contexts", "must be >= 0");
  require(evolver_lr > 0.0, "evolver_lr", "must be > 0");
  require(evolver_epochs >= 0, "evolver_epochs", "must be >= 0");
  require(dataset_size >= 1, "dataset_size", "must be >= 1");
  require(planner_k >= 1, "planner_k", "must be >= 1");
  require(planner_t_max >= 0, "planner_t_max", "must be >= 0");
  require(backend == "simulated" || backend == "remote", "backend", "must be 'simulated' or 'remote'");
  require(remote_timeout_s >= 1, "remote_timeout_s", "must be >= 1");
  require(remote_max_retries >= 0, "remote_max_retries", "must be >= 0");
}

RemoteParams RunConfig::remote_params() const {
  RemoteParams p;
  p.base_url = remote_base_url;
  p.model = remote_model;
  p.timeout_s = remote_timeout_s;
  p.max_retries = remote_max_retries;
  return p;
}

RunConfig parse_config(const std::string& data) {
  RunConfig c;
  std::istringstream in(data);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto t = text::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("", "line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key(text::trim(t.substr(0, eq)));
    const std::string value(text::trim(t.substr(eq + 1)));
    if (key.empty()) throw ConfigError("", "line " + std::to_string(lineno) + ": empty key");
    set_config_value(c, key, value);
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

std::string format_config(const RunConfig& c) {
  std::string out;
  for (const auto& k : keys()) {
    out += k.name;
    out += " = ";
    std::visit(
        [&](auto member) {
          using T = std::remove_cvref_t<decltype(c.*member)>;
          if constexpr (std::is_same_v<T, std::string>) {
            out += c.*member;
          } else if constexpr (std::is_same_v<T, double>) {
            out += format_double(c.*member);
          } else {
            out += std::to_string(c.*member);
          }
        },
        k.field);
    out += "\n";
  }
  return out;
}

}  // namespace geo
