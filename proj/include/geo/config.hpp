#pragma once

// Run configuration: hyperparameters with their defaults, and a key = value
// text format for loading and snapshotting it.

#include <cstdint>
#include <stdexcept>
#include <string>

#include "geo/chat_client.hpp"

namespace geo {

struct RunConfig {
  // co-evolution loop
  int T = 100;
  int K_top = 4;
  int K_rand = 4;
  int n_parents = 4;
  int n_evolver = 8;
  int n_ops = 8;
  double alpha_sib = 0.8;
  double beta = 1.0;
  int replay_sample = 64;
  int in_flight = 4;
  std::uint64_t seed = 42;

  // archive
  double lambda_pnd = 0.3;
  int K_c = 3;
  int capacity = 35;
  double similarity_threshold = 0.9;

  // critic
  double lambda = 0.2;
  double critic_lr = 1e-3;
  int critic_offline_epochs = 30;
  int critic_online_epochs = 2;
  int batch_contexts = 2;
  int critic_dim = 4096;
  int critic_hidden = 64;
  int warmup_contexts = 8;

  // evolver
  double evolver_lr = 0.05;
  int evolver_epochs = 2;

  // data and planner
  int dataset_size = 24;
  int planner_k = 25;
  int planner_t_max = 3;

  // backend
  std::string backend = "simulated";
  std::string remote_base_url = "http://localhost:8000/v1";
  std::string remote_model = "default";
  int remote_timeout_s = 60;
  int remote_max_retries = 3;

  /// Throws ConfigError naming the first offending key.
  void validate() const;
  RemoteParams remote_params() const;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Parses "key = value" lines; '#' starts a comment. Unspecified keys keep
/// their defaults. Unknown keys, malformed values and failed validation throw
/// ConfigError naming the key.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Every key in canonical order; parse_config(format_config(c)) == c.
std::string format_config(const RunConfig& c);

/// Applies one assignment, as from a config line or command-line override.
void set_config_value(RunConfig& c, const std::string& key, const std::string& value);

}  // namespace geo
