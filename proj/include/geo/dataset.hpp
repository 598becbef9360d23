#pragma once

// Contexts for co-evolution and critic training: a query with its candidate
// set and target document. Synthetic generation and a JSONL file format.

#include <cstdint>
#include <string>
#include <vector>

#include "geo/core.hpp"

namespace geo {

struct Example {
  Query query;
  CandidateSet cands;

  const Document& target() const { return cands.target(); }
  /// Stable context key "query-id/target-doc-id".
  std::string context_id() const;
};

using Dataset = std::vector<Example>;

struct SyntheticConfig {
  std::size_t size = 24;
  std::size_t docs_per_query = 5;
  std::uint64_t seed = 1;
};

/// Queries over a fixed topical vocabulary. Competitor documents carry varied
/// amounts of query terms, figures, quotes and attributions; the target is a
/// plain document that rewriting can improve.
Dataset make_synthetic_dataset(const SyntheticConfig& cfg);

/// One line per example:
/// {"query":{"id","text"},"docs":[{"id","text"}...],"target_index":k}.
std::string dataset_to_jsonl(const Dataset& d);
/// Throws std::invalid_argument naming the line on malformed input.
Dataset dataset_from_jsonl(const std::string& data);
Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& d, const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& data);

}  // namespace geo
