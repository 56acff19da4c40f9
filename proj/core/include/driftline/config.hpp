#pragma once

#include <cstdint>
#include <string>

namespace driftline {

// Engine configuration. Loaded from a flat `key = value` file; every field
// has the documented default, and out-of-range values are rejected at load.
struct Config {
  double dedup_threshold = 0.95;   // cosine floor for intra-chat duplicate removal
  int shortlist_size = 5;          // candidate clusters offered to the assignment judge
  double merge_threshold = 0.92;   // centroid cosine floor for merge candidates
  int new_cluster_min = 10;        // pool size floor before a new cluster may form
  double dbi_trigger = 0.5;        // group DBI above this arms the split check
  double silhouette_trigger = 0.5; // group silhouette below this arms the split check
  double z_trigger = 2.0;          // cohesion z-score at or above this requests a split
  int prune_inactivity_days = 30;
  int prune_min_count = 10;
  int min_history_for_z = 5;
  int embedding_dim = 768;
  int reduced_dim = 10;
  int min_cluster_size = 10;
  int min_samples = 5;
  std::uint64_t seed = 1;

  double assign_threshold = 0.60;  // mock assignment judge's cosine floor
  bool enable_split = true;
  bool enable_merge = true;
  bool enable_prune = true;
  int oracle_timeout_ms = 30000;
  int oracle_max_retries = 2;
};

// Parses the documented flat text format. Absent keys keep their defaults.
// Throws MissingFileError, ParseError(line) or RangeError(key, value).
Config load_config(const std::string& path);

// Same parser over an in-memory string (used by tests and the state store).
Config parse_config_text(const std::string& text);

// Serializes every field as `key = value`, one per line, stable order.
std::string config_to_text(const Config& cfg);

}  // namespace driftline
