#pragma once

// Orchestration of the three phases: base build, incremental iteration and
// lifecycle maintenance (splits, merges, prunes, role assignment). All state
// mutation flows through events so every run is replayable.

#include <optional>
#include <string>
#include <vector>

#include "driftline/oracle.hpp"
#include "driftline/state.hpp"
#include "driftline/store.hpp"

namespace driftline {

struct IterationOutcome {
  int day = 0;
  int iteration = 0;
  int assigned = 0;  // incoming concerns matched to a cluster
  int pooled = 0;    // incoming concerns sent to the unassigned pool
  std::vector<std::string> new_clusters;
  std::vector<std::string> splits;  // parents of committed splits
  std::vector<std::string> merges;  // merged cluster ids
  std::vector<std::string> prunes;
  std::vector<std::string> role_transitions;  // "id:From->To"
  std::map<ServiceGroup, MetricSnapshot> snapshots;
};

// segment -> extract -> embed -> dedupe -> classify for one chat. Returns
// concerns with status Classified, ids `<chat_id>/<n>` numbered over every
// extracted concern so they stay stable across dedup settings.
std::vector<Concern> ingest_chat(const Chat& chat, int day, const Config& config,
                                 const OracleSuite& oracles, const EmbeddingProvider& provider);

// Builds base clusters from the corpus: per-group reduction plus density
// clustering over the deduplicated, classified concerns. Noise stays in the
// group pool. Emits the full event trail including the iteration-0 metric
// snapshots; every cluster starts as Emerging.
EngineState build_base(const std::vector<Chat>& corpus, const Config& config,
                       const OracleSuite& oracles, const EmbeddingProvider& provider,
                       EventSink& sink);

// Shortlists the concern's group by centroid cosine, asks the assignment
// judge, commits the outcome. Returns the cluster id, or empty when pooled.
std::string assign_incremental(EngineState& state, EventSink& sink,
                               const EmbeddingProvider& provider, const OracleSuite& oracles,
                               const Concern& concern);

// Harvests the group pool into new clusters of at least new_cluster_min
// members. Returns new cluster ids.
std::vector<std::string> process_unassigned_pool(EngineState& state, EventSink& sink,
                                                 const EmbeddingProvider& provider,
                                                 const OracleSuite& oracles, ServiceGroup group);

// Split gate: group quality degraded (DBI above / silhouette below trigger)
// AND the cluster's cohesion z-score against its own history reaches
// z_trigger. Returns the z-score when armed.
std::optional<double> check_split_trigger(const MetricSnapshot& snapshot, const Cluster& cluster,
                                          const Config& config);

// Asks the split judge, commits the partition (parent archived, children
// Emerging with reset histories) and the drift narrative. A refusal leaves
// state untouched but is still recorded. Returns child ids.
std::vector<std::string> execute_split(EngineState& state, EventSink& sink,
                                       const EmbeddingProvider& provider,
                                       const OracleSuite& oracles, const std::string& cluster_id,
                                       double z);

// Pairs active clusters above merge_threshold (highest similarity first,
// each cluster in at most one merge per pass) and lets the judge decide.
// Every judgment is recorded; merges log the group's quality deltas.
std::vector<std::string> merge_pass(EngineState& state, EventSink& sink,
                                    const EmbeddingProvider& provider, const OracleSuite& oracles,
                                    ServiceGroup group);

// Archives clusters that passed both pre-filters (inactive beyond
// prune_inactivity_days AND below prune_min_count) and were confirmed by the
// judge. Members keep their historical cluster id.
std::vector<std::string> prune_pass(EngineState& state, EventSink& sink,
                                    const EmbeddingProvider& provider, const OracleSuite& oracles,
                                    int current_day);

// Deterministic role cascade, first match wins: Deprecated (inactive),
// Peripheral (small or high-spread), Core (old and busy), else Emerging.
std::vector<std::string> assign_roles(EngineState& state, EventSink& sink,
                                      const EmbeddingProvider& provider, int current_day);

// One full day: ingest and assign the batch, retry the pools, harvest new
// clusters, snapshot metrics, then splits, merges, prunes and roles.
IterationOutcome run_iteration(const std::vector<Chat>& batch, int day, EngineState& state,
                               const OracleSuite& oracles, const EmbeddingProvider& provider,
                               EventSink& sink);

}  // namespace driftline
