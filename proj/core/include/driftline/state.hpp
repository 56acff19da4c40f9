#pragma once

// In-memory engine state and the single event-application path. Every
// mutation — live or replayed — goes through apply_event, which is what
// makes the event log a faithful reconstruction recipe.

#include <array>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "driftline/config.hpp"
#include "driftline/embed.hpp"
#include "driftline/types.hpp"

namespace driftline {

struct GroupState {
  std::map<std::string, Cluster> clusters;  // active and archived, by id
  std::vector<std::string> pool;            // unassigned concern ids, arrival order
  std::vector<MetricSnapshot> snapshots;
  int next_cluster_seq = 1;

  std::vector<const Cluster*> active_clusters() const;
};

struct EngineState {
  Config config;
  std::string provider_name;
  std::map<std::string, Concern> concerns;
  std::array<GroupState, kServiceGroupCount> groups;
  std::uint64_t last_event_id = 0;
  int current_day = 0;
  int iteration = 0;
  // Clusters whose membership changed since the last metrics pass; their
  // cohesion is recomputed, everything else carries forward.
  std::set<std::string> changed_clusters;

  GroupState& group(ServiceGroup g) { return groups[static_cast<int>(g)]; }
  const GroupState& group(ServiceGroup g) const { return groups[static_cast<int>(g)]; }
  // Allocates `<abbrev>-<n>`; ids are never reused.
  std::string next_cluster_id(ServiceGroup g);
};

// Validates event_id == last_event_id + 1 (IdGapError) and applies the
// event. The provider recomputes embeddings for events that do not inline
// them; it must match state.provider_name.
void apply_event(EngineState& state, const LifecycleEvent& event,
                 const EmbeddingProvider& provider);

// Group-level quality numbers; absent unless the group has >= 2 active
// multi-member clusters. Pure, deterministic (seeded silhouette sampling).
struct GroupQuality {
  std::optional<double> dbi;
  std::optional<double> silhouette;
  int n_clusters = 0;
  int n_concerns = 0;
};
// merge_left/merge_right, when non-empty, evaluate the group as if those two
// clusters were already one (used to audit a merge before committing it).
GroupQuality compute_group_quality(const EngineState& state, ServiceGroup g,
                                   const std::string& merge_left = {},
                                   const std::string& merge_right = {});

// Exact text form of the whole state; equal states serialize identically.
std::string serialize_state(const EngineState& state);

// Inverse of serialize_state. Throws VersionMismatchError / ParseError;
// never returns a partially filled state.
EngineState deserialize_state(const std::string& text, const EmbeddingProvider& provider);

// First line on which the two serializations differ, empty when equal.
std::string first_divergence(const std::string& a, const std::string& b);

}  // namespace driftline
