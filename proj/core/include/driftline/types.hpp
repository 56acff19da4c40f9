#pragma once

// Domain types shared by every stage of the pipeline: chats and the concerns
// extracted from them, clusters with their lifecycle bookkeeping, per-group
// quality snapshots, and the append-only event record that makes the whole
// state replayable.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace driftline {

using Vec = std::vector<double>;

enum class Speaker { User, Agent };

struct Utterance {
  Speaker speaker = Speaker::User;
  std::string text;
  int turn_index = 0;
};

struct Chat {
  std::string chat_id;
  std::vector<Utterance> turns;
  int arrival_day = 0;
};

struct Theme {
  std::string chat_id;
  std::string theme_title;
  std::vector<int> utterance_indices;
};

enum class ServiceGroup : int {
  Compute = 0,
  Networking,
  IdentitySecurity,
  Storage,
  DataServices,
  BillingAccounts,
  Others,
};
inline constexpr int kServiceGroupCount = 7;

const std::array<ServiceGroup, kServiceGroupCount>& all_service_groups();
std::string to_string(ServiceGroup g);
// Short stable prefix used in cluster ids (CMP, NET, IDS, STO, DAT, BIL, OTH).
std::string group_abbrev(ServiceGroup g);
std::optional<ServiceGroup> service_group_from_string(const std::string& name);

enum class ConcernStatus { Raw, Deduplicated, Classified, Assigned, Pooled };
std::string to_string(ConcernStatus s);

struct Concern {
  std::string concern_id;
  std::string chat_id;
  std::string theme_title;
  std::string text;
  std::optional<ServiceGroup> service_group;
  Vec embedding;  // empty until classified; unit norm afterwards
  std::optional<std::string> cluster_id;
  int created_day = 0;
  ConcernStatus status = ConcernStatus::Raw;
};

enum class ClusterRole { Core, Emerging, Peripheral, Deprecated };
enum class ClusterStatus { Active, Archived };
std::string to_string(ClusterRole r);
std::string to_string(ClusterStatus s);
std::optional<ClusterRole> role_from_string(const std::string& name);

struct Cluster {
  std::string cluster_id;  // stable for the cluster's whole life, never reused
  ServiceGroup service_group = ServiceGroup::Others;
  std::string title;
  std::string description;
  std::set<std::string> member_ids;
  Vec centroid;       // unit-norm mean of member embeddings
  Vec embedding_sum;  // running sum the centroid is derived from
  int created_day = 0;
  int last_assignment_day = 0;
  std::vector<std::pair<int, double>> cohesion_history;  // (iteration, C)
  ClusterRole role = ClusterRole::Emerging;
  ClusterStatus status = ClusterStatus::Active;
  std::vector<std::string> parent_ids;
  std::map<int, int> assignments_by_day;  // activity record for role rules

  bool active() const { return status == ClusterStatus::Active; }
};

struct MetricSnapshot {
  ServiceGroup service_group = ServiceGroup::Others;
  int iteration = 0;
  std::optional<double> dbi;         // absent when < 2 eligible clusters
  std::optional<double> silhouette;  // same
  std::map<std::string, double> per_cluster_cohesion;
  int n_clusters = 0;  // active clusters in the group
  int n_concerns = 0;  // concerns assigned to active clusters
};

enum class EventKind {
  Split,
  Merge,
  Prune,
  NewCluster,
  RoleTransition,
  Narrative,
  Assignment,
  Iteration,  // begin / metrics / end markers that make metric history replayable
};
std::string to_string(EventKind k);
std::optional<EventKind> event_kind_from_string(const std::string& name);

// One record of the append-only log. Payload is an ordered field list so the
// on-disk encoding is byte-stable under a fixed seed.
struct LifecycleEvent {
  std::uint64_t event_id = 0;
  int day = 0;
  EventKind kind = EventKind::Assignment;
  std::vector<std::pair<std::string, std::string>> fields;

  const std::string* find(const std::string& key) const;
  std::string get(const std::string& key) const;  // throws EventFormatError if absent
  void set(std::string key, std::string value);
};

}  // namespace driftline
