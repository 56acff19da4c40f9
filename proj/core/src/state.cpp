#include "driftline/state.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cmath>
#include <sstream>

#include "driftline/errors.hpp"
#include "driftline/metrics.hpp"
#include "driftline/rng.hpp"
#include "driftline/textio.hpp"

namespace driftline {
namespace {

constexpr const char* kSnapshotVersion = "driftline-snapshot v1";

int parse_int(const std::string& s) {
  int v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw ParseError("bad integer: " + s, 0);
  return v;
}

std::uint64_t parse_u64(const std::string& s) {
  std::uint64_t v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw ParseError("bad integer: " + s, 0);
  return v;
}

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (s.empty() || s == "-") return out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::string join_list(const std::vector<std::string>& items, char sep) {
  if (items.empty()) return "-";
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out.push_back(sep);
    out += items[i];
  }
  return out;
}

// Centroid derived from the running sum; the same arithmetic runs on every
// path (live, replay, load) so the bits agree.
void refresh_centroid(Cluster& c) {
  c.centroid = c.embedding_sum;
  double n = 0.0;
  for (double x : c.centroid) n += x * x;
  n = std::sqrt(n);
  if (n < 1e-12) {
    std::fill(c.centroid.begin(), c.centroid.end(), 0.0);
    if (!c.centroid.empty()) c.centroid[0] = 1.0;
  } else {
    for (double& x : c.centroid) x /= n;
  }
}

void join_cluster(EngineState& state, Cluster& cluster, Concern& concern, int day) {
  cluster.member_ids.insert(concern.concern_id);
  if (cluster.embedding_sum.empty())
    cluster.embedding_sum.assign(concern.embedding.size(), 0.0);
  for (std::size_t i = 0; i < concern.embedding.size(); ++i)
    cluster.embedding_sum[i] += concern.embedding[i];
  refresh_centroid(cluster);
  cluster.last_assignment_day = std::max(cluster.last_assignment_day, day);
  cluster.assignments_by_day[day] += 1;
  concern.cluster_id = cluster.cluster_id;
  concern.status = ConcernStatus::Assigned;
  state.changed_clusters.insert(cluster.cluster_id);
}

// Builds a cluster from concerns already present in state. Sums run in
// sorted member order on every path.
Cluster make_cluster_from_members(EngineState& state, const std::string& id, ServiceGroup g,
                                  const std::string& title, const std::string& desc,
                                  const std::set<std::string>& members, int day) {
  Cluster c;
  c.cluster_id = id;
  c.service_group = g;
  c.title = title;
  c.description = desc;
  c.member_ids = members;
  c.created_day = day;
  c.last_assignment_day = day;
  c.role = ClusterRole::Emerging;
  c.status = ClusterStatus::Active;
  for (const auto& mid : members) {
    const auto it = state.concerns.find(mid);
    if (it == state.concerns.end())
      throw EventFormatError("cluster " + id + " references unknown concern " + mid);
    const Vec& emb = it->second.embedding;
    if (c.embedding_sum.empty()) c.embedding_sum.assign(emb.size(), 0.0);
    for (std::size_t i = 0; i < emb.size(); ++i) c.embedding_sum[i] += emb[i];
  }
  refresh_centroid(c);
  return c;
}

// Keeps the per-group id counter ahead of any id seen in the log.
void consume_cluster_id(GroupState& gs, const std::string& id) {
  const std::size_t dash = id.rfind('-');
  if (dash == std::string::npos) return;
  int n = 0;
  const char* b = id.data() + dash + 1;
  auto r = std::from_chars(b, id.data() + id.size(), n);
  if (r.ec == std::errc()) gs.next_cluster_seq = std::max(gs.next_cluster_seq, n + 1);
}

void apply_assignment(EngineState& state, const LifecycleEvent& e,
                      const EmbeddingProvider& provider) {
  const std::string concern_id = e.get("concern");
  const std::string origin = e.get("origin");
  const std::string outcome = e.get("outcome");

  if (origin == "new") {
    if (state.concerns.count(concern_id) != 0)
      throw EventFormatError("duplicate concern " + concern_id);
    Concern c;
    c.concern_id = concern_id;
    c.chat_id = e.get("chat");
    c.theme_title = e.get("theme");
    c.text = e.get("text");
    const auto g = service_group_from_string(e.get("group"));
    if (!g.has_value()) throw EventFormatError("bad group in event " + std::to_string(e.event_id));
    c.service_group = *g;
    c.created_day = e.day;
    const std::string* emb = e.find("emb");
    if (emb != nullptr && *emb != "-") {
      for (const auto& part : split_list(*emb, ' '))
        c.embedding.push_back(parse_double_exact(part));
    } else {
      c.embedding = provider.embed(c.text);
    }
    auto [it, ok] = state.concerns.emplace(concern_id, std::move(c));
    (void)ok;
    GroupState& gs = state.group(*g);
    if (outcome == "none") {
      it->second.status = ConcernStatus::Pooled;
      gs.pool.push_back(concern_id);
    } else {
      auto cl = gs.clusters.find(outcome);
      if (cl == gs.clusters.end())
        throw EventFormatError("assignment to unknown cluster " + outcome);
      join_cluster(state, cl->second, it->second, e.day);
    }
    return;
  }

  if (origin == "pool") {
    auto it = state.concerns.find(concern_id);
    if (it == state.concerns.end())
      throw EventFormatError("pool promotion of unknown concern " + concern_id);
    Concern& c = it->second;
    if (c.status != ConcernStatus::Pooled)
      throw EventFormatError("pool promotion of non-pooled concern " + concern_id);
    GroupState& gs = state.group(*c.service_group);
    auto pos = std::find(gs.pool.begin(), gs.pool.end(), concern_id);
    if (pos == gs.pool.end())
      throw EventFormatError("concern " + concern_id + " missing from pool");
    gs.pool.erase(pos);
    auto cl = gs.clusters.find(outcome);
    if (cl == gs.clusters.end())
      throw EventFormatError("assignment to unknown cluster " + outcome);
    join_cluster(state, cl->second, c, e.day);
    return;
  }
  throw EventFormatError("bad assignment origin: " + origin);
}

void apply_new_cluster(EngineState& state, const LifecycleEvent& e) {
  const std::string id = e.get("cluster");
  const auto g = service_group_from_string(e.get("group"));
  if (!g.has_value()) throw EventFormatError("bad group in event " + std::to_string(e.event_id));
  GroupState& gs = state.group(*g);
  if (gs.clusters.count(id) != 0) throw EventFormatError("cluster id reused: " + id);

  std::set<std::string> members;
  for (const auto& m : split_list(e.get("members"), ',')) members.insert(m);
  if (members.empty()) throw EventFormatError("new cluster " + id + " has no members");

  // Members leave the pool together.
  std::vector<std::string> remaining;
  remaining.reserve(gs.pool.size());
  int removed = 0;
  for (const auto& pid : gs.pool) {
    if (members.count(pid) != 0)
      ++removed;
    else
      remaining.push_back(pid);
  }
  if (removed != static_cast<int>(members.size()))
    throw EventFormatError("new cluster " + id + " members not all pooled");
  gs.pool = std::move(remaining);

  Cluster c = make_cluster_from_members(state, id, *g, e.get("title"), e.get("desc"),
                                        members, e.day);
  c.assignments_by_day[e.day] = static_cast<int>(members.size());
  for (const auto& mid : members) {
    Concern& concern = state.concerns.at(mid);
    concern.cluster_id = id;
    concern.status = ConcernStatus::Assigned;
  }
  consume_cluster_id(gs, id);
  state.changed_clusters.insert(id);
  gs.clusters.emplace(id, std::move(c));
}

void apply_split(EngineState& state, const LifecycleEvent& e) {
  if (e.get("result") == "refused") return;

  const std::string parent_id = e.get("parent");
  Cluster* parent = nullptr;
  GroupState* gs = nullptr;
  for (auto& group : state.groups) {
    auto it = group.clusters.find(parent_id);
    if (it != group.clusters.end()) {
      parent = &it->second;
      gs = &group;
      break;
    }
  }
  if (parent == nullptr || !parent->active())
    throw EventFormatError("split of unknown or archived cluster " + parent_id);

  const int n_children = parse_int(e.get("children"));
  std::set<std::string> seen;
  std::vector<std::set<std::string>> child_members(n_children);
  for (int i = 0; i < n_children; ++i) {
    const std::string prefix = "c" + std::to_string(i);
    for (const auto& m : split_list(e.get(prefix + "_members"), ',')) {
      if (!seen.insert(m).second)
        throw EventFormatError("split child member repeated: " + m);
      child_members[i].insert(m);
    }
  }
  if (seen != parent->member_ids)
    throw EventFormatError("split children do not partition parent " + parent_id);

  parent->status = ClusterStatus::Archived;
  state.changed_clusters.erase(parent_id);

  for (int i = 0; i < n_children; ++i) {
    const std::string prefix = "c" + std::to_string(i);
    const std::string child_id = e.get(prefix);
    if (gs->clusters.count(child_id) != 0)
      throw EventFormatError("cluster id reused: " + child_id);
    Cluster c = make_cluster_from_members(state, child_id, parent->service_group,
                                          e.get(prefix + "_title"), e.get(prefix + "_desc"),
                                          child_members[i], e.day);
    c.parent_ids = {parent_id};
    c.assignments_by_day = parent->assignments_by_day;  // the line's activity record
    for (const auto& mid : child_members[i]) {
      Concern& concern = state.concerns.at(mid);
      concern.cluster_id = child_id;
    }
    consume_cluster_id(*gs, child_id);
    state.changed_clusters.insert(child_id);
    gs->clusters.emplace(child_id, std::move(c));
  }
}

void apply_merge(EngineState& state, const LifecycleEvent& e) {
  if (e.get("result") == "kept") return;

  const std::string left_id = e.get("left");
  const std::string right_id = e.get("right");
  const std::string merged_id = e.get("merged");

  GroupState* gs = nullptr;
  for (auto& group : state.groups) {
    if (group.clusters.count(left_id) != 0) {
      gs = &group;
      break;
    }
  }
  if (gs == nullptr || gs->clusters.count(right_id) == 0)
    throw EventFormatError("merge of unknown clusters " + left_id + ", " + right_id);
  Cluster& left = gs->clusters.at(left_id);
  Cluster& right = gs->clusters.at(right_id);
  if (!left.active() || !right.active())
    throw EventFormatError("merge of archived cluster");
  if (gs->clusters.count(merged_id) != 0)
    throw EventFormatError("cluster id reused: " + merged_id);

  std::set<std::string> members = left.member_ids;
  members.insert(right.member_ids.begin(), right.member_ids.end());

  Cluster c;
  c.cluster_id = merged_id;
  c.service_group = left.service_group;
  c.title = e.get("title");
  c.description = e.get("desc");
  c.member_ids = members;
  c.embedding_sum = left.embedding_sum;
  for (std::size_t i = 0; i < right.embedding_sum.size(); ++i)
    c.embedding_sum[i] += right.embedding_sum[i];
  refresh_centroid(c);
  c.created_day = std::min(left.created_day, right.created_day);
  c.last_assignment_day = std::max(left.last_assignment_day, right.last_assignment_day);
  // The merged cluster keeps the older parent's role.
  const Cluster& older =
      left.created_day != right.created_day
          ? (left.created_day < right.created_day ? left : right)
          : (left.cluster_id < right.cluster_id ? left : right);
  c.role = older.role;
  c.status = ClusterStatus::Active;
  c.parent_ids = {left_id, right_id};
  c.assignments_by_day = left.assignments_by_day;
  for (const auto& [day, count] : right.assignments_by_day) c.assignments_by_day[day] += count;

  left.status = ClusterStatus::Archived;
  right.status = ClusterStatus::Archived;
  state.changed_clusters.erase(left_id);
  state.changed_clusters.erase(right_id);

  for (const auto& mid : members) state.concerns.at(mid).cluster_id = merged_id;
  consume_cluster_id(*gs, merged_id);
  state.changed_clusters.insert(merged_id);
  gs->clusters.emplace(merged_id, std::move(c));
}

void apply_prune(EngineState& state, const LifecycleEvent& e) {
  const std::string id = e.get("cluster");
  for (auto& group : state.groups) {
    auto it = group.clusters.find(id);
    if (it != group.clusters.end()) {
      if (!it->second.active()) throw EventFormatError("prune of archived cluster " + id);
      // Archived, never deleted; members keep their historical cluster_id.
      it->second.status = ClusterStatus::Archived;
      state.changed_clusters.erase(id);
      return;
    }
  }
  throw EventFormatError("prune of unknown cluster " + id);
}

void apply_role_transition(EngineState& state, const LifecycleEvent& e) {
  const std::string id = e.get("cluster");
  const auto to = role_from_string(e.get("to"));
  const auto from = role_from_string(e.get("from"));
  if (!to.has_value() || !from.has_value())
    throw EventFormatError("bad role in event " + std::to_string(e.event_id));
  for (auto& group : state.groups) {
    auto it = group.clusters.find(id);
    if (it != group.clusters.end()) {
      if (it->second.role != *from)
        throw EventFormatError("role transition from mismatched state for " + id);
      it->second.role = *to;
      return;
    }
  }
  throw EventFormatError("role transition for unknown cluster " + id);
}

void run_metrics_pass(EngineState& state) {
  for (ServiceGroup g : all_service_groups()) {
    GroupState& gs = state.group(g);
    const GroupQuality q = compute_group_quality(state, g);

    MetricSnapshot snap;
    snap.service_group = g;
    snap.iteration = state.iteration;
    snap.dbi = q.dbi;
    snap.silhouette = q.silhouette;
    snap.n_clusters = q.n_clusters;
    snap.n_concerns = q.n_concerns;

    const std::map<std::string, double>* prev = nullptr;
    if (!gs.snapshots.empty()) prev = &gs.snapshots.back().per_cluster_cohesion;

    for (auto& [id, cluster] : gs.clusters) {
      if (!cluster.active() || cluster.member_ids.size() < 2) continue;
      const bool changed = state.changed_clusters.count(id) != 0;
      const bool known = prev != nullptr && prev->count(id) != 0;
      if (changed || !known) {
        std::vector<const Vec*> members;
        members.reserve(cluster.member_ids.size());
        for (const auto& mid : cluster.member_ids)
          members.push_back(&state.concerns.at(mid).embedding);
        const double c = cohesion(members, cluster.centroid);
        snap.per_cluster_cohesion[id] = c;
        cluster.cohesion_history.emplace_back(state.iteration, c);
      } else {
        snap.per_cluster_cohesion[id] = prev->at(id);
      }
    }
    gs.snapshots.push_back(std::move(snap));
  }
  state.changed_clusters.clear();
}

}  // namespace

std::vector<const Cluster*> GroupState::active_clusters() const {
  std::vector<const Cluster*> out;
  for (const auto& [id, c] : clusters)
    if (c.active()) out.push_back(&c);
  return out;
}

std::string EngineState::next_cluster_id(ServiceGroup g) {
  GroupState& gs = group(g);
  return group_abbrev(g) + "-" + std::to_string(gs.next_cluster_seq++);
}

void apply_event(EngineState& state, const LifecycleEvent& event,
                 const EmbeddingProvider& provider) {
  if (event.event_id != state.last_event_id + 1)
    throw IdGapError("expected event " + std::to_string(state.last_event_id + 1) + ", got " +
                     std::to_string(event.event_id));
  state.last_event_id = event.event_id;

  switch (event.kind) {
    case EventKind::Assignment:
      apply_assignment(state, event, provider);
      break;
    case EventKind::NewCluster:
      apply_new_cluster(state, event);
      break;
    case EventKind::Split:
      apply_split(state, event);
      break;
    case EventKind::Merge:
      apply_merge(state, event);
      break;
    case EventKind::Prune:
      apply_prune(state, event);
      break;
    case EventKind::RoleTransition:
      apply_role_transition(state, event);
      break;
    case EventKind::Narrative:
      break;  // narratives live in the log itself
    case EventKind::Iteration: {
      const std::string phase = event.get("phase");
      if (phase == "begin") {
        state.current_day = event.day;
        state.iteration = parse_int(event.get("iteration"));
      } else if (phase == "metrics") {
        run_metrics_pass(state);
      } else if (phase != "end") {
        throw EventFormatError("bad iteration phase: " + phase);
      }
      break;
    }
  }
}

GroupQuality compute_group_quality(const EngineState& state, ServiceGroup g,
                                   const std::string& merge_left,
                                   const std::string& merge_right) {
  const GroupState& gs = state.group(g);
  GroupQuality q;

  std::vector<const Cluster*> actives = gs.active_clusters();
  std::map<std::string, int> label_of;
  int next_label = 0;
  for (const Cluster* c : actives) {
    if (c->cluster_id == merge_right && !merge_left.empty()) continue;
    label_of[c->cluster_id] = next_label++;
  }
  if (!merge_left.empty() && label_of.count(merge_left) != 0)
    label_of[merge_right] = label_of[merge_left];

  std::vector<Vec> points;
  std::vector<int> labels;
  int multi_member = 0;
  for (const Cluster* c : actives) {
    const int label = label_of.at(c->cluster_id);
    std::size_t size = c->member_ids.size();
    if (!merge_left.empty() &&
        (c->cluster_id == merge_left || c->cluster_id == merge_right)) {
      const auto& a = gs.clusters.at(merge_left).member_ids;
      const auto& b = gs.clusters.at(merge_right).member_ids;
      size = c->cluster_id == merge_left ? a.size() + b.size() : 0;
    }
    if (c->cluster_id == merge_right && !merge_left.empty()) {
      // counted under merge_left
    }
    if (size >= 2) ++multi_member;
    for (const auto& mid : c->member_ids) {
      points.push_back(state.concerns.at(mid).embedding);
      labels.push_back(label);
    }
  }

  q.n_clusters = next_label;
  q.n_concerns = static_cast<int>(points.size());
  if (multi_member < 2) return q;

  ClusterLabels cl;
  cl.labels = labels;
  cl.k = next_label;
  const Matrix m = to_matrix(points);

  try {
    q.dbi = davies_bouldin(m, cl);
  } catch (const CoincidentCentroidsError&) {
    q.dbi.reset();
  } catch (const FewerThanTwoClustersError&) {
    q.dbi.reset();
  }

  try {
    if (q.n_concerns > kSilhouetteSampleCap) {
      // Seeded uniform sample keeps the cost bounded and the result stable.
      std::vector<int> idx(points.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
      Rng rng(mix_seed(state.config.seed,
                       static_cast<std::uint64_t>(static_cast<int>(g)) * 1000003ull +
                           static_cast<std::uint64_t>(state.iteration)));
      for (int i = 0; i < kSilhouetteSampleCap; ++i) {
        const int j = i + static_cast<int>(rng.next_below(idx.size() - i));
        std::swap(idx[i], idx[j]);
      }
      idx.resize(kSilhouetteSampleCap);
      std::sort(idx.begin(), idx.end());
      std::vector<Vec> sub_points;
      ClusterLabels sub_labels;
      sub_points.reserve(idx.size());
      for (int i : idx) {
        sub_points.push_back(points[i]);
        sub_labels.labels.push_back(labels[i]);
      }
      sub_labels.k = next_label;
      std::set<int> distinct(sub_labels.labels.begin(), sub_labels.labels.end());
      if (distinct.size() >= 2)
        q.silhouette = silhouette_score(to_matrix(sub_points), sub_labels);
      else
        q.silhouette = silhouette_score(m, cl);
    } else {
      q.silhouette = silhouette_score(m, cl);
    }
  } catch (const FewerThanTwoClustersError&) {
    q.silhouette.reset();
  }
  return q;
}

std::string serialize_state(const EngineState& state) {
  std::ostringstream out;
  out << kSnapshotVersion << '\n';
  out << "config\t" << escape_field(config_to_text(state.config)) << '\n';
  out << "provider\t" << escape_field(state.provider_name) << '\n';
  out << "meta\tlast_event_id=" << state.last_event_id << "\tday=" << state.current_day
      << "\titeration=" << state.iteration << '\n';

  const bool inline_embeddings = state.provider_name != "token-hash";
  for (const auto& [id, c] : state.concerns) {
    out << "concern\t" << escape_field(id) << '\t' << escape_field(c.chat_id) << '\t'
        << escape_field(c.theme_title) << '\t' << escape_field(c.text) << '\t'
        << (c.service_group.has_value() ? to_string(*c.service_group) : "-") << '\t'
        << to_string(c.status) << '\t' << (c.cluster_id.has_value() ? *c.cluster_id : "-") << '\t'
        << c.created_day << '\t';
    if (inline_embeddings) {
      for (std::size_t i = 0; i < c.embedding.size(); ++i) {
        if (i) out << ' ';
        out << format_double(c.embedding[i]);
      }
    } else {
      out << '-';
    }
    out << '\n';
  }

  for (ServiceGroup g : all_service_groups()) {
    const GroupState& gs = state.group(g);
    for (const auto& [id, c] : gs.clusters) {
      out << "cluster\t" << escape_field(id) << '\t' << to_string(c.service_group) << '\t'
          << escape_field(c.title) << '\t' << escape_field(c.description) << '\t'
          << to_string(c.status) << '\t' << to_string(c.role) << '\t' << c.created_day << '\t'
          << c.last_assignment_day << '\t';
      out << join_list(c.parent_ids, ',') << '\t';
      std::vector<std::string> members(c.member_ids.begin(), c.member_ids.end());
      out << join_list(members, ',') << '\t';
      if (c.cohesion_history.empty()) {
        out << '-';
      } else {
        for (std::size_t i = 0; i < c.cohesion_history.size(); ++i) {
          if (i) out << ';';
          out << c.cohesion_history[i].first << ':' << format_double(c.cohesion_history[i].second);
        }
      }
      out << '\t';
      if (c.assignments_by_day.empty()) {
        out << '-';
      } else {
        bool first = true;
        for (const auto& [day, count] : c.assignments_by_day) {
          if (!first) out << ';';
          first = false;
          out << day << ':' << count;
        }
      }
      out << '\t';
      if (c.embedding_sum.empty()) {
        out << '-';
      } else {
        for (std::size_t i = 0; i < c.embedding_sum.size(); ++i) {
          if (i) out << ' ';
          out << format_double(c.embedding_sum[i]);
        }
      }
      out << '\n';
    }
    out << "pool\t" << to_string(g) << '\t' << join_list(gs.pool, ',') << '\n';
    out << "seq\t" << to_string(g) << '\t' << gs.next_cluster_seq << '\n';
    for (const auto& s : gs.snapshots) {
      out << "msnap\t" << to_string(g) << '\t' << s.iteration << '\t'
          << (s.dbi.has_value() ? format_double(*s.dbi) : "-") << '\t'
          << (s.silhouette.has_value() ? format_double(*s.silhouette) : "-") << '\t'
          << s.n_clusters << '\t' << s.n_concerns << '\t';
      if (s.per_cluster_cohesion.empty()) {
        out << '-';
      } else {
        bool first = true;
        for (const auto& [id, v] : s.per_cluster_cohesion) {
          if (!first) out << ';';
          first = false;
          out << id << ':' << format_double(v);
        }
      }
      out << '\n';
    }
  }

  std::vector<std::string> changed(state.changed_clusters.begin(), state.changed_clusters.end());
  out << "changed\t" << join_list(changed, ',') << '\n';
  out << "end\n";
  return out.str();
}

EngineState deserialize_state(const std::string& text, const EmbeddingProvider& provider) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kSnapshotVersion)
    throw VersionMismatchError("snapshot version line missing or unsupported: " + line);

  EngineState state;
  bool saw_end = false;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> f = split_tabs(line);
    const std::string& tag = f[0];
    try {
      if (tag == "config") {
        state.config = parse_config_text(unescape_field(f.at(1)));
      } else if (tag == "provider") {
        state.provider_name = unescape_field(f.at(1));
      } else if (tag == "meta") {
        for (std::size_t i = 1; i < f.size(); ++i) {
          const std::size_t eq = f[i].find('=');
          const std::string key = f[i].substr(0, eq);
          const std::string val = f[i].substr(eq + 1);
          if (key == "last_event_id") state.last_event_id = parse_u64(val);
          else if (key == "day") state.current_day = parse_int(val);
          else if (key == "iteration") state.iteration = parse_int(val);
        }
      } else if (tag == "concern") {
        Concern c;
        c.concern_id = unescape_field(f.at(1));
        c.chat_id = unescape_field(f.at(2));
        c.theme_title = unescape_field(f.at(3));
        c.text = unescape_field(f.at(4));
        if (f.at(5) != "-") c.service_group = service_group_from_string(f.at(5));
        const std::string status = f.at(6);
        c.status = status == "Assigned" ? ConcernStatus::Assigned
                 : status == "Pooled"   ? ConcernStatus::Pooled
                 : status == "Classified" ? ConcernStatus::Classified
                 : status == "Deduplicated" ? ConcernStatus::Deduplicated
                                            : ConcernStatus::Raw;
        if (f.at(7) != "-") c.cluster_id = f.at(7);
        c.created_day = parse_int(f.at(8));
        if (f.at(9) == "-") {
          c.embedding = provider.embed(c.text);
        } else {
          for (const auto& part : split_list(f.at(9), ' '))
            c.embedding.push_back(parse_double_exact(part));
        }
        state.concerns.emplace(c.concern_id, std::move(c));
      } else if (tag == "cluster") {
        Cluster c;
        c.cluster_id = unescape_field(f.at(1));
        const auto g = service_group_from_string(f.at(2));
        if (!g.has_value()) throw ParseError("bad group", line_no);
        c.service_group = *g;
        c.title = unescape_field(f.at(3));
        c.description = unescape_field(f.at(4));
        c.status = f.at(5) == "Active" ? ClusterStatus::Active : ClusterStatus::Archived;
        const auto role = role_from_string(f.at(6));
        if (!role.has_value()) throw ParseError("bad role", line_no);
        c.role = *role;
        c.created_day = parse_int(f.at(7));
        c.last_assignment_day = parse_int(f.at(8));
        for (const auto& p : split_list(f.at(9), ',')) c.parent_ids.push_back(p);
        for (const auto& m : split_list(f.at(10), ',')) c.member_ids.insert(m);
        for (const auto& h : split_list(f.at(11), ';')) {
          const std::size_t colon = h.find(':');
          c.cohesion_history.emplace_back(parse_int(h.substr(0, colon)),
                                          parse_double_exact(h.substr(colon + 1)));
        }
        for (const auto& h : split_list(f.at(12), ';')) {
          const std::size_t colon = h.find(':');
          c.assignments_by_day[parse_int(h.substr(0, colon))] = parse_int(h.substr(colon + 1));
        }
        for (const auto& part : split_list(f.at(13), ' '))
          c.embedding_sum.push_back(parse_double_exact(part));
        refresh_centroid(c);
        GroupState& gs = state.group(*g);
        gs.clusters.emplace(c.cluster_id, std::move(c));
      } else if (tag == "pool") {
        const auto g = service_group_from_string(f.at(1));
        if (!g.has_value()) throw ParseError("bad group", line_no);
        state.group(*g).pool = split_list(f.at(2), ',');
      } else if (tag == "seq") {
        const auto g = service_group_from_string(f.at(1));
        if (!g.has_value()) throw ParseError("bad group", line_no);
        state.group(*g).next_cluster_seq = parse_int(f.at(2));
      } else if (tag == "msnap") {
        const auto g = service_group_from_string(f.at(1));
        if (!g.has_value()) throw ParseError("bad group", line_no);
        MetricSnapshot s;
        s.service_group = *g;
        s.iteration = parse_int(f.at(2));
        if (f.at(3) != "-") s.dbi = parse_double_exact(f.at(3));
        if (f.at(4) != "-") s.silhouette = parse_double_exact(f.at(4));
        s.n_clusters = parse_int(f.at(5));
        s.n_concerns = parse_int(f.at(6));
        for (const auto& h : split_list(f.at(7), ';')) {
          const std::size_t colon = h.rfind(':');
          s.per_cluster_cohesion[h.substr(0, colon)] = parse_double_exact(h.substr(colon + 1));
        }
        state.group(*g).snapshots.push_back(std::move(s));
      } else if (tag == "changed") {
        for (const auto& id : split_list(f.at(1), ','))
          state.changed_clusters.insert(id);
      } else if (tag == "end") {
        saw_end = true;
      } else {
        throw ParseError("unknown snapshot record: " + tag, line_no);
      }
    } catch (const std::out_of_range&) {
      throw ParseError("truncated snapshot record", line_no);
    }
  }
  if (!saw_end) throw ParseError("snapshot missing end marker", line_no);
  return state;
}

std::string first_divergence(const std::string& a, const std::string& b) {
  std::istringstream ia(a), ib(b);
  std::string la, lb;
  int line_no = 0;
  while (true) {
    const bool ok_a = static_cast<bool>(std::getline(ia, la));
    const bool ok_b = static_cast<bool>(std::getline(ib, lb));
    ++line_no;
    if (!ok_a && !ok_b) return {};
    const auto clip = [](std::string s) {
      if (s.size() > 160) s = s.substr(0, 160) + "...";
      return s;
    };
    if (!ok_a || !ok_b || la != lb) {
      return "line " + std::to_string(line_no) + ": \"" + clip(ok_a ? la : "<missing>") +
             "\" vs \"" + clip(ok_b ? lb : "<missing>") + "\"";
    }
  }
}

}  // namespace driftline
