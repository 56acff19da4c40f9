#pragma once

// Text-judgment boundary of the pipeline. Ten roles cover every decision
// that is delegated to a language model in production; each role has a
// deterministic mock so the whole system runs and tests offline, plus a
// remote HTTP implementation sharing one connector.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "driftline/config.hpp"
#include "driftline/types.hpp"

namespace driftline {

enum class OracleSource { Mock, Remote };

struct OracleDecision {
  std::string choice;     // role-specific: cluster id, "none", "merge", "keep", "prune"
  std::string rationale;  // non-empty, recorded in the event log
  OracleSource source = OracleSource::Mock;
};

struct ClusterLabel {
  std::string title;        // <= 80 chars
  std::string description;  // <= 400 chars
};

struct ChildLabel {
  std::string title;
  int member_count = 0;
};

class OracleSuite {
 public:
  virtual ~OracleSuite() = default;
  virtual std::string name() const = 0;

  // Ordered themes covering all user turns. Throws MalformedChatError on an
  // empty-text turn, OracleFailure on transport trouble.
  virtual std::vector<Theme> segment_chat(const Chat& chat) const = 0;

  // Standalone concern texts found in the theme, compound sentences split.
  // context_window is the number of neighbouring turns visible on each side.
  virtual std::vector<std::string> extract_concerns(const Chat& chat, const Theme& theme,
                                                    int context_window) const = 0;

  virtual ServiceGroup classify_service_group(const std::string& concern_text) const = 0;

  virtual ClusterLabel label_cluster(const std::vector<std::string>& member_texts,
                                     ServiceGroup group) const = 0;

  // choice = a shortlist cluster_id, or "none" to pool the concern.
  virtual OracleDecision confirm_assignment(const Concern& concern,
                                            const std::vector<const Cluster*>& shortlist) const = 0;

  // Partition of all member ids into >= 2 sub-groups, each at least
  // min_cluster_size / 2. Throws SplitRefusedError when no acceptable
  // partition exists (including the < 2 * min_cluster_size guard).
  virtual std::vector<std::vector<std::string>> propose_split(
      const Cluster& cluster, const std::vector<const Concern*>& members) const = 0;

  // Disjoint groups of pool members, each at least new_cluster_min strong;
  // everything else stays pooled.
  virtual std::vector<std::vector<std::string>> form_new_clusters(
      const std::vector<const Concern*>& pool) const = 0;

  // choice = "merge" or "keep".
  virtual OracleDecision judge_merge(const Cluster& a, const Cluster& b,
                                     const std::vector<std::string>& samples_a,
                                     const std::vector<std::string>& samples_b) const = 0;

  // choice = "prune" or "keep". Callers pass the cluster's current cohesion
  // and the median cohesion of its group so the judge does not reach back
  // into state.
  virtual OracleDecision judge_prune(const Cluster& cluster, double cluster_cohesion,
                                     double group_median_cohesion) const = 0;

  // Short narrative (<= 1000 chars) naming every sub-group title.
  virtual std::string narrate_drift(const std::string& parent_title, int parent_count,
                                    const std::vector<ChildLabel>& children) const = 0;
};

// Deterministic reference suite; a pure function of (inputs, config.seed).
std::unique_ptr<OracleSuite> make_mock_oracles(const Config& config);

struct RemoteOracleConfig {
  std::string url;         // chat-completions style endpoint
  std::string auth_token;  // bearer token, optional
  std::string model = "support-cluster-judge";
  std::string prompt_dir = "prompts";
  int timeout_ms = 30000;
  int max_retries = 2;
};

// Reads DRIFTLINE_ORACLE_URL / DRIFTLINE_ORACLE_TOKEN when url/token are empty.
std::unique_ptr<OracleSuite> make_remote_oracles(const Config& config, RemoteOracleConfig remote);

}  // namespace driftline
