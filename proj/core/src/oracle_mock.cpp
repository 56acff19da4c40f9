#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "driftline/cluster.hpp"
#include "driftline/embed.hpp"
#include "driftline/errors.hpp"
#include "driftline/markers.hpp"
#include "driftline/metrics.hpp"
#include "driftline/oracle.hpp"
#include "driftline/rng.hpp"

namespace driftline {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

const std::set<std::string>& stopwords() {
  static const std::set<std::string> words = {
      "the", "a",  "an",  "is",   "are",  "was", "were", "my",   "i",    "we",  "to",
      "of",  "and", "not", "in",   "on",   "for", "it",   "with", "cant", "cannot",
      "wont", "please", "help", "still", "after", "when", "keeps", "getting", "from",
      "about", "this", "that", "has", "have", "been", "be", "at", "me", "no", "now",
  };
  return words;
}

// Keyword table for the few-shot classifier stand-in; groups are probed in
// this order and the first hit wins.
const std::vector<std::pair<ServiceGroup, std::vector<std::string>>>& classifier_table() {
  static const std::vector<std::pair<ServiceGroup, std::vector<std::string>>> table = {
      {ServiceGroup::Compute, {"vm", "instance", "boot"}},
      {ServiceGroup::Networking, {"dns", "subnet", "firewall"}},
      {ServiceGroup::IdentitySecurity, {"login", "password", "mfa"}},
      {ServiceGroup::Storage, {"bucket", "volume", "disk"}},
      {ServiceGroup::DataServices, {"pipeline", "database", "etl"}},
      {ServiceGroup::BillingAccounts, {"invoice", "refund", "billing"}},
  };
  return table;
}

std::optional<std::string> theme_marker_title(const std::string& turn_text) {
  const std::string t = trim(turn_text);
  const std::size_t len = std::string(kThemeMarkerPrefix).size();
  if (t.rfind(kThemeMarkerPrefix, 0) != 0) return std::nullopt;
  const std::size_t close = t.find(kThemeMarkerSuffix, len);
  if (close == std::string::npos) return std::nullopt;
  return t.substr(len, close - len);
}

class MockOracleSuite final : public OracleSuite {
 public:
  explicit MockOracleSuite(const Config& config) : cfg_(config) {}

  std::string name() const override { return "mock"; }

  std::vector<Theme> segment_chat(const Chat& chat) const override {
    if (chat.turns.empty()) throw MalformedChatError("chat " + chat.chat_id + " has no turns");
    for (const auto& turn : chat.turns)
      if (trim(turn.text).empty())
        throw MalformedChatError("chat " + chat.chat_id + " has an empty turn");

    std::vector<Theme> themes;
    for (const auto& turn : chat.turns) {
      const auto title = theme_marker_title(turn.text);
      if (title.has_value()) {
        Theme t;
        t.chat_id = chat.chat_id;
        t.theme_title = *title;
        themes.push_back(std::move(t));
      }
      if (themes.empty()) {
        // Text before any marker opens an untitled theme.
        Theme t;
        t.chat_id = chat.chat_id;
        t.theme_title = "general";
        themes.push_back(std::move(t));
      }
      themes.back().utterance_indices.push_back(turn.turn_index);
    }
    return themes;
  }

  std::vector<std::string> extract_concerns(const Chat& chat, const Theme& theme,
                                            int /*context_window*/) const override {
    std::vector<std::string> out;
    const std::string tag(kConcernTag);
    for (int idx : theme.utterance_indices) {
      const Utterance* turn = nullptr;
      for (const auto& u : chat.turns)
        if (u.turn_index == idx) {
          turn = &u;
          break;
        }
      if (turn == nullptr || turn->speaker != Speaker::User) continue;
      const std::string text = trim(turn->text);
      if (text.rfind(tag, 0) != 0) continue;
      std::string body = trim(text.substr(tag.size()));
      // Compound sentences carry the conjunction marker between standalone parts.
      std::size_t pos = 0;
      while (true) {
        const std::size_t cut = body.find(kConjunctionMarker, pos);
        const std::string part =
            trim(cut == std::string::npos ? body.substr(pos) : body.substr(pos, cut - pos));
        if (!part.empty()) out.push_back(part);
        if (cut == std::string::npos) break;
        pos = cut + std::string(kConjunctionMarker).size();
      }
    }
    return out;
  }

  ServiceGroup classify_service_group(const std::string& concern_text) const override {
    if (trim(concern_text).empty()) throw EmptyTextError();
    const std::vector<std::string> tokens = tokenize(concern_text);
    const std::set<std::string> token_set(tokens.begin(), tokens.end());
    for (const auto& [group, keywords] : classifier_table())
      for (const auto& kw : keywords)
        if (token_set.count(kw) != 0) return group;
    return ServiceGroup::Others;
  }

  ClusterLabel label_cluster(const std::vector<std::string>& member_texts,
                             ServiceGroup group) const override {
    if (member_texts.empty()) throw OracleFailure("label_cluster needs at least one member");
    std::map<std::string, int> freq;
    for (const auto& text : member_texts)
      for (const auto& tok : tokenize(text))
        if (stopwords().count(tok) == 0) ++freq[tok];

    // Top two tokens by (count desc, token asc).
    std::vector<std::pair<std::string, int>> ranked(freq.begin(), freq.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    std::string title;
    for (std::size_t i = 0; i < ranked.size() && i < 2; ++i) {
      if (!title.empty()) title += ' ';
      title += ranked[i].first;
    }
    if (title.empty()) title = to_string(group) + " concerns";
    if (title.size() > 80) title.resize(80);

    std::ostringstream desc;
    desc << "Groups " << member_texts.size() << ' ' << to_string(group)
         << " concerns about " << title << '.';
    std::string description = desc.str();
    if (description.size() > 400) description.resize(400);
    return {title, description};
  }

  OracleDecision confirm_assignment(const Concern& concern,
                                    const std::vector<const Cluster*>& shortlist) const override {
    double best = -2.0;
    const Cluster* pick = nullptr;
    for (const Cluster* c : shortlist) {
      const double s = cosine_similarity(concern.embedding, c->centroid);
      if (s > best) {
        best = s;
        pick = c;
      }
    }
    std::ostringstream why;
    OracleDecision d;
    d.source = OracleSource::Mock;
    if (pick != nullptr && best >= cfg_.assign_threshold) {
      d.choice = pick->cluster_id;
      why << "centroid similarity " << best << " meets " << cfg_.assign_threshold;
    } else {
      d.choice = "none";
      if (pick == nullptr)
        why << "no candidate clusters";
      else
        why << "best centroid similarity " << best << " below " << cfg_.assign_threshold;
    }
    d.rationale = why.str();
    return d;
  }

  std::vector<std::vector<std::string>> propose_split(
      const Cluster& cluster, const std::vector<const Concern*>& members) const override {
    const int n = static_cast<int>(members.size());
    if (n < 2 * cfg_.min_cluster_size)
      throw SplitRefusedError("cluster " + cluster.cluster_id + " has " + std::to_string(n) +
                              " members, needs " + std::to_string(2 * cfg_.min_cluster_size));

    std::vector<Vec> embeddings;
    embeddings.reserve(members.size());
    for (const Concern* c : members) embeddings.push_back(c->embedding);
    const Matrix pts = to_matrix(embeddings);
    const std::uint64_t seed =
        mix_seed(cfg_.seed, fnv1a64(cluster.cluster_id.data(), cluster.cluster_id.size()));

    const int floor = cfg_.min_cluster_size / 2;
    double best_sil = -2.0;
    std::optional<ClusterLabels> best;
    for (int k = 2; k <= 3; ++k) {
      if (n < k) break;
      const ClusterLabels labels = kmeans(pts, k, seed);
      if (labels.k < 2) continue;
      std::vector<int> sizes(labels.k, 0);
      for (int l : labels.labels) ++sizes[l];
      if (*std::min_element(sizes.begin(), sizes.end()) < floor) continue;
      const double sil = silhouette_score(pts, labels);
      if (sil > best_sil) {
        best_sil = sil;
        best = labels;
      }
    }
    if (!best.has_value())
      throw SplitRefusedError("no balanced partition found for " + cluster.cluster_id);

    std::vector<std::vector<std::string>> parts(best->k);
    for (int i = 0; i < n; ++i) parts[best->labels[i]].push_back(members[i]->concern_id);
    return parts;
  }

  std::vector<std::vector<std::string>> form_new_clusters(
      const std::vector<const Concern*>& pool) const override {
    const int n = static_cast<int>(pool.size());
    if (n < cfg_.new_cluster_min) return {};

    std::vector<Vec> embeddings;
    embeddings.reserve(pool.size());
    for (const Concern* c : pool) embeddings.push_back(c->embedding);
    const Matrix pts = to_matrix(embeddings);

    HdbscanOptions opts;
    opts.min_cluster_size = cfg_.new_cluster_min;
    opts.min_samples = std::min(cfg_.min_samples, n - 1);
    opts.allow_single_cluster = true;
    const ClusterLabels labels = hdbscan(pts, opts);

    std::vector<std::vector<std::string>> groups;
    for (int c = 0; c < labels.k; ++c) {
      std::vector<int> idx;
      for (int i = 0; i < n; ++i)
        if (labels.labels[i] == c) idx.push_back(i);
      if (static_cast<int>(idx.size()) < cfg_.new_cluster_min) continue;

      // A viable topic must actually cohere around its own centroid;
      // this keeps sparse leftovers from being promoted.
      Vec centroid(pts.cols, 0.0);
      for (int i : idx)
        for (int j = 0; j < pts.cols; ++j) centroid[j] += pts.row(i)[j];
      for (double& x : centroid) x /= static_cast<double>(idx.size());
      if (norm(centroid) < 1e-12) continue;
      double mean_cos = 0.0;
      for (int i : idx) mean_cos += cosine_similarity(embeddings[i], centroid);
      mean_cos /= static_cast<double>(idx.size());
      if (mean_cos < cfg_.assign_threshold) continue;

      std::vector<std::string> ids;
      ids.reserve(idx.size());
      for (int i : idx) ids.push_back(pool[i]->concern_id);
      groups.push_back(std::move(ids));
    }
    return groups;
  }

  OracleDecision judge_merge(const Cluster& a, const Cluster& b,
                             const std::vector<std::string>& /*samples_a*/,
                             const std::vector<std::string>& /*samples_b*/) const override {
    const auto title_tokens = [](const std::string& title) {
      std::set<std::string> out;
      for (const auto& tok : tokenize(title))
        if (stopwords().count(tok) == 0) out.insert(tok);
      return out;
    };
    const std::set<std::string> ta = title_tokens(a.title);
    const std::set<std::string> tb = title_tokens(b.title);
    int common = 0;
    for (const auto& t : ta) common += tb.count(t) != 0 ? 1 : 0;
    const std::size_t smaller = std::min(ta.size(), tb.size());
    const double overlap = smaller == 0 ? 0.0 : static_cast<double>(common) / smaller;

    OracleDecision d;
    d.source = OracleSource::Mock;
    std::ostringstream why;
    why << "title token overlap " << overlap << " between '" << a.title << "' and '" << b.title
        << "'";
    d.rationale = why.str();
    d.choice = overlap >= 0.5 ? "merge" : "keep";
    return d;
  }

  OracleDecision judge_prune(const Cluster& cluster, double cluster_cohesion,
                             double group_median_cohesion) const override {
    OracleDecision d;
    d.source = OracleSource::Mock;
    std::ostringstream why;
    if (static_cast<int>(cluster.member_ids.size()) < cfg_.prune_min_count) {
      d.choice = "prune";
      why << "only " << cluster.member_ids.size() << " members, below floor "
          << cfg_.prune_min_count;
    } else if (cluster_cohesion > group_median_cohesion) {
      d.choice = "prune";
      why << "cohesion " << cluster_cohesion << " above group median " << group_median_cohesion;
    } else {
      d.choice = "keep";
      why << "cohesion " << cluster_cohesion << " within group norm";
    }
    d.rationale = why.str();
    return d;
  }

  std::string narrate_drift(const std::string& parent_title, int parent_count,
                            const std::vector<ChildLabel>& children) const override {
    std::ostringstream out;
    out << "Cluster '" << parent_title << "' (" << parent_count
        << " concerns) diverged and was split into " << children.size() << " topics:";
    for (std::size_t i = 0; i < children.size(); ++i) {
      out << (i == 0 ? " " : "; ") << "'" << children[i].title << "' (" << children[i].member_count
          << ")";
    }
    out << '.';
    std::string text = out.str();
    if (text.size() > 1000) {
      text.resize(997);
      text += "...";
    }
    return text;
  }

 private:
  Config cfg_;
};

}  // namespace

std::unique_ptr<OracleSuite> make_mock_oracles(const Config& config) {
  return std::make_unique<MockOracleSuite>(config);
}

}  // namespace driftline
