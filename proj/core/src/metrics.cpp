#include "driftline/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "driftline/embed.hpp"
#include "driftline/errors.hpp"

namespace driftline {
namespace {

double sq_dist(const double* a, const double* b, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

// Collects per-cluster point indices, skipping noise.
std::vector<std::vector<int>> members_by_cluster(const ClusterLabels& labels) {
  std::vector<std::vector<int>> members(labels.k);
  for (int i = 0; i < static_cast<int>(labels.labels.size()); ++i) {
    const int l = labels.labels[i];
    if (l >= 0) members[l].push_back(i);
  }
  return members;
}

}  // namespace

double silhouette_score(const Matrix& points, const ClusterLabels& labels) {
  const auto members = members_by_cluster(labels);
  int populated = 0;
  for (const auto& m : members)
    if (!m.empty()) ++populated;
  if (populated < 2) throw FewerThanTwoClustersError();

  const int d = points.cols;
  double total = 0.0;
  int counted = 0;
  for (int c = 0; c < labels.k; ++c) {
    for (int i : members[c]) {
      ++counted;
      if (members[c].size() == 1) continue;  // singleton contributes 0

      double a = 0.0;
      for (int j : members[c])
        if (j != i) a += std::sqrt(sq_dist(points.row(i), points.row(j), d));
      a /= static_cast<double>(members[c].size() - 1);

      double b = std::numeric_limits<double>::infinity();
      for (int o = 0; o < labels.k; ++o) {
        if (o == c || members[o].empty()) continue;
        double mean = 0.0;
        for (int j : members[o]) mean += std::sqrt(sq_dist(points.row(i), points.row(j), d));
        mean /= static_cast<double>(members[o].size());
        b = std::min(b, mean);
      }

      const double den = std::max(a, b);
      if (den > 0.0) total += (b - a) / den;
    }
  }
  return total / static_cast<double>(counted);
}

double davies_bouldin(const Matrix& points, const ClusterLabels& labels) {
  const auto members = members_by_cluster(labels);
  std::vector<int> live;
  for (int c = 0; c < labels.k; ++c)
    if (!members[c].empty()) live.push_back(c);
  if (live.size() < 2) throw FewerThanTwoClustersError();

  const int d = points.cols;
  const int k = static_cast<int>(live.size());

  std::vector<std::vector<double>> centroid(k, std::vector<double>(d, 0.0));
  std::vector<double> scatter(k, 0.0);
  for (int c = 0; c < k; ++c) {
    for (int i : members[live[c]]) {
      const double* p = points.row(i);
      for (int j = 0; j < d; ++j) centroid[c][j] += p[j];
    }
    for (int j = 0; j < d; ++j) centroid[c][j] /= static_cast<double>(members[live[c]].size());
    for (int i : members[live[c]])
      scatter[c] += std::sqrt(sq_dist(points.row(i), centroid[c].data(), d));
    scatter[c] /= static_cast<double>(members[live[c]].size());
  }

  double total = 0.0;
  for (int a = 0; a < k; ++a) {
    double worst = 0.0;
    for (int b = 0; b < k; ++b) {
      if (a == b) continue;
      const double m = std::sqrt(sq_dist(centroid[a].data(), centroid[b].data(), d));
      if (m < 1e-15) throw CoincidentCentroidsError();
      worst = std::max(worst, (scatter[a] + scatter[b]) / m);
    }
    total += worst;
  }
  return total / static_cast<double>(k);
}

double cohesion(const std::vector<const Vec*>& members, const Vec& centroid) {
  if (members.empty()) throw EmptyClusterError();
  double total = 0.0;
  for (const Vec* m : members) {
    if (m->size() != centroid.size()) throw DimensionMismatchError();
    total += euclidean_distance(*m, centroid);
  }
  return total / static_cast<double>(members.size());
}

std::optional<double> cohesion_zscore(double current, const std::vector<double>& history,
                                      int min_history, double sigma_floor) {
  if (static_cast<int>(history.size()) < min_history) return std::nullopt;
  double mean = 0.0;
  for (double v : history) mean += v;
  mean /= static_cast<double>(history.size());
  double var = 0.0;
  for (double v : history) var += (v - mean) * (v - mean);
  var /= static_cast<double>(history.size());
  const double sigma = std::sqrt(var);
  if (sigma < sigma_floor) return std::nullopt;
  return (current - mean) / sigma;
}

}  // namespace driftline
