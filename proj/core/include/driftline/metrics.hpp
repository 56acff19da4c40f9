#pragma once

// Cluster-quality metrics: silhouette, Davies-Bouldin, centroid cohesion and
// its z-score against a cluster's own history.

#include <optional>

#include "driftline/cluster.hpp"
#include "driftline/types.hpp"

namespace driftline {

inline constexpr double kSigmaFloor = 1e-9;
// Groups larger than this are silhouette-scored on a seeded uniform sample.
inline constexpr int kSilhouetteSampleCap = 2000;

// Mean over points of (b - a) / max(a, b); noise labels are excluded,
// singleton clusters contribute 0, and max(a, b) == 0 contributes 0.
// Throws FewerThanTwoClustersError.
double silhouette_score(const Matrix& points, const ClusterLabels& labels);

// (1/k) * sum_i max_j (S_i + S_j) / M_ij over non-noise clusters. Throws
// FewerThanTwoClustersError / CoincidentCentroidsError.
double davies_bouldin(const Matrix& points, const ClusterLabels& labels);

// Mean Euclidean distance of the members to the centroid. Throws
// EmptyClusterError / DimensionMismatchError.
double cohesion(const std::vector<const Vec*>& members, const Vec& centroid);

// Z = (current - mean(history)) / stddev(history), population form over all
// prior values. Returns nullopt when the history is shorter than min_history
// or its spread is below sigma_floor.
std::optional<double> cohesion_zscore(double current, const std::vector<double>& history,
                                      int min_history, double sigma_floor = kSigmaFloor);

}  // namespace driftline
