#pragma once

// Density-based clustering for base cluster creation plus a k-means baseline.

#include <cstdint>

#include "driftline/reduce.hpp"

namespace driftline {

struct ClusterLabels {
  std::vector<int> labels;  // -1 = noise, else 0..k-1
  int k = 0;
};

struct HdbscanOptions {
  int min_cluster_size = 10;
  int min_samples = 5;
  // When true and the condensed hierarchy never splits into two viable
  // clusters, the densest level set of the root is offered as a single
  // cluster instead of labelling everything noise. Used for harvesting the
  // unassigned pool, where a lone emerging topic is the common case.
  bool allow_single_cluster = false;
};

// Full pipeline: core distances -> mutual reachability -> MST (Prim,
// lowest-index tie-break) -> single-linkage hierarchy -> condensation by
// min_cluster_size -> excess-of-mass extraction. Cluster indices are ordered
// by their lowest member index. Throws TooFewPointsError / NonFiniteInputError.
ClusterLabels hdbscan(const Matrix& points, const HdbscanOptions& opts);

// Lloyd's iterations from seeded k-means++ starts; stops when assignments
// are stable or after 100 rounds. Deterministic under the seed.
ClusterLabels kmeans(const Matrix& points, int k, std::uint64_t seed);

// Running count of hdbscan() invocations, used to assert that nothing
// re-clusters a whole group after the base build.
std::uint64_t hdbscan_call_count();

}  // namespace driftline
