#include "driftline/cluster.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "driftline/errors.hpp"
#include "driftline/rng.hpp"

namespace driftline {
namespace {

std::atomic<std::uint64_t> g_hdbscan_calls{0};

constexpr double kLambdaCap = 1e12;  // stands in for 1/0 on duplicate points

double sq_dist(const double* a, const double* b, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

struct DendroNode {
  int left = -1;   // child id; < n means leaf point
  int right = -1;
  double weight = 0.0;  // mutual-reachability distance of the merge
  int size = 0;
};

// Condensed-hierarchy node. Points leave a node either one by one (exits)
// or all together when the node splits into two viable children.
struct CondNode {
  int parent = -1;
  double birth_lambda = 0.0;
  double split_lambda = 0.0;
  int child_a = -1;
  int child_b = -1;
  std::vector<std::pair<int, double>> exits;  // (point, exit lambda)
  double stability = 0.0;
};

void collect_leaves(const std::vector<DendroNode>& dendro, int n, int node, std::vector<int>& out) {
  std::vector<int> stack{node};
  while (!stack.empty()) {
    const int cur = stack.back();
    stack.pop_back();
    if (cur < n) {
      out.push_back(cur);
    } else {
      stack.push_back(dendro[cur - n].left);
      stack.push_back(dendro[cur - n].right);
    }
  }
}

int subtree_size(const std::vector<DendroNode>& dendro, int n, int node) {
  return node < n ? 1 : dendro[node - n].size;
}

ClusterLabels relabel_by_lowest_member(std::vector<int> raw, int n) {
  std::vector<int> order;  // raw cluster ids in order of first appearance
  std::vector<int> remap(raw.size(), -1);
  for (int i = 0; i < n; ++i) {
    const int r = raw[i];
    if (r < 0) continue;
    if (remap[r] < 0) {
      remap[r] = static_cast<int>(order.size());
      order.push_back(r);
    }
  }
  ClusterLabels out;
  out.labels.resize(n);
  for (int i = 0; i < n; ++i) out.labels[i] = raw[i] < 0 ? -1 : remap[raw[i]];
  out.k = static_cast<int>(order.size());
  return out;
}

}  // namespace

std::uint64_t hdbscan_call_count() { return g_hdbscan_calls.load(); }

ClusterLabels hdbscan(const Matrix& points, const HdbscanOptions& opts) {
  g_hdbscan_calls.fetch_add(1);

  const int n = points.rows;
  const int d = points.cols;
  const int mcs = opts.min_cluster_size;
  if (mcs < 2) throw TooFewPointsError("min_cluster_size must be at least 2");
  if (n < mcs) throw TooFewPointsError();
  for (double x : points.data)
    if (!std::isfinite(x)) throw NonFiniteInputError();

  // Pairwise distances and core distances (distance to the min_samples-th
  // nearest other point, clamped when the data set is small).
  std::vector<double> dist(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double dd = std::sqrt(sq_dist(points.row(i), points.row(j), d));
      dist[static_cast<std::size_t>(i) * n + j] = dd;
      dist[static_cast<std::size_t>(j) * n + i] = dd;
    }
  }
  const int k_core = std::min(opts.min_samples, n - 1);
  std::vector<double> core(n, 0.0);
  {
    std::vector<double> row(n - 1);
    for (int i = 0; i < n; ++i) {
      int m = 0;
      for (int j = 0; j < n; ++j)
        if (j != i) row[m++] = dist[static_cast<std::size_t>(i) * n + j];
      std::nth_element(row.begin(), row.begin() + (k_core - 1), row.end());
      core[i] = row[k_core - 1];
    }
  }
  const auto mreach = [&](int a, int b) {
    return std::max({core[a], core[b], dist[static_cast<std::size_t>(a) * n + b]});
  };

  // Prim's MST over the mutual-reachability graph, lowest index wins ties.
  struct Edge {
    int a, b;
    double w;
  };
  std::vector<Edge> mst;
  mst.reserve(n - 1);
  {
    std::vector<double> key(n, std::numeric_limits<double>::infinity());
    std::vector<int> link(n, -1);
    std::vector<char> in_tree(n, 0);
    key[0] = 0.0;
    for (int step = 0; step < n; ++step) {
      int best = -1;
      for (int i = 0; i < n; ++i)
        if (!in_tree[i] && (best < 0 || key[i] < key[best])) best = i;
      in_tree[best] = 1;
      if (link[best] >= 0) {
        int a = link[best], b = best;
        if (a > b) std::swap(a, b);
        mst.push_back({a, b, key[best]});
      }
      for (int i = 0; i < n; ++i) {
        if (in_tree[i]) continue;
        const double w = mreach(best, i);
        if (w < key[i]) {
          key[i] = w;
          link[i] = best;
        }
      }
    }
  }
  std::sort(mst.begin(), mst.end(), [](const Edge& x, const Edge& y) {
    if (x.w != y.w) return x.w < y.w;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });

  // Single-linkage dendrogram by ascending merge weight.
  std::vector<DendroNode> dendro;
  dendro.reserve(n - 1);
  std::vector<int> owner(2 * n - 1);  // component representative -> dendro id
  std::iota(owner.begin(), owner.end(), 0);
  std::vector<int> uf(2 * n - 1);
  std::iota(uf.begin(), uf.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (uf[x] != x) {
      uf[x] = uf[uf[x]];
      x = uf[x];
    }
    return x;
  };
  for (std::size_t e = 0; e < mst.size(); ++e) {
    const int ra = find(mst[e].a);
    const int rb = find(mst[e].b);
    const int id = n + static_cast<int>(e);
    DendroNode node;
    node.left = owner[ra];
    node.right = owner[rb];
    node.weight = mst[e].w;
    node.size = subtree_size(dendro, n, node.left) + subtree_size(dendro, n, node.right);
    dendro.push_back(node);
    uf[ra] = id;
    uf[rb] = id;
    owner[id] = id;
  }
  const int root = 2 * n - 2;

  // Condense the hierarchy: children smaller than min_cluster_size fall out
  // of their cluster as point exits; the cluster persists through the larger
  // side until a split yields two viable children.
  std::vector<CondNode> cond(1);
  cond[0].birth_lambda = 0.0;
  struct Frame {
    int dendro_node;
    int cond_id;
  };
  std::vector<Frame> stack{{root, 0}};
  std::vector<int> leaves;
  std::vector<int> point_exit_node(n, 0);
  std::vector<double> point_exit_lambda(n, kLambdaCap);
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    const DendroNode& dn = dendro[f.dendro_node - n];
    const double lam = dn.weight <= 0.0 ? kLambdaCap : std::min(1.0 / dn.weight, kLambdaCap);
    const int sa = subtree_size(dendro, n, dn.left);
    const int sb = subtree_size(dendro, n, dn.right);
    const bool va = sa >= mcs;
    const bool vb = sb >= mcs;
    if (va && vb) {
      const int ca = static_cast<int>(cond.size());
      cond.push_back({});
      const int cb = static_cast<int>(cond.size());
      cond.push_back({});
      cond[ca].parent = f.cond_id;
      cond[ca].birth_lambda = lam;
      cond[cb].parent = f.cond_id;
      cond[cb].birth_lambda = lam;
      cond[f.cond_id].child_a = ca;
      cond[f.cond_id].child_b = cb;
      cond[f.cond_id].split_lambda = lam;
      stack.push_back({dn.left, ca});
      stack.push_back({dn.right, cb});
    } else {
      const auto shed = [&](int side_node) {
        leaves.clear();
        collect_leaves(dendro, n, side_node, leaves);
        std::sort(leaves.begin(), leaves.end());
        for (int p : leaves) {
          cond[f.cond_id].exits.emplace_back(p, lam);
          point_exit_node[p] = f.cond_id;
          point_exit_lambda[p] = lam;
        }
      };
      if (va) {
        shed(dn.right);
        stack.push_back({dn.left, f.cond_id});
      } else if (vb) {
        shed(dn.left);
        stack.push_back({dn.right, f.cond_id});
      } else {
        shed(dn.left);
        shed(dn.right);
      }
    }
  }

  // Stability: total excess lambda mass gathered while points stayed inside.
  std::vector<int> birth_size(cond.size(), 0);
  for (std::size_t c = cond.size(); c-- > 0;) {
    int sz = static_cast<int>(cond[c].exits.size());
    if (cond[c].child_a >= 0)
      sz += birth_size[cond[c].child_a] + birth_size[cond[c].child_b];
    birth_size[c] = sz;
  }
  for (std::size_t c = 0; c < cond.size(); ++c) {
    double s = 0.0;
    for (const auto& [p, lam] : cond[c].exits) s += lam - cond[c].birth_lambda;
    if (cond[c].child_a >= 0) {
      const int transferred = birth_size[cond[c].child_a] + birth_size[cond[c].child_b];
      s += (cond[c].split_lambda - cond[c].birth_lambda) * transferred;
    }
    cond[c].stability = s;
  }

  // Excess-of-mass selection, bottom-up; the root itself is never a
  // candidate (a tree that never splits would otherwise swallow everything).
  std::vector<char> flagged(cond.size(), 0);
  std::vector<double> sel_stab(cond.size(), 0.0);
  for (std::size_t c = cond.size(); c-- > 0;) {
    if (cond[c].child_a < 0) {
      sel_stab[c] = cond[c].stability;
      flagged[c] = c != 0;
      continue;
    }
    const double child_sum = sel_stab[cond[c].child_a] + sel_stab[cond[c].child_b];
    if (c != 0 && cond[c].stability >= child_sum) {
      flagged[c] = 1;
      sel_stab[c] = cond[c].stability;
    } else {
      sel_stab[c] = child_sum;
    }
  }
  // A node is selected iff flagged with no flagged ancestor.
  std::vector<char> selected(cond.size(), 0);
  for (std::size_t c = 0; c < cond.size(); ++c) {
    if (!flagged[c]) continue;
    bool shadowed = false;
    for (int up = cond[c].parent; up >= 0; up = cond[up].parent)
      if (flagged[up]) {
        shadowed = true;
        break;
      }
    selected[c] = !shadowed;
  }

  std::vector<int> raw(n, -1);
  bool any_selected = false;
  for (std::size_t c = 0; c < cond.size(); ++c) any_selected |= selected[c] != 0;

  if (any_selected) {
    for (int p = 0; p < n; ++p) {
      for (int c = point_exit_node[p]; c >= 0; c = cond[c].parent) {
        if (selected[c]) {
          raw[p] = c;
          break;
        }
      }
    }
  } else if (opts.allow_single_cluster && cond.size() == 1) {
    // Densest level set of the root: the lambda threshold maximizing
    // lambda * |{p : exit >= lambda}| over cuts that keep at least
    // min_cluster_size points.
    std::vector<double> lams(point_exit_lambda);
    std::sort(lams.begin(), lams.end(), std::greater<>());
    double best_mass = -1.0;
    double best_lambda = 0.0;
    for (int i = mcs - 1; i < n; ++i) {
      const double lam = lams[i];
      const double mass = lam * (i + 1);
      if (mass > best_mass) {
        best_mass = mass;
        best_lambda = lam;
      }
    }
    for (int p = 0; p < n; ++p)
      if (point_exit_lambda[p] >= best_lambda) raw[p] = 0;
  }

  return relabel_by_lowest_member(std::move(raw), n);
}

ClusterLabels kmeans(const Matrix& points, int k, std::uint64_t seed) {
  const int n = points.rows;
  const int d = points.cols;
  if (k < 1 || n < k) throw TooFewPointsError();

  Rng rng(mix_seed(seed, 0x6b6d65616e73ull));

  // k-means++ seeding.
  std::vector<int> centers_idx;
  centers_idx.push_back(static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n))));
  std::vector<double> d2(n, 0.0);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int ci : centers_idx)
        best = std::min(best, sq_dist(points.row(i), points.row(ci), d));
      d2[i] = best;
      total += best;
    }
    int pick = -1;
    if (total <= 0.0) {
      for (int i = 0; i < n && pick < 0; ++i)
        if (std::find(centers_idx.begin(), centers_idx.end(), i) == centers_idx.end()) pick = i;
    } else {
      const double r = rng.next_double() * total;
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= r) {
          pick = i;
          break;
        }
      }
      if (pick < 0) pick = n - 1;
    }
    centers_idx.push_back(pick);
  }

  std::vector<double> centers(static_cast<std::size_t>(k) * d);
  for (int c = 0; c < k; ++c)
    std::copy_n(points.row(centers_idx[c]), d, centers.begin() + static_cast<std::size_t>(c) * d);

  std::vector<int> assign(n, -1);
  std::vector<int> counts(k, 0);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double dd = sq_dist(points.row(i), centers.data() + static_cast<std::size_t>(c) * d, d);
        if (dd < best_d) {
          best_d = dd;
          best = c;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;

    std::fill(centers.begin(), centers.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (int i = 0; i < n; ++i) {
      double* c = centers.data() + static_cast<std::size_t>(assign[i]) * d;
      const double* p = points.row(i);
      for (int j = 0; j < d; ++j) c[j] += p[j];
      ++counts[assign[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Reseed an empty center with the point farthest from its center.
        int far = 0;
        double far_d = -1.0;
        for (int i = 0; i < n; ++i) {
          const double dd =
              sq_dist(points.row(i), centers.data() + static_cast<std::size_t>(assign[i]) * d, d);
          if (dd > far_d) {
            far_d = dd;
            far = i;
          }
        }
        std::copy_n(points.row(far), d, centers.begin() + static_cast<std::size_t>(c) * d);
      } else {
        double* cc = centers.data() + static_cast<std::size_t>(c) * d;
        for (int j = 0; j < d; ++j) cc[j] /= counts[c];
      }
    }
  }

  return relabel_by_lowest_member(std::move(assign), n);
}

}  // namespace driftline
