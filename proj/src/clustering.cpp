#include "panelfe/clustering.hpp"

#include <algorithm>
#include <limits>

#include "panelfe/errors.hpp"

namespace panelfe {

Grouping Grouping::from_labels(std::vector<int> in) {
  Grouping g;
  g.labels = std::move(in);
  for (int v : g.labels) g.n_groups = std::max(g.n_groups, v);
  g.sizes.assign(static_cast<size_t>(g.n_groups), 0);
  for (int v : g.labels) {
    if (v < 1 || v > g.n_groups) throw DomainError("group label out of range");
    ++g.sizes[static_cast<size_t>(v - 1)];
  }
  g.validate();
  return g;
}

std::vector<std::vector<int>> Grouping::members() const {
  std::vector<std::vector<int>> out(static_cast<size_t>(n_groups));
  for (size_t i = 0; i < labels.size(); ++i)
    out[static_cast<size_t>(labels[i] - 1)].push_back(static_cast<int>(i));
  return out;
}

void Grouping::validate() const {
  if (labels.empty() || n_groups < 1) throw DomainError("empty grouping");
  if (sizes.size() != static_cast<size_t>(n_groups))
    throw DomainError("grouping size table does not match group count");
  std::vector<int> counts(static_cast<size_t>(n_groups), 0);
  for (int v : labels) {
    if (v < 1 || v > n_groups) throw DomainError("group label out of range");
    ++counts[static_cast<size_t>(v - 1)];
  }
  for (int g = 0; g < n_groups; ++g) {
    if (counts[static_cast<size_t>(g)] == 0)
      throw DomainError("group " + std::to_string(g + 1) + " is empty");
    if (counts[static_cast<size_t>(g)] != sizes[static_cast<size_t>(g)])
      throw DomainError("grouping size table is inconsistent");
  }
}

void Grouping::validate_pair_triple() const {
  validate();
  const int m = static_cast<int>(labels.size());
  if (m <= 3) {
    if (n_groups != 1) throw DomainError("expected one group for 3 or fewer items");
    return;
  }
  for (int s : sizes)
    if (s != 2 && s != 3)
      throw DomainError("group of size " + std::to_string(s) +
                        " in a pair/triple partition");
}

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& points) {
  const int m = static_cast<int>(points.rows());
  if (m < 1) throw DomainError("no points");
  Eigen::MatrixXd d(m, m);
  for (int i = 0; i < m; ++i) {
    d(i, i) = std::numeric_limits<double>::infinity();
    for (int j = i + 1; j < m; ++j) {
      const double v = (points.row(i) - points.row(j)).norm();
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

namespace {

/* Cheapest split of a four-item group into two pairs. Candidates pair the
 * smallest index with each of the others; ties keep the earliest, which is
 * the lexicographically smallest pairing. */
void split_four(const Eigen::MatrixXd& d, const std::vector<int>& quad,
                std::vector<int>& pair_a, std::vector<int>& pair_b) {
  std::vector<int> q = quad;
  std::sort(q.begin(), q.end());
  const int a = q[0], b = q[1], c = q[2], e = q[3];
  const double cost_ab = d(a, b) + d(c, e);
  const double cost_ac = d(a, c) + d(b, e);
  const double cost_ae = d(a, e) + d(b, c);
  if (cost_ab <= cost_ac && cost_ab <= cost_ae) {
    pair_a = {a, b};
    pair_b = {c, e};
  } else if (cost_ac <= cost_ae) {
    pair_a = {a, c};
    pair_b = {b, e};
  } else {
    pair_a = {a, e};
    pair_b = {b, c};
  }
}

}  // namespace

Grouping pair_triple_partition(const Eigen::MatrixXd& distances, PartitionTrace* trace) {
  const int m = static_cast<int>(distances.rows());
  if (m < 1 || distances.cols() != m) throw DomainError("bad distance matrix");

  std::vector<std::vector<int>> clusters;
  clusters.reserve(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) clusters.push_back({i});
  std::vector<int> cluster_of(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) cluster_of[static_cast<size_t>(i)] = i;

  if (trace) *trace = PartitionTrace{};

  const auto done = [&]() {
    if (m == 1) return true;
    for (const auto& c : clusters)
      if (c.size() != 2 && c.size() != 3) return false;
    return true;
  };

  /* Each pass merges or splits, so 3*m iterations is a safe ceiling. */
  for (int guard = 0; guard < 3 * m + 8 && !done(); ++guard) {
    if (trace) {
      int fours = 0;
      for (const auto& c : clusters)
        if (c.size() == 4) ++fours;
      trace->max_four_groups = std::max(trace->max_four_groups, fours);
    }

    int quad = -1;
    for (size_t c = 0; c < clusters.size(); ++c)
      if (clusters[c].size() == 4) {
        quad = static_cast<int>(c);
        break;
      }

    if (quad >= 0) {
      std::vector<int> pair_a, pair_b;
      split_four(distances, clusters[static_cast<size_t>(quad)], pair_a, pair_b);
      clusters[static_cast<size_t>(quad)] = pair_a;
      clusters.push_back(pair_b);
      for (int i : pair_b)
        cluster_of[static_cast<size_t>(i)] = static_cast<int>(clusters.size()) - 1;
      if (trace) ++trace->n_splits;
      continue;
    }

    /* Closest (singleton item, item in a group of at most three). Scanning
     * i then j in ascending order with a strict inequality realizes the
     * smallest-(i, j) tie break. */
    int best_i = -1, best_j = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      if (clusters[static_cast<size_t>(cluster_of[static_cast<size_t>(i)])].size() != 1)
        continue;
      for (int j = 0; j < m; ++j) {
        if (j == i) continue;
        if (clusters[static_cast<size_t>(cluster_of[static_cast<size_t>(j)])].size() > 3)
          continue;
        if (distances(i, j) < best) {
          best = distances(i, j);
          best_i = i;
          best_j = j;
        }
      }
    }
    if (best_i < 0) break; /* M = 1: nothing to merge with */

    const int from = cluster_of[static_cast<size_t>(best_i)];
    const int into = cluster_of[static_cast<size_t>(best_j)];
    for (int i : clusters[static_cast<size_t>(from)]) {
      clusters[static_cast<size_t>(into)].push_back(i);
      cluster_of[static_cast<size_t>(i)] = into;
    }
    clusters[static_cast<size_t>(from)].clear();
    clusters.erase(
        std::remove_if(clusters.begin(), clusters.end(),
                       [](const std::vector<int>& c) { return c.empty(); }),
        clusters.end());
    for (size_t c = 0; c < clusters.size(); ++c)
      for (int i : clusters[c]) cluster_of[static_cast<size_t>(i)] = static_cast<int>(c);
    if (trace) ++trace->n_merges;
  }

  if (!done()) throw DomainError("pair/triple partition failed to terminate");

  /* Label groups 1..G in order of their smallest member. */
  for (auto& c : clusters) std::sort(c.begin(), c.end());
  std::sort(clusters.begin(), clusters.end(),
            [](const std::vector<int>& a, const std::vector<int>& b) {
              return a.front() < b.front();
            });
  Grouping g;
  g.labels.assign(static_cast<size_t>(m), 0);
  g.n_groups = static_cast<int>(clusters.size());
  g.sizes.resize(clusters.size());
  for (size_t c = 0; c < clusters.size(); ++c) {
    g.sizes[c] = static_cast<int>(clusters[c].size());
    for (int i : clusters[c]) g.labels[static_cast<size_t>(i)] = static_cast<int>(c) + 1;
  }
  g.validate();
  return g;
}

Grouping cluster_rows(const Eigen::MatrixXd& points, PartitionTrace* trace) {
  return pair_triple_partition(pairwise_distances(points), trace);
}

}  // namespace panelfe
