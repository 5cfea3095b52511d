#pragma once

#include <Eigen/Dense>
#include <vector>

namespace panelfe {

/* Partition of M items into groups labeled 1..G. */
struct Grouping {
  std::vector<int> labels; /* size M, values in 1..n_groups */
  int n_groups = 0;
  std::vector<int> sizes;  /* size n_groups */

  static Grouping from_labels(std::vector<int> labels);
  std::vector<std::vector<int>> members() const; /* 0-based item indices per group */
  void validate() const;
  /* Stricter check for partitioner output: all sizes 2 or 3, except a
   * single group of size M when M <= 3. */
  void validate_pair_triple() const;
};

/* Euclidean distances between rows; diagonal set to +infinity so self
 * pairs never win a minimization. */
Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& points);

struct PartitionTrace {
  int n_merges = 0;
  int n_splits = 0;
  int max_four_groups = 0; /* largest simultaneous count of size-4 groups */
};

/* Groups items into pairs and triples, greedily by distance:
 * start from singletons; while any group is a singleton, merge the closest
 * (singleton item, item in a group of size <= 3) pair; whenever a group of
 * four appears, immediately split it into the two pairs with the lowest
 * summed within-pair distance. Ties go to the smallest (i, then j) indices.
 * M = 1 returns the single item untouched; M <= 3 ends as one group. */
Grouping pair_triple_partition(const Eigen::MatrixXd& distances,
                               PartitionTrace* trace = nullptr);

/* Convenience: partition rows of a point matrix. */
Grouping cluster_rows(const Eigen::MatrixXd& points, PartitionTrace* trace = nullptr);

}  // namespace panelfe
