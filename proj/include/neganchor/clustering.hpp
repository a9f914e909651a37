#ifndef NEGANCHOR_CLUSTERING_HPP
#define NEGANCHOR_CLUSTERING_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "neganchor/embedding.hpp"

namespace neganchor {

struct KMeansResult {
  /// assignments[i] is the cluster of points[i], in [0, k).
  std::vector<std::size_t> assignments;
  std::vector<std::vector<double>> centroids;
  /// Within-cluster SSE after every assignment step; non-increasing.
  std::vector<double> sse_history;
  int iterations = 0;
  bool converged = false;
};

inline constexpr int kDefaultKMeansIters = 100;

/**
 * Lloyd's k-means with seeded k-means++ initialization, Euclidean distance.
 *
 * Ties in the assignment step go to the lowest centroid index. A cluster that
 * empties out is reseeded on the point farthest from its current centroid.
 * The returned centroids are the ones the final assignment was computed
 * against, so every point is assigned to its nearest returned centroid.
 *
 * Throws KTooLarge when k > points.size(), ParameterInvalid when k == 0 and
 * DimMismatch when the points disagree on dimension.
 */
KMeansResult kmeans(std::span<const EmbeddingVector> points, std::size_t k, std::uint64_t seed,
                    int max_iters = kDefaultKMeansIters);

double squared_distance(std::span<const double> a, std::span<const double> b);

/// Sum over points of the squared distance to the assigned centroid.
double within_cluster_sse(std::span<const EmbeddingVector> points,
                          std::span<const std::size_t> assignments,
                          const std::vector<std::vector<double>>& centroids);

struct ClusterAssignment {
  std::string item_id;
  std::size_t cluster = 0;
};

struct SplitResult {
  /// Both sorted ascending.
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;

  bool operator==(const SplitResult&) const = default;
};

/// Per cluster (ascending cluster id): sort members by id, shuffle with the
/// seeded generator, send the first ceil(size/2) to train and the rest to
/// test. Throws ParameterInvalid on empty input.
SplitResult split_per_cluster(std::span<const ClusterAssignment> assignments, std::uint64_t seed);

}  // namespace neganchor

#endif  // NEGANCHOR_CLUSTERING_HPP
