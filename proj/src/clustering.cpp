#include "neganchor/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "neganchor/error.hpp"
#include "neganchor/random.hpp"

namespace neganchor {

double standard_normal(Rng& rng) {
  double u1 = uniform_unit(rng);
  while (u1 <= 0.0) u1 = uniform_unit(rng);
  const double u2 = uniform_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

double within_cluster_sse(std::span<const EmbeddingVector> points,
                          std::span<const std::size_t> assignments,
                          const std::vector<std::vector<double>>& centroids) {
  double sse = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    sse += squared_distance(points[i].values, centroids[assignments[i]]);
  }
  return sse;
}

namespace {

std::vector<std::vector<double>> seed_plus_plus(std::span<const EmbeddingVector> points,
                                                std::size_t k, Rng& rng) {
  const std::size_t n = points.size();
  std::vector<std::vector<double>> centers;
  centers.reserve(k);
  std::vector<bool> chosen(n, false);
  std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());

  std::size_t pick = static_cast<std::size_t>(uniform_below(rng, n));
  while (true) {
    chosen[pick] = true;
    centers.push_back(points[pick].values);
    if (centers.size() == k) break;

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (chosen[i]) {
        min_dist[i] = 0.0;
        continue;
      }
      min_dist[i] = std::min(min_dist[i], squared_distance(points[i].values, centers.back()));
      total += min_dist[i];
    }

    if (total > 0.0) {
      const double target = uniform_unit(rng) * total;
      double running = 0.0;
      pick = n;
      std::size_t last_positive = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (min_dist[i] <= 0.0) continue;
        last_positive = i;
        running += min_dist[i];
        if (running > target) {
          pick = i;
          break;
        }
      }
      if (pick == n) pick = last_positive;
    } else {
      // Every remaining point duplicates a chosen center.
      std::vector<std::size_t> rest;
      for (std::size_t i = 0; i < n; ++i)
        if (!chosen[i]) rest.push_back(i);
      pick = rest[uniform_below(rng, rest.size())];
    }
  }
  return centers;
}

double assign_nearest(std::span<const EmbeddingVector> points,
                      const std::vector<std::vector<double>>& centroids,
                      std::vector<std::size_t>& assignments, std::vector<double>& distances) {
  double sse = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::size_t best = 0;
    double best_d = squared_distance(points[i].values, centroids[0]);
    for (std::size_t c = 1; c < centroids.size(); ++c) {
      const double d = squared_distance(points[i].values, centroids[c]);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    assignments[i] = best;
    distances[i] = best_d;
    sse += best_d;
  }
  return sse;
}

}  // namespace

KMeansResult kmeans(std::span<const EmbeddingVector> points, std::size_t k, std::uint64_t seed,
                    int max_iters) {
  if (k == 0) throw Error(ErrorKind::ParameterInvalid, "k must be positive");
  if (k > points.size()) {
    throw Error(ErrorKind::KTooLarge, "k=" + std::to_string(k) + " exceeds " +
                                          std::to_string(points.size()) + " points");
  }
  const std::size_t dim = points.front().dim();
  for (const auto& p : points) {
    if (p.dim() != dim) throw Error(ErrorKind::DimMismatch, "k-means points disagree on dim");
  }
  if (max_iters < 1) max_iters = 1;

  const std::size_t n = points.size();
  Rng rng(seed);
  KMeansResult result;
  result.centroids = seed_plus_plus(points, k, rng);
  result.assignments.assign(n, 0);

  std::vector<std::size_t> previous;
  std::vector<double> distances(n, 0.0);

  for (int iter = 0; iter < max_iters; ++iter) {
    const double sse = assign_nearest(points, result.centroids, result.assignments, distances);
    result.sse_history.push_back(sse);
    result.iterations = iter + 1;
    if (result.assignments == previous) {
      result.converged = true;
      break;
    }
    previous = result.assignments;
    if (iter + 1 == max_iters) break;

    // Update step; the working copy may diverge from `previous` via reseeding.
    std::vector<std::size_t> working = result.assignments;
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t c : working) ++counts[c];

    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[working[i]] < 2) continue;
        if (far == n || distances[i] > distances[far]) far = i;
      }
      if (far == n) continue;  // cannot happen while k <= n
      --counts[working[far]];
      working[far] = c;
      counts[c] = 1;
      distances[far] = 0.0;
      result.centroids[c] = points[far].values;
    }

    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      auto& s = sums[working[i]];
      for (std::size_t d = 0; d < dim; ++d) s[d] += points[i].values[d];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t d = 0; d < dim; ++d) {
        result.centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);
      }
    }
  }
  return result;
}

SplitResult split_per_cluster(std::span<const ClusterAssignment> assignments, std::uint64_t seed) {
  if (assignments.empty()) throw Error(ErrorKind::ParameterInvalid, "no assignments to split");

  std::map<std::size_t, std::vector<std::string>> members;
  for (const auto& a : assignments) members[a.cluster].push_back(a.item_id);

  Rng rng(seed);
  SplitResult split;
  for (auto& [cluster, ids] : members) {
    std::sort(ids.begin(), ids.end());
    shuffle_in_place(std::span<std::string>(ids), rng);
    const std::size_t train_count = (ids.size() + 1) / 2;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      (i < train_count ? split.train_ids : split.test_ids).push_back(ids[i]);
    }
  }
  std::sort(split.train_ids.begin(), split.train_ids.end());
  std::sort(split.test_ids.begin(), split.test_ids.end());
  return split;
}

}  // namespace neganchor
