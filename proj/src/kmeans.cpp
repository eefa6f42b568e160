#include "vqseg/kmeans.hpp"

#include <algorithm>
#include <random>

namespace vqseg {

namespace {

CodeDistance nearest_row(std::span<const double> x, const Matrix& centroids) {
  CodeDistance best{0, squared_distance(x, centroids.row(0))};
  for (std::size_t k = 1; k < centroids.rows(); ++k) {
    const double d = squared_distance(x, centroids.row(k));
    if (d < best.distance) best = {static_cast<CodeIndex>(k), d};
  }
  return best;
}

Matrix seed_plus_plus(const Matrix& points, std::size_t num_codes, std::mt19937_64& rng) {
  const std::size_t n = points.rows();
  Matrix centroids(num_codes, points.cols());
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::size_t chosen = pick(rng);
  std::ranges::copy(points.row(chosen), centroids.row(0).begin());

  std::vector<double> weight(n);
  for (std::size_t i = 0; i < n; ++i) weight[i] = squared_distance(points.row(i), centroids.row(0));
  for (std::size_t c = 1; c < num_codes; ++c) {
    double total = 0.0;
    for (double w : weight) total += w;
    if (total > 0.0) {
      const double r = std::uniform_real_distribution<double>(0.0, total)(rng);
      double acc = 0.0;
      chosen = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (weight[i] == 0.0) continue;
        acc += weight[i];
        chosen = i;
        if (acc > r) break;
      }
    } else {
      chosen = pick(rng);
    }
    std::ranges::copy(points.row(chosen), centroids.row(c).begin());
    for (std::size_t i = 0; i < n; ++i) {
      weight[i] = std::min(weight[i], squared_distance(points.row(i), centroids.row(c)));
    }
  }
  return centroids;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, std::size_t num_codes, std::size_t max_iters,
                    std::uint64_t seed) {
  const std::size_t n = points.rows();
  const std::size_t dim = points.cols();
  if (num_codes < 1) throw ContractViolation("k-means needs K >= 1");
  if (n < num_codes) {
    throw ContractViolation("k-means needs at least K = " + std::to_string(num_codes) +
                            " points, got " + std::to_string(n));
  }
  if (max_iters < 1) throw ContractViolation("k-means needs at least one iteration");
  if (!points.all_finite()) throw ContractViolation("k-means input has a non-finite value");

  std::mt19937_64 rng(seed);
  Matrix centroids = seed_plus_plus(points, num_codes, rng);

  constexpr auto kUnassigned = static_cast<CodeIndex>(-1);
  std::vector<CodeIndex> assignment(n, kUnassigned);
  std::vector<double> dist(n, 0.0);
  std::vector<double> sse_history;
  std::size_t iterations = 0;

  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const CodeDistance best = nearest_row(points.row(i), centroids);
      changed |= best.code != assignment[i];
      assignment[i] = best.code;
      dist[i] = best.distance;
      sse += best.distance;
    }
    sse_history.push_back(sse);
    iterations = iter + 1;
    if (!changed) break;

    Matrix sums(num_codes, dim);
    std::vector<std::size_t> counts(num_codes, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto row = sums.row(assignment[i]);
      const auto x = points.row(i);
      for (std::size_t d = 0; d < dim; ++d) row[d] += x[d];
      ++counts[assignment[i]];
    }
    for (std::size_t k = 0; k < num_codes; ++k) {
      if (counts[k] == 0) continue;
      auto c = centroids.row(k);
      const auto s = sums.row(k);
      for (std::size_t d = 0; d < dim; ++d) c[d] = s[d] / static_cast<double>(counts[k]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      dist[i] = squared_distance(points.row(i), centroids.row(assignment[i]));
    }
    for (std::size_t k = 0; k < num_codes; ++k) {
      if (counts[k] != 0) continue;
      const auto far = static_cast<std::size_t>(
          std::max_element(dist.begin(), dist.end()) - dist.begin());
      std::ranges::copy(points.row(far), centroids.row(k).begin());
      dist[far] = 0.0;
    }
  }

  return {Codebook(std::move(centroids)), std::move(assignment), std::move(sse_history), iterations};
}

Matrix pool_frames(const std::vector<FeatureSequence>& utterances) {
  if (utterances.empty()) throw ContractViolation("no utterances to pool");
  const std::size_t dim = utterances.front().dim();
  std::size_t total = 0;
  for (const auto& u : utterances) {
    if (u.dim() != dim) {
      throw ContractViolation("utterance '" + u.utt_id() + "' has D = " + std::to_string(u.dim()) +
                              ", expected " + std::to_string(dim));
    }
    total += u.num_frames();
  }
  std::vector<double> values;
  values.reserve(total * dim);
  for (const auto& u : utterances) {
    const auto v = u.data().values();
    values.insert(values.end(), v.begin(), v.end());
  }
  return Matrix(total, dim, std::move(values));
}

}  // namespace vqseg
