#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "vqseg/core.hpp"

namespace vqseg {

struct KMeansResult {
  Codebook codebook;
  std::vector<CodeIndex> assignment;
  // SSE after each assignment step; non-increasing.
  std::vector<double> sse_history;
  std::size_t iterations = 0;
};

// k-means++ seeding followed by Lloyd iterations until the assignment stops
// changing or max_iters is reached. Empty clusters are reseeded with the
// point farthest from its centroid.
KMeansResult kmeans(const Matrix& points, std::size_t num_codes, std::size_t max_iters,
                    std::uint64_t seed);

inline Codebook kmeans_codebook(const Matrix& points, std::size_t num_codes,
                                std::size_t max_iters, std::uint64_t seed) {
  return kmeans(points, num_codes, max_iters, seed).codebook;
}

// Stacks the frames of several utterances into one matrix.
Matrix pool_frames(const std::vector<FeatureSequence>& utterances);

}  // namespace vqseg
