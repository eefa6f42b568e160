#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "vqseg/core.hpp"

namespace vqseg {

// Heap entry for merging two adjacent segments. Segments are identified by
// their start frame, which a left-absorbing merge never changes. The stamps
// snapshot each side's version so stale entries can be skipped on pop.
struct MergeCandidate {
  std::size_t left = 0;
  std::size_t right = 0;
  double delta = 0.0;
  std::uint64_t left_stamp = 0;
  std::uint64_t right_stamp = 0;
  CodeDistance merged;
};

struct GreedyResult {
  Segmentation segmentation;
  // SSE increase of each merge, in the order the merges were applied.
  std::vector<double> merge_deltas;
};

// Starts from T singleton segments and merges the adjacent pair with the
// smallest SSE increase until n_segments remain; leftmost pair on ties.
GreedyResult greedy_merge(const DistanceTable& table, std::size_t n_segments);

inline Segmentation greedy_n_segment(const DistanceTable& table, std::size_t n_segments) {
  return greedy_merge(table, n_segments).segmentation;
}

// N = round(T / frames_per_segment), clamped to [1, T].
std::size_t n_from_frames_per_segment(std::size_t num_frames, double frames_per_segment);

}  // namespace vqseg
