#include "vqseg/greedyseg.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace vqseg {

namespace {

struct CandidateOrder {
  // std::priority_queue keeps the "largest" on top; invert for a min-heap on
  // (delta, left).
  bool operator()(const MergeCandidate& x, const MergeCandidate& y) const {
    if (x.delta != y.delta) return x.delta > y.delta;
    return x.left > y.left;
  }
};

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

}  // namespace

GreedyResult greedy_merge(const DistanceTable& table, std::size_t n_segments) {
  const std::size_t T = table.num_frames();
  if (n_segments < 1 || n_segments > T) {
    throw ContractViolation("number of segments " + std::to_string(n_segments) +
                            " is outside [1, " + std::to_string(T) + "]");
  }

  // Linked list of live segments, indexed by start frame.
  std::vector<std::size_t> end(T), next(T), prev(T);
  std::vector<CodeDistance> cost(T);
  std::vector<std::uint64_t> stamp(T, 0);
  std::vector<bool> alive(T, true);
  for (std::size_t t = 0; t < T; ++t) {
    end[t] = t + 1;
    next[t] = t + 1 < T ? t + 1 : kNone;
    prev[t] = t == 0 ? kNone : t - 1;
    cost[t] = table.segment_cost(t, t + 1);
  }

  std::priority_queue<MergeCandidate, std::vector<MergeCandidate>, CandidateOrder> heap;
  auto push_candidate = [&](std::size_t left) {
    if (left == kNone || next[left] == kNone) return;
    const std::size_t right = next[left];
    const CodeDistance merged = table.segment_cost(left, end[right]);
    const double delta =
        std::max(0.0, merged.distance - cost[left].distance - cost[right].distance);
    heap.push({left, right, delta, stamp[left], stamp[right], merged});
  };
  for (std::size_t t = 0; t + 1 < T; ++t) push_candidate(t);

  GreedyResult result;
  result.merge_deltas.reserve(T - n_segments);
  std::size_t live = T;
  while (live > n_segments) {
    const MergeCandidate top = heap.top();
    heap.pop();
    if (!alive[top.left] || !alive[top.right] || stamp[top.left] != top.left_stamp ||
        stamp[top.right] != top.right_stamp) {
      continue;
    }
    end[top.left] = end[top.right];
    cost[top.left] = top.merged;
    ++stamp[top.left];
    alive[top.right] = false;
    next[top.left] = next[top.right];
    if (next[top.left] != kNone) prev[next[top.left]] = top.left;
    --live;
    result.merge_deltas.push_back(top.delta);

    if (prev[top.left] != kNone) push_candidate(prev[top.left]);
    push_candidate(top.left);
  }

  Segmentation& seg = result.segmentation;
  seg.utt_id = table.utt_id();
  for (std::size_t s = 0; s != kNone; s = next[s]) {
    seg.segments.push_back({s, end[s], cost[s].code});
    seg.total_cost += cost[s].distance;
  }
  return result;
}

std::size_t n_from_frames_per_segment(std::size_t num_frames, double frames_per_segment) {
  if (!(frames_per_segment >= 1.0) || !std::isfinite(frames_per_segment)) {
    throw ContractViolation("frames per segment must be a finite value >= 1");
  }
  const double n = std::round(static_cast<double>(num_frames) / frames_per_segment);
  return std::clamp<std::size_t>(static_cast<std::size_t>(n), 1, std::max<std::size_t>(num_frames, 1));
}

}  // namespace vqseg
