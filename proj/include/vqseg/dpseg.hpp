#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "vqseg/core.hpp"

namespace vqseg {

// Where the duration penalty lambda * (1 - len) is charged: once per segment,
// or once per frame of the segment (len * lambda * (1 - len) in total).
enum class PenaltyScope { per_segment, per_frame };

struct PenaltyConfig {
  double lambda = 3.0;
  PenaltyScope scope = PenaltyScope::per_segment;
  // Longest segment the DP considers; nullopt means unlimited.
  std::optional<std::size_t> max_seg_len = 100;

  void validate() const;
  // Penalty contribution of one segment of the given length.
  double segment_penalty(std::size_t length) const noexcept;
};

// Forward variables of the penalized recursion. alpha[t] is the optimal
// penalized cost of frames [0, t); back[t] records the final segment of that
// optimum. count[t] is its segment count, used as the tie-break key.
struct DPState {
  struct Step {
    std::size_t length = 0;
    CodeIndex code = 0;
  };
  std::vector<double> alpha;
  std::vector<Step> back;
  std::vector<std::size_t> count;
};

DPState dp_penalized_forward(const DistanceTable& table, const PenaltyConfig& config);

// Walks back[] from t = T to t = 0.
Segmentation dp_backtrack(const DPState& state, std::string utt_id);

// Exact minimizer of SSE + sum of segment penalties. Among equal-cost optima
// the one with the fewest segments wins, then the longest final segment.
Segmentation dp_penalized(const DistanceTable& table, const PenaltyConfig& config);

// Exact minimizer of SSE subject to exactly n_segments segments.
Segmentation dp_constrained(const DistanceTable& table, std::size_t n_segments);

// Penalized objective value of an arbitrary segmentation under its own codes.
double penalized_cost(const DistanceTable& table, const Segmentation& segmentation,
                      const PenaltyConfig& config);

struct PenalizedObjective {
  PenaltyConfig config;
};
struct ConstrainedObjective {
  std::size_t n_segments = 1;
};
using SegmentationObjective = std::variant<PenalizedObjective, ConstrainedObjective>;

inline constexpr std::size_t kBruteForceMaxFrames = 16;

// Enumerates all 2^(T-1) boundary placements. Test oracle; refuses T > 16.
// The max_seg_len cap of a penalized objective is honoured.
Segmentation brute_force_segment(const DistanceTable& table, const SegmentationObjective& objective);

}  // namespace vqseg
