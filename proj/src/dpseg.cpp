#include "vqseg/dpseg.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

namespace vqseg {

void PenaltyConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ContractViolation("penalty weight lambda must be finite and non-negative");
  }
  if (max_seg_len && *max_seg_len == 0) {
    throw ContractViolation("max_seg_len must be at least 1");
  }
}

double PenaltyConfig::segment_penalty(std::size_t length) const noexcept {
  const double len = static_cast<double>(length);
  const double pen = lambda * (1.0 - len);
  return scope == PenaltyScope::per_segment ? pen : len * pen;
}

namespace {

// Candidate ordering shared by the DP and the brute-force oracle: lower cost,
// then fewer segments. Remaining ties go to whichever candidate was seen first.
bool better(double cost, std::size_t count, double best_cost, std::size_t best_count) {
  if (definitely_less(cost, best_cost)) return true;
  if (definitely_less(best_cost, cost)) return false;
  return count < best_count;
}

// argmin over codes of cum[b] - cum[a], without bounds checks.
CodeDistance best_code(const double* lo, const double* hi, std::size_t num_codes) {
  CodeDistance best{0, hi[0] - lo[0]};
  for (std::size_t k = 1; k < num_codes; ++k) {
    const double cost = hi[k] - lo[k];
    if (cost < best.distance) best = {static_cast<CodeIndex>(k), cost};
  }
  return best;
}

}  // namespace

DPState dp_penalized_forward(const DistanceTable& table, const PenaltyConfig& config) {
  config.validate();
  const std::size_t T = table.num_frames();
  const std::size_t K = table.num_codes();
  const std::size_t cap = std::min(T, config.max_seg_len.value_or(T));

  DPState state;
  state.alpha.assign(T + 1, 0.0);
  state.back.assign(T + 1, {});
  state.count.assign(T + 1, 0);

  std::vector<double> penalty(cap + 1);
  for (std::size_t j = 1; j <= cap; ++j) penalty[j] = config.segment_penalty(j);

  for (std::size_t t = 1; t <= T; ++t) {
    const double* hi = table.prefix_row(t).data();
    double best_cost = std::numeric_limits<double>::infinity();
    std::size_t best_count = std::numeric_limits<std::size_t>::max();
    DPState::Step best_step;
    // Longest candidate first, so it keeps any exact tie.
    for (std::size_t j = std::min(t, cap); j >= 1; --j) {
      const std::size_t a = t - j;
      const CodeDistance seg = best_code(table.prefix_row(a).data(), hi, K);
      const double cost = state.alpha[a] + seg.distance + penalty[j];
      const std::size_t count = state.count[a] + 1;
      if (better(cost, count, best_cost, best_count)) {
        best_cost = cost;
        best_count = count;
        best_step = {j, seg.code};
      }
    }
    state.alpha[t] = best_cost;
    state.count[t] = best_count;
    state.back[t] = best_step;
  }
  return state;
}

Segmentation dp_backtrack(const DPState& state, std::string utt_id) {
  Segmentation seg{std::move(utt_id), {}, state.alpha.back()};
  std::size_t t = state.alpha.size() - 1;
  while (t > 0) {
    const auto& step = state.back[t];
    seg.segments.push_back({t - step.length, t, step.code});
    t -= step.length;
  }
  std::reverse(seg.segments.begin(), seg.segments.end());
  return seg;
}

Segmentation dp_penalized(const DistanceTable& table, const PenaltyConfig& config) {
  return dp_backtrack(dp_penalized_forward(table, config), table.utt_id());
}

Segmentation dp_constrained(const DistanceTable& table, std::size_t n_segments) {
  const std::size_t T = table.num_frames();
  const std::size_t K = table.num_codes();
  if (n_segments < 1 || n_segments > T) {
    throw ContractViolation("number of segments " + std::to_string(n_segments) +
                            " is outside [1, " + std::to_string(T) + "]");
  }

  // Best single-segment cost for every [a, b), upper triangle, row a.
  std::vector<double> span_cost((T + 1) * (T + 1), 0.0);
  for (std::size_t a = 0; a < T; ++a) {
    const double* lo = table.prefix_row(a).data();
    for (std::size_t b = a + 1; b <= T; ++b) {
      span_cost[a * (T + 1) + b] = best_code(lo, table.prefix_row(b).data(), K).distance;
    }
  }

  // layer[n][t]: best SSE of frames [0, t) in exactly n segments.
  constexpr double inf = std::numeric_limits<double>::infinity();
  const std::size_t N = n_segments;
  std::vector<double> layer((N + 1) * (T + 1), inf);
  std::vector<std::size_t> from((N + 1) * (T + 1), 0);
  layer[0] = 0.0;
  for (std::size_t n = 1; n <= N; ++n) {
    // Frames left for the remaining N - n segments.
    const std::size_t t_max = T - (N - n);
    for (std::size_t t = n; t <= t_max; ++t) {
      double best = inf;
      std::size_t best_a = 0;
      // Smallest a first: the longest final segment keeps exact ties.
      for (std::size_t a = n - 1; a < t; ++a) {
        const double prev = layer[(n - 1) * (T + 1) + a];
        if (prev == inf) continue;
        const double cost = prev + span_cost[a * (T + 1) + t];
        if (best == inf || definitely_less(cost, best)) {
          best = cost;
          best_a = a;
        }
      }
      layer[n * (T + 1) + t] = best;
      from[n * (T + 1) + t] = best_a;
    }
  }

  Segmentation seg{table.utt_id(), {}, layer[N * (T + 1) + T]};
  std::size_t t = T;
  for (std::size_t n = N; n >= 1; --n) {
    const std::size_t a = from[n * (T + 1) + t];
    seg.segments.push_back({a, t, table.segment_cost(a, t).code});
    t = a;
  }
  std::reverse(seg.segments.begin(), seg.segments.end());
  return seg;
}

double penalized_cost(const DistanceTable& table, const Segmentation& segmentation,
                      const PenaltyConfig& config) {
  double cost = segmentation_sse(table, segmentation);
  for (const auto& s : segmentation.segments) cost += config.segment_penalty(s.length());
  return cost;
}

Segmentation brute_force_segment(const DistanceTable& table, const SegmentationObjective& objective) {
  const std::size_t T = table.num_frames();
  if (T > kBruteForceMaxFrames) {
    throw ContractViolation("brute-force segmentation refuses T = " + std::to_string(T) +
                            " (limit " + std::to_string(kBruteForceMaxFrames) + ")");
  }
  const auto* penalized = std::get_if<PenalizedObjective>(&objective);
  std::size_t want_segments = 0;
  std::size_t cap = T;
  if (penalized) {
    penalized->config.validate();
    cap = std::min(T, penalized->config.max_seg_len.value_or(T));
  } else {
    want_segments = std::get<ConstrainedObjective>(objective).n_segments;
    if (want_segments < 1 || want_segments > T) {
      throw ContractViolation("number of segments " + std::to_string(want_segments) +
                              " is outside [1, " + std::to_string(T) + "]");
    }
  }

  Segmentation best{table.utt_id(), {}, std::numeric_limits<double>::infinity()};
  // Bit i of mask set means a boundary between frame i and frame i + 1.
  const std::uint32_t n_masks = std::uint32_t{1} << (T - 1);
  for (std::uint32_t mask = 0; mask < n_masks; ++mask) {
    const std::size_t n_segs = static_cast<std::size_t>(std::popcount(mask)) + 1;
    if (!penalized && n_segs != want_segments) continue;
    Segmentation candidate{table.utt_id(), {}, 0.0};
    std::size_t start = 0;
    bool feasible = true;
    for (std::size_t t = 1; t <= T && feasible; ++t) {
      if (t == T || (mask >> (t - 1)) & 1U) {
        if (t - start > cap) feasible = false;
        const CodeDistance c = table.segment_cost(start, t);
        candidate.segments.push_back({start, t, c.code});
        candidate.total_cost += c.distance;
        if (penalized) candidate.total_cost += penalized->config.segment_penalty(t - start);
        start = t;
      }
    }
    if (!feasible) continue;
    if (best.segments.empty() ||
        better(candidate.total_cost, n_segs, best.total_cost, best.num_segments())) {
      best = std::move(candidate);
    }
  }
  return best;
}

}  // namespace vqseg
