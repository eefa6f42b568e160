#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vqseg/core.hpp"

namespace vqseg {

// Slack added to the matching tolerance so that boundaries an exact number
// of frames apart are not lost to decimal rounding (0.12 - 0.10 > 0.02).
inline constexpr double kTimeEpsilon = 1e-9;

// Interior boundary times of one utterance, in seconds. Utterance start and
// end are never stored. duration_s is +inf when the duration is unknown.
struct BoundarySet {
  std::string utt_id;
  std::vector<double> times;
  double duration_s = std::numeric_limits<double>::infinity();

  // Sorts and de-duplicates, drops edge boundaries at 0 and at the duration,
  // and rejects anything outside the utterance.
  static BoundarySet make(std::string utt_id, std::vector<double> times,
                          double duration_s = std::numeric_limits<double>::infinity());

  // Segment starts (except frame 0) converted with the frame rate.
  static BoundarySet from_segmentation(const Segmentation& segmentation, double frame_rate_hz);

  bool has_duration() const noexcept { return duration_s != std::numeric_limits<double>::infinity(); }
};

struct BoundaryCounts {
  std::size_t n_ref = 0;
  std::size_t n_hyp = 0;
  std::size_t n_hit = 0;

  BoundaryCounts& operator+=(const BoundaryCounts& other) noexcept {
    n_ref += other.n_ref;
    n_hyp += other.n_hyp;
    n_hit += other.n_hit;
    return *this;
  }
};

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
};

// One-to-one matching of sorted time lists: each hypothesis, in time order,
// claims the earliest unclaimed reference within +-tolerance_s.
std::size_t match_times(std::span<const double> ref, std::span<const double> hyp,
                        double tolerance_s);

std::size_t match_boundaries(const BoundarySet& ref, const BoundarySet& hyp, double tolerance_s);

// Counts for one utterance. include_edges adds the utterance start and end to
// both sides (both sets then need a known duration).
BoundaryCounts count_boundaries(const BoundarySet& ref, const BoundarySet& hyp,
                                double tolerance_s, bool include_edges = false);

double f_score(double precision, double recall) noexcept;

// Micro-averaged precision/recall/F from summed counts; 0 on empty denominators.
PRF boundary_prf(const BoundaryCounts& counts) noexcept;

// n_hyp / n_ref - 1; nullopt when there are no reference boundaries.
std::optional<double> over_segmentation(std::size_t n_ref, std::size_t n_hyp) noexcept;

double r_value(double recall, double over_segmentation) noexcept;

struct TokenCounts {
  std::size_t n_ref = 0;
  std::size_t n_hyp = 0;
  std::size_t n_hit = 0;

  TokenCounts& operator+=(const TokenCounts& other) noexcept {
    n_ref += other.n_ref;
    n_hyp += other.n_hyp;
    n_hit += other.n_hit;
    return *this;
  }
};

// A reference token (span between consecutive delimiters, utterance edges
// included) is hit when some hypothesis token has both edges within
// tolerance and no hypothesis boundary strictly inside it. Matching is
// one-to-one. Both sets need a known duration.
TokenCounts match_tokens(const BoundarySet& ref, const BoundarySet& hyp, double tolerance_s);

PRF token_prf(const TokenCounts& counts) noexcept;

struct EvalReport {
  BoundaryCounts counts;
  PRF boundaries;
  std::optional<double> os;
  std::optional<double> r_value;
  std::optional<TokenCounts> token_counts;
  std::optional<PRF> tokens;
};

EvalReport make_report(const BoundaryCounts& counts);

// Corpus-level evaluation, utterances paired by id. An utterance missing on
// one side is scored against an empty boundary set.
EvalReport evaluate_boundaries(std::span<const BoundarySet> refs, std::span<const BoundarySet> hyps,
                               double tolerance_s, bool include_edges = false);

EvalReport evaluate_tokens(std::span<const BoundarySet> refs, std::span<const BoundarySet> hyps,
                           double tolerance_s);

// Empirical symbol entropy (bits/symbol) over all sequences pooled.
double symbol_entropy(std::span<const std::vector<CodeIndex>> sequences);

// total symbols * entropy / total duration.
double bitrate(std::span<const std::vector<CodeIndex>> sequences, double total_duration_s);

}  // namespace vqseg
