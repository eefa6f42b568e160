#include "vqseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace vqseg {

BoundarySet BoundarySet::make(std::string utt_id, std::vector<double> times, double duration_s) {
  if (!(duration_s > 0.0)) {
    throw ContractViolation("utterance '" + utt_id + "': duration must be positive");
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  std::vector<double> interior;
  interior.reserve(times.size());
  for (double t : times) {
    if (!std::isfinite(t) || t < -kTimeEpsilon || t > duration_s + kTimeEpsilon) {
      throw ContractViolation("utterance '" + utt_id + "': boundary " + std::to_string(t) +
                              " s lies outside the utterance");
    }
    if (t <= kTimeEpsilon || t >= duration_s - kTimeEpsilon) continue;
    interior.push_back(t);
  }
  return {std::move(utt_id), std::move(interior), duration_s};
}

BoundarySet BoundarySet::from_segmentation(const Segmentation& segmentation, double frame_rate_hz) {
  if (!(frame_rate_hz > 0.0)) throw ContractViolation("frame rate must be positive");
  std::vector<double> times;
  for (std::size_t i = 1; i < segmentation.segments.size(); ++i) {
    times.push_back(static_cast<double>(segmentation.segments[i].start) / frame_rate_hz);
  }
  return make(segmentation.utt_id, std::move(times),
              static_cast<double>(segmentation.num_frames()) / frame_rate_hz);
}

std::size_t match_times(std::span<const double> ref, std::span<const double> hyp,
                        double tolerance_s) {
  if (!(tolerance_s >= 0.0)) throw ContractViolation("tolerance must be non-negative");
  const double window = tolerance_s + kTimeEpsilon;
  // Only ever ref[next] can be the earliest unclaimed candidate: everything
  // before it is either claimed or too early for all later hypotheses.
  std::size_t next = 0;
  std::size_t hits = 0;
  for (double h : hyp) {
    while (next < ref.size() && ref[next] < h - window) ++next;
    if (next < ref.size() && ref[next] <= h + window) {
      ++hits;
      ++next;
    }
  }
  return hits;
}

namespace {

void check_same_utterance(const BoundarySet& ref, const BoundarySet& hyp) {
  if (ref.utt_id != hyp.utt_id) {
    throw ContractViolation("boundary sets belong to different utterances: '" + ref.utt_id +
                            "' and '" + hyp.utt_id + "'");
  }
}

std::vector<double> delimiters(const BoundarySet& set) {
  if (!set.has_duration()) {
    throw ContractViolation("utterance '" + set.utt_id + "': duration unknown, edges unavailable");
  }
  std::vector<double> out;
  out.reserve(set.times.size() + 2);
  out.push_back(0.0);
  out.insert(out.end(), set.times.begin(), set.times.end());
  out.push_back(set.duration_s);
  return out;
}

}  // namespace

std::size_t match_boundaries(const BoundarySet& ref, const BoundarySet& hyp, double tolerance_s) {
  check_same_utterance(ref, hyp);
  return match_times(ref.times, hyp.times, tolerance_s);
}

BoundaryCounts count_boundaries(const BoundarySet& ref, const BoundarySet& hyp,
                                double tolerance_s, bool include_edges) {
  check_same_utterance(ref, hyp);
  if (!include_edges) {
    return {ref.times.size(), hyp.times.size(), match_times(ref.times, hyp.times, tolerance_s)};
  }
  const auto r = delimiters(ref);
  const auto h = delimiters(hyp);
  return {r.size(), h.size(), match_times(r, h, tolerance_s)};
}

double f_score(double precision, double recall) noexcept {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

PRF boundary_prf(const BoundaryCounts& counts) noexcept {
  PRF out;
  if (counts.n_hyp > 0) out.precision = static_cast<double>(counts.n_hit) / static_cast<double>(counts.n_hyp);
  if (counts.n_ref > 0) out.recall = static_cast<double>(counts.n_hit) / static_cast<double>(counts.n_ref);
  out.f_score = f_score(out.precision, out.recall);
  return out;
}

std::optional<double> over_segmentation(std::size_t n_ref, std::size_t n_hyp) noexcept {
  if (n_ref == 0) return std::nullopt;
  return static_cast<double>(n_hyp) / static_cast<double>(n_ref) - 1.0;
}

double r_value(double recall, double over_segmentation) noexcept {
  const double r1 = std::hypot(1.0 - recall, over_segmentation);
  const double r2 = (-over_segmentation + recall - 1.0) / std::numbers::sqrt2;
  return 1.0 - (std::abs(r1) + std::abs(r2)) / 2.0;
}

TokenCounts match_tokens(const BoundarySet& ref, const BoundarySet& hyp, double tolerance_s) {
  check_same_utterance(ref, hyp);
  if (!(tolerance_s >= 0.0)) throw ContractViolation("tolerance must be non-negative");
  const auto r = delimiters(ref);
  const auto h = delimiters(hyp);
  const double window = tolerance_s + kTimeEpsilon;

  // Hypothesis tokens are the spans between consecutive delimiters, so none
  // of them has an interior hypothesis boundary.
  TokenCounts counts{r.size() - 1, h.size() - 1, 0};
  std::vector<bool> used(h.size() - 1, false);
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    auto it = std::lower_bound(h.begin(), h.end() - 1, r[i] - window);
    for (; it != h.end() - 1 && *it <= r[i] + window; ++it) {
      const auto j = static_cast<std::size_t>(it - h.begin());
      if (!used[j] && std::abs(h[j + 1] - r[i + 1]) <= window) {
        used[j] = true;
        ++counts.n_hit;
        break;
      }
    }
  }
  return counts;
}

PRF token_prf(const TokenCounts& counts) noexcept {
  return boundary_prf({counts.n_ref, counts.n_hyp, counts.n_hit});
}

EvalReport make_report(const BoundaryCounts& counts) {
  EvalReport report;
  report.counts = counts;
  report.boundaries = boundary_prf(counts);
  report.os = over_segmentation(counts.n_ref, counts.n_hyp);
  if (report.os) report.r_value = r_value(report.boundaries.recall, *report.os);
  return report;
}

namespace {

// Pairs utterances by id in sorted order, substituting an empty set for a
// missing side.
template <typename Fn>
void for_each_pair(std::span<const BoundarySet> refs, std::span<const BoundarySet> hyps, Fn&& fn) {
  std::map<std::string, std::pair<const BoundarySet*, const BoundarySet*>> paired;
  for (const auto& r : refs) {
    if (paired[r.utt_id].first) throw ContractViolation("duplicate reference utterance '" + r.utt_id + "'");
    paired[r.utt_id].first = &r;
  }
  for (const auto& h : hyps) {
    if (paired[h.utt_id].second) throw ContractViolation("duplicate hypothesis utterance '" + h.utt_id + "'");
    paired[h.utt_id].second = &h;
  }
  for (const auto& [id, p] : paired) {
    const BoundarySet empty_ref{id, {}, p.second ? p.second->duration_s : 0.0};
    const BoundarySet empty_hyp{id, {}, p.first ? p.first->duration_s : 0.0};
    fn(p.first ? *p.first : empty_ref, p.second ? *p.second : empty_hyp);
  }
}

}  // namespace

EvalReport evaluate_boundaries(std::span<const BoundarySet> refs, std::span<const BoundarySet> hyps,
                               double tolerance_s, bool include_edges) {
  BoundaryCounts total;
  for_each_pair(refs, hyps, [&](const BoundarySet& r, const BoundarySet& h) {
    total += count_boundaries(r, h, tolerance_s, include_edges);
  });
  return make_report(total);
}

EvalReport evaluate_tokens(std::span<const BoundarySet> refs, std::span<const BoundarySet> hyps,
                           double tolerance_s) {
  TokenCounts total;
  for_each_pair(refs, hyps, [&](const BoundarySet& r, const BoundarySet& h) {
    total += match_tokens(r, h, tolerance_s);
  });
  EvalReport report;
  report.token_counts = total;
  report.tokens = token_prf(total);
  return report;
}

double symbol_entropy(std::span<const std::vector<CodeIndex>> sequences) {
  std::map<CodeIndex, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& seq : sequences) {
    for (CodeIndex c : seq) ++counts[c];
    total += seq.size();
  }
  if (total == 0) throw ContractViolation("entropy of an empty corpus is undefined");
  double h = 0.0;
  for (const auto& [symbol, n] : counts) {
    const double p = static_cast<double>(n) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

double bitrate(std::span<const std::vector<CodeIndex>> sequences, double total_duration_s) {
  if (!(total_duration_s > 0.0)) throw ContractViolation("total duration must be positive");
  std::size_t total = 0;
  for (const auto& seq : sequences) total += seq.size();
  const double h = symbol_entropy(sequences);
  return static_cast<double>(total) * h / total_duration_s;
}

}  // namespace vqseg
