#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vqseg/error.hpp"
#include "vqseg/matrix.hpp"

namespace vqseg {

using CodeIndex = std::uint32_t;

// One utterance worth of continuous frame vectors (T x D).
class FeatureSequence {
 public:
  FeatureSequence(std::string utt_id, double frame_rate_hz, Matrix data);

  const std::string& utt_id() const noexcept { return utt_id_; }
  double frame_rate_hz() const noexcept { return frame_rate_hz_; }
  const Matrix& data() const noexcept { return data_; }

  std::size_t num_frames() const noexcept { return data_.rows(); }
  std::size_t dim() const noexcept { return data_.cols(); }
  std::span<const double> frame(std::size_t t) const { return data_.row(t); }
  double duration_s() const noexcept { return static_cast<double>(num_frames()) / frame_rate_hz_; }

 private:
  std::string utt_id_;
  double frame_rate_hz_;
  Matrix data_;
};

// K x D code vectors.
class Codebook {
 public:
  explicit Codebook(Matrix vectors);

  std::size_t size() const noexcept { return vectors_.rows(); }
  std::size_t dim() const noexcept { return vectors_.cols(); }
  std::span<const double> code(std::size_t k) const { return vectors_.row(k); }
  const Matrix& vectors() const noexcept { return vectors_; }

 private:
  Matrix vectors_;
};

// Half-open frame range [start, end) assigned to a single code.
struct Segment {
  std::size_t start = 0;
  std::size_t end = 0;
  CodeIndex code = 0;

  std::size_t length() const noexcept { return end - start; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

struct Segmentation {
  std::string utt_id;
  std::vector<Segment> segments;
  double total_cost = 0.0;

  std::size_t num_segments() const noexcept { return segments.size(); }
  std::size_t num_frames() const noexcept { return segments.empty() ? 0 : segments.back().end; }

  // Throws ContractViolation unless the segments tile [0, num_frames)
  // contiguously with non-empty segments and codes below num_codes.
  void validate(std::size_t num_frames, std::size_t num_codes) const;

  // One code per segment.
  std::vector<CodeIndex> codes() const;
  // One code per frame.
  std::vector<CodeIndex> frame_codes() const;
};

// Builds a segmentation from per-frame codes. With merge_runs, maximal runs
// of equal codes become a single segment; otherwise every frame is its own.
Segmentation segmentation_from_codes(std::string utt_id, std::span<const CodeIndex> codes,
                                     bool merge_runs);

struct CodeDistance {
  CodeIndex code = 0;
  double distance = 0.0;
  friend bool operator==(const CodeDistance&, const CodeDistance&) = default;
};

double squared_distance(std::span<const double> a, std::span<const double> b);

// argmin_k ||z - e_k||^2, lowest index on ties.
CodeDistance nearest_code(std::span<const double> z, const Codebook& codebook);

std::vector<CodeIndex> quantize_sequence(const FeatureSequence& features, const Codebook& codebook);

// Per-frame per-code squared distances d[t][k] plus column prefix sums
// cum[t][k] = sum_{i<t} d[i][k]. Every segmenter reads segment costs from here.
class DistanceTable {
 public:
  DistanceTable(const FeatureSequence& features, const Codebook& codebook);

  const std::string& utt_id() const noexcept { return utt_id_; }
  std::size_t num_frames() const noexcept { return num_frames_; }
  std::size_t num_codes() const noexcept { return num_codes_; }

  double distance(std::size_t t, std::size_t k) const { return d_[t * num_codes_ + k]; }
  double prefix(std::size_t t, std::size_t k) const { return cum_[t * num_codes_ + k]; }
  std::span<const double> distance_row(std::size_t t) const {
    return {d_.data() + t * num_codes_, num_codes_};
  }
  std::span<const double> prefix_row(std::size_t t) const {
    return {cum_.data() + t * num_codes_, num_codes_};
  }

  // Best single code for frames [a, b) and its summed squared error. O(K).
  CodeDistance segment_cost(std::size_t a, std::size_t b) const;

 private:
  std::string utt_id_;
  std::size_t num_frames_;
  std::size_t num_codes_;
  std::vector<double> d_;
  std::vector<double> cum_;
};

inline DistanceTable distance_table(const FeatureSequence& features, const Codebook& codebook) {
  return DistanceTable(features, codebook);
}

inline CodeDistance segment_cost(const DistanceTable& table, std::size_t a, std::size_t b) {
  return table.segment_cost(a, b);
}

// Sum of squared errors of a segmentation under its assigned codes.
double segmentation_sse(const DistanceTable& table, const Segmentation& segmentation);

// True when a is smaller than b by more than a relative rounding margin.
// Segmenters use it so that candidates whose costs differ only by
// accumulation order count as ties.
bool definitely_less(double a, double b) noexcept;

}  // namespace vqseg
