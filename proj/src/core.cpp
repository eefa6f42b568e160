#include "vqseg/core.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace vqseg {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw ContractViolation("matrix of shape " + std::to_string(rows_) + "x" +
                            std::to_string(cols_) + " given " +
                            std::to_string(values_.size()) + " values");
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  values_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ContractViolation("ragged matrix initializer");
    values_.insert(values_.end(), r.begin(), r.end());
  }
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

FeatureSequence::FeatureSequence(std::string utt_id, double frame_rate_hz, Matrix data)
    : utt_id_(std::move(utt_id)), frame_rate_hz_(frame_rate_hz), data_(std::move(data)) {
  if (!(frame_rate_hz_ > 0.0) || !std::isfinite(frame_rate_hz_)) {
    throw ContractViolation("utterance '" + utt_id_ + "': frame rate must be positive");
  }
  if (data_.rows() == 0 || data_.cols() == 0) {
    throw ContractViolation("utterance '" + utt_id_ + "': features must have T >= 1 and D >= 1");
  }
  if (!data_.all_finite()) {
    throw ContractViolation("utterance '" + utt_id_ + "': non-finite feature value");
  }
}

Codebook::Codebook(Matrix vectors) : vectors_(std::move(vectors)) {
  if (vectors_.rows() == 0 || vectors_.cols() == 0) {
    throw ContractViolation("codebook must have K >= 1 and D >= 1");
  }
  if (!vectors_.all_finite()) throw ContractViolation("codebook has a non-finite entry");
}

void Segmentation::validate(std::size_t expected_frames, std::size_t num_codes) const {
  if (segments.empty()) throw ContractViolation("segmentation '" + utt_id + "' is empty");
  std::size_t cursor = 0;
  for (const auto& s : segments) {
    if (s.start != cursor) {
      throw ContractViolation("segmentation '" + utt_id + "': segment starts at " +
                              std::to_string(s.start) + ", expected " + std::to_string(cursor));
    }
    if (s.end <= s.start) {
      throw ContractViolation("segmentation '" + utt_id + "': empty segment at frame " +
                              std::to_string(s.start));
    }
    if (s.code >= num_codes) {
      throw ContractViolation("segmentation '" + utt_id + "': code " + std::to_string(s.code) +
                              " out of range for K = " + std::to_string(num_codes));
    }
    cursor = s.end;
  }
  if (cursor != expected_frames) {
    throw ContractViolation("segmentation '" + utt_id + "' covers " + std::to_string(cursor) +
                            " frames, expected " + std::to_string(expected_frames));
  }
}

std::vector<CodeIndex> Segmentation::codes() const {
  std::vector<CodeIndex> out;
  out.reserve(segments.size());
  for (const auto& s : segments) out.push_back(s.code);
  return out;
}

std::vector<CodeIndex> Segmentation::frame_codes() const {
  std::vector<CodeIndex> out;
  out.reserve(num_frames());
  for (const auto& s : segments) out.insert(out.end(), s.length(), s.code);
  return out;
}

Segmentation segmentation_from_codes(std::string utt_id, std::span<const CodeIndex> codes,
                                     bool merge_runs) {
  Segmentation seg{std::move(utt_id), {}, 0.0};
  for (std::size_t t = 0; t < codes.size(); ++t) {
    if (merge_runs && !seg.segments.empty() && seg.segments.back().code == codes[t]) {
      seg.segments.back().end = t + 1;
    } else {
      seg.segments.push_back({t, t + 1, codes[t]});
    }
  }
  return seg;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    sum += diff * diff;
  }
  return sum;
}

namespace {

void check_dims(std::size_t feature_dim, std::size_t code_dim) {
  if (feature_dim != code_dim) {
    throw ContractViolation("dimension mismatch: features have D = " + std::to_string(feature_dim) +
                            ", codebook has D = " + std::to_string(code_dim));
  }
}

}  // namespace

CodeDistance nearest_code(std::span<const double> z, const Codebook& codebook) {
  check_dims(z.size(), codebook.dim());
  CodeDistance best{0, squared_distance(z, codebook.code(0))};
  for (std::size_t k = 1; k < codebook.size(); ++k) {
    const double dist = squared_distance(z, codebook.code(k));
    if (dist < best.distance) best = {static_cast<CodeIndex>(k), dist};
  }
  return best;
}

std::vector<CodeIndex> quantize_sequence(const FeatureSequence& features, const Codebook& codebook) {
  check_dims(features.dim(), codebook.dim());
  std::vector<CodeIndex> codes(features.num_frames());
  for (std::size_t t = 0; t < codes.size(); ++t) {
    codes[t] = nearest_code(features.frame(t), codebook).code;
  }
  return codes;
}

DistanceTable::DistanceTable(const FeatureSequence& features, const Codebook& codebook)
    : utt_id_(features.utt_id()),
      num_frames_(features.num_frames()),
      num_codes_(codebook.size()),
      d_(num_frames_ * num_codes_),
      cum_((num_frames_ + 1) * num_codes_, 0.0) {
  check_dims(features.dim(), codebook.dim());
  for (std::size_t t = 0; t < num_frames_; ++t) {
    const auto z = features.frame(t);
    double* d_row = d_.data() + t * num_codes_;
    const double* cum_prev = cum_.data() + t * num_codes_;
    double* cum_next = cum_.data() + (t + 1) * num_codes_;
    for (std::size_t k = 0; k < num_codes_; ++k) {
      d_row[k] = squared_distance(z, codebook.code(k));
      cum_next[k] = cum_prev[k] + d_row[k];
    }
  }
}

CodeDistance DistanceTable::segment_cost(std::size_t a, std::size_t b) const {
  if (a >= b || b > num_frames_) {
    throw ContractViolation("segment [" + std::to_string(a) + ", " + std::to_string(b) +
                            ") is invalid for T = " + std::to_string(num_frames_));
  }
  const double* lo = cum_.data() + a * num_codes_;
  const double* hi = cum_.data() + b * num_codes_;
  CodeDistance best{0, hi[0] - lo[0]};
  for (std::size_t k = 1; k < num_codes_; ++k) {
    const double cost = hi[k] - lo[k];
    if (cost < best.distance) best = {static_cast<CodeIndex>(k), cost};
  }
  return best;
}

double segmentation_sse(const DistanceTable& table, const Segmentation& segmentation) {
  segmentation.validate(table.num_frames(), table.num_codes());
  double sse = 0.0;
  for (const auto& s : segmentation.segments) {
    sse += table.prefix(s.end, s.code) - table.prefix(s.start, s.code);
  }
  return sse;
}

bool definitely_less(double a, double b) noexcept {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return a < b - 1e-12 * scale;
}

}  // namespace vqseg
