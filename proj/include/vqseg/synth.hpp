#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "vqseg/core.hpp"

namespace vqseg {

// Synthetic corpus with known segmentations: Gaussian codebook, geometric
// segment durations, Gaussian frame noise around the segment's code.
struct SynthConfig {
  std::size_t num_codes = 16;
  std::size_t dim = 8;
  std::size_t n_utterances = 200;
  double mean_segment_len = 5.0;
  std::size_t min_segments = 5;
  std::size_t max_segments = 20;
  double noise_sigma = 0.05;
  double frame_rate_hz = 50.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthCorpus {
  Codebook codebook;
  std::vector<FeatureSequence> features;
  std::vector<Segmentation> truth;
};

SynthCorpus synth_corpus(const SynthConfig& config);

}  // namespace vqseg
