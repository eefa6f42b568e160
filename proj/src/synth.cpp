#include "vqseg/synth.hpp"

#include <cmath>
#include <cstdio>
#include <random>

namespace vqseg {

void SynthConfig::validate() const {
  if (num_codes < 1 || dim < 1 || n_utterances < 1) {
    throw ContractViolation("synth config: K, D and n_utterances must be positive");
  }
  if (!(mean_segment_len >= 1.0) || !std::isfinite(mean_segment_len)) {
    throw ContractViolation("synth config: mean_segment_len must be >= 1");
  }
  if (min_segments < 1 || min_segments > max_segments) {
    throw ContractViolation("synth config: need 1 <= min_segments <= max_segments");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw ContractViolation("synth config: noise_sigma must be finite and non-negative");
  }
  if (!(frame_rate_hz > 0.0) || !std::isfinite(frame_rate_hz)) {
    throw ContractViolation("synth config: frame_rate_hz must be positive");
  }
  if (num_codes == 1 && max_segments > 1) {
    throw ContractViolation("synth config: adjacent segments need distinct codes, so K = 1 "
                            "allows only one segment per utterance");
  }
}

SynthCorpus synth_corpus(const SynthConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> unit(0.0, 1.0);

  Matrix codes(config.num_codes, config.dim);
  for (double& v : codes.values()) v = unit(rng);
  SynthCorpus corpus{Codebook(std::move(codes)), {}, {}};
  const Codebook& codebook = corpus.codebook;

  std::uniform_int_distribution<std::size_t> n_segments_dist(config.min_segments, config.max_segments);
  // Durations are 1 + Geometric(p) failures, mean 1/p.
  std::geometric_distribution<std::size_t> extra_frames(1.0 / config.mean_segment_len);

  corpus.features.reserve(config.n_utterances);
  corpus.truth.reserve(config.n_utterances);
  for (std::size_t u = 0; u < config.n_utterances; ++u) {
    char id[32];
    std::snprintf(id, sizeof id, "utt%05zu", u);

    Segmentation truth{id, {}, 0.0};
    const std::size_t n_segments = n_segments_dist(rng);
    std::size_t cursor = 0;
    for (std::size_t s = 0; s < n_segments; ++s) {
      CodeIndex code;
      if (s == 0) {
        code = static_cast<CodeIndex>(
            std::uniform_int_distribution<std::size_t>(0, config.num_codes - 1)(rng));
      } else {
        // Uniform over the K - 1 codes other than the previous one.
        const auto prev = truth.segments.back().code;
        auto draw = std::uniform_int_distribution<std::size_t>(0, config.num_codes - 2)(rng);
        if (draw >= prev) ++draw;
        code = static_cast<CodeIndex>(draw);
      }
      const std::size_t length = 1 + extra_frames(rng);
      truth.segments.push_back({cursor, cursor + length, code});
      cursor += length;
    }

    Matrix frames(cursor, config.dim);
    for (const auto& seg : truth.segments) {
      const auto centre = codebook.code(seg.code);
      for (std::size_t t = seg.start; t < seg.end; ++t) {
        auto row = frames.row(t);
        for (std::size_t d = 0; d < config.dim; ++d) {
          row[d] = centre[d] + (config.noise_sigma > 0.0 ? config.noise_sigma * unit(rng) : 0.0);
        }
      }
    }
    corpus.features.emplace_back(id, config.frame_rate_hz, std::move(frames));
    corpus.truth.push_back(std::move(truth));
  }
  return corpus;
}

}  // namespace vqseg
