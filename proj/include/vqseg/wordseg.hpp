#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vqseg/core.hpp"

namespace vqseg {

// Add-alpha smoothed bigram model over code symbols:
// p(b | a) = (count(a, b) + alpha) / (count(a) + alpha * V), where count(a)
// counts a as the left side of a within-utterance pair and V is the number
// of distinct symbols seen.
class BigramModel {
 public:
  static BigramModel train(std::span<const std::vector<CodeIndex>> corpus, double alpha = 0.1);

  double prob(CodeIndex next, CodeIndex given) const;

  double alpha() const noexcept { return alpha_; }
  std::size_t vocab_size() const noexcept { return unigram_.size(); }
  std::size_t unigram_count(CodeIndex symbol) const;
  std::size_t bigram_count(CodeIndex first, CodeIndex second) const;
  const std::map<CodeIndex, std::size_t>& unigrams() const noexcept { return unigram_; }

 private:
  double alpha_ = 0.1;
  std::map<CodeIndex, std::size_t> unigram_;
  std::map<CodeIndex, std::size_t> outgoing_;
  std::map<std::pair<CodeIndex, CodeIndex>, std::size_t> bigram_;
};

struct ThresholdMode {
  enum class Kind { absolute, relative };
  Kind kind = Kind::absolute;
  double theta = 0.1;  // absolute mode only
};

// Transition probabilities p(c[t+1] | c[t]) for t = 0 .. n-2.
std::vector<double> transition_curve(std::span<const CodeIndex> sequence, const BigramModel& model);

// Word boundary positions: value t means a word starts at symbol t
// (a boundary between symbols t-1 and t).
std::vector<std::size_t> threshold_segment(std::span<const CodeIndex> sequence,
                                           const BigramModel& model, ThresholdMode mode);

// One line per utterance, sorted by utt_id, one "c<code>" token per segment.
std::string export_symbol_corpus(std::span<const Segmentation> segmentations);

}  // namespace vqseg
