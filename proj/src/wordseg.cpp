#include "vqseg/wordseg.hpp"

#include <algorithm>
#include <cmath>

namespace vqseg {

BigramModel BigramModel::train(std::span<const std::vector<CodeIndex>> corpus, double alpha) {
  if (corpus.empty()) throw ContractViolation("cannot train a bigram model on an empty corpus");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw ContractViolation("smoothing constant must be finite and non-negative");
  }
  BigramModel model;
  model.alpha_ = alpha;
  for (const auto& seq : corpus) {
    for (std::size_t t = 0; t < seq.size(); ++t) {
      ++model.unigram_[seq[t]];
      if (t + 1 < seq.size()) {
        ++model.outgoing_[seq[t]];
        ++model.bigram_[{seq[t], seq[t + 1]}];
      }
    }
  }
  return model;
}

std::size_t BigramModel::unigram_count(CodeIndex symbol) const {
  const auto it = unigram_.find(symbol);
  return it == unigram_.end() ? 0 : it->second;
}

std::size_t BigramModel::bigram_count(CodeIndex first, CodeIndex second) const {
  const auto it = bigram_.find({first, second});
  return it == bigram_.end() ? 0 : it->second;
}

double BigramModel::prob(CodeIndex next, CodeIndex given) const {
  const auto out = outgoing_.find(given);
  const double n_given = out == outgoing_.end() ? 0.0 : static_cast<double>(out->second);
  const double denom = n_given + alpha_ * static_cast<double>(vocab_size());
  if (denom == 0.0) return 0.0;
  return (static_cast<double>(bigram_count(given, next)) + alpha_) / denom;
}

std::vector<double> transition_curve(std::span<const CodeIndex> sequence, const BigramModel& model) {
  std::vector<double> curve;
  if (sequence.size() < 2) return curve;
  curve.reserve(sequence.size() - 1);
  for (std::size_t t = 0; t + 1 < sequence.size(); ++t) {
    curve.push_back(model.prob(sequence[t + 1], sequence[t]));
  }
  return curve;
}

std::vector<std::size_t> threshold_segment(std::span<const CodeIndex> sequence,
                                           const BigramModel& model, ThresholdMode mode) {
  const auto p = transition_curve(sequence, model);
  std::vector<std::size_t> boundaries;
  for (std::size_t t = 0; t < p.size(); ++t) {
    bool cut = false;
    if (mode.kind == ThresholdMode::Kind::absolute) {
      cut = p[t] < mode.theta;
    } else if (p.size() >= 2) {
      const bool below_left = t == 0 || p[t] < p[t - 1];
      const bool below_right = t + 1 == p.size() || p[t] < p[t + 1];
      cut = below_left && below_right;
    }
    if (cut) boundaries.push_back(t + 1);
  }
  return boundaries;
}

std::string export_symbol_corpus(std::span<const Segmentation> segmentations) {
  std::vector<const Segmentation*> order;
  order.reserve(segmentations.size());
  for (const auto& s : segmentations) order.push_back(&s);
  std::stable_sort(order.begin(), order.end(),
                   [](const Segmentation* x, const Segmentation* y) { return x->utt_id < y->utt_id; });
  std::string out;
  for (const auto* seg : order) {
    for (std::size_t i = 0; i < seg->segments.size(); ++i) {
      if (i > 0) out += ' ';
      out += 'c';
      out += std::to_string(seg->segments[i].code);
    }
    out += '\n';
  }
  return out;
}

}  // namespace vqseg
