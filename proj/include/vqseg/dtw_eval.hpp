#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "vqseg/core.hpp"

namespace vqseg {

// A word or triphone token rendered as code vectors.
struct CodeVectorSequence {
  std::string item_id;
  std::string type;     // empty when unlabelled
  std::string speaker;  // empty when unknown
  Matrix vectors;       // one row per position

  // Rejects empty sequences and zero rows.
  void validate() const;
};

// A run of one code. Item manifests store codes in run-length form so that
// per-segment and per-frame renderings come from the same record.
struct CodeRun {
  CodeIndex code = 0;
  std::size_t length = 1;
  friend bool operator==(const CodeRun&, const CodeRun&) = default;
};

// One codebook row per run, or per frame when per_frame is set.
CodeVectorSequence render_item(std::string item_id, std::string type, std::string speaker,
                               std::span<const CodeRun> runs, const Codebook& codebook,
                               bool per_frame);

// Minimum accumulated cosine distance over monotone alignments with steps
// (1,0), (0,1), (1,1), divided by the number of nodes on that path. Among
// equal-cost paths the shorter one is taken.
double dtw_distance(const CodeVectorSequence& a, const CodeVectorSequence& b);

struct AbxTriple {
  std::string a_id;
  std::string b_id;
  std::string x_id;
};

class ItemStore {
 public:
  ItemStore() = default;
  explicit ItemStore(std::vector<CodeVectorSequence> items);

  void add(CodeVectorSequence item);
  const CodeVectorSequence& at(const std::string& item_id) const;
  std::size_t size() const noexcept { return items_.size(); }

 private:
  std::map<std::string, CodeVectorSequence> items_;
};

// 0 if X is closer to A, 1 if closer to B, 0.5 on an exact tie.
double abx_score(const AbxTriple& triple, const ItemStore& items);

// Mean abx_score over all triples.
double abx_error(std::span<const AbxTriple> triples, const ItemStore& items);

struct RankedPair {
  double distance = 0.0;
  bool same_type = false;
};

// Average precision of a list already sorted best-first.
double ranked_average_precision(std::span<const RankedPair> ranked);

// Ranks every unordered pair by DTW distance (ties by the lexicographic pair
// of item ids) and scores same-type pairs as positives.
double same_different_ap(std::span<const CodeVectorSequence> items);

}  // namespace vqseg
