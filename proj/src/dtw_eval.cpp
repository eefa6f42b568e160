#include "vqseg/dtw_eval.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace vqseg {

void CodeVectorSequence::validate() const {
  if (vectors.rows() == 0 || vectors.cols() == 0) {
    throw ContractViolation("item '" + item_id + "' is empty");
  }
  for (std::size_t i = 0; i < vectors.rows(); ++i) {
    const auto row = vectors.row(i);
    if (std::all_of(row.begin(), row.end(), [](double v) { return v == 0.0; })) {
      throw ContractViolation("item '" + item_id + "' has a zero vector at position " +
                              std::to_string(i));
    }
  }
}

CodeVectorSequence render_item(std::string item_id, std::string type, std::string speaker,
                               std::span<const CodeRun> runs, const Codebook& codebook,
                               bool per_frame) {
  std::vector<CodeIndex> codes;
  for (const auto& run : runs) {
    if (run.code >= codebook.size()) {
      throw ContractViolation("item '" + item_id + "' uses code " + std::to_string(run.code) +
                              " but K = " + std::to_string(codebook.size()));
    }
    if (run.length == 0) throw ContractViolation("item '" + item_id + "' has an empty run");
    codes.insert(codes.end(), per_frame ? run.length : 1, run.code);
  }
  Matrix vectors(codes.size(), codebook.dim());
  for (std::size_t i = 0; i < codes.size(); ++i) {
    std::ranges::copy(codebook.code(codes[i]), vectors.row(i).begin());
  }
  CodeVectorSequence item{std::move(item_id), std::move(type), std::move(speaker), std::move(vectors)};
  item.validate();
  return item;
}

namespace {

std::vector<double> row_norms(const CodeVectorSequence& s) {
  std::vector<double> norms(s.vectors.rows());
  for (std::size_t i = 0; i < norms.size(); ++i) {
    double sq = 0.0;
    for (double v : s.vectors.row(i)) sq += v * v;
    norms[i] = std::sqrt(sq);
  }
  return norms;
}

}  // namespace

double dtw_distance(const CodeVectorSequence& a, const CodeVectorSequence& b) {
  a.validate();
  b.validate();
  if (a.vectors.cols() != b.vectors.cols()) {
    throw ContractViolation("dimension mismatch: item '" + a.item_id + "' has D = " +
                            std::to_string(a.vectors.cols()) + ", item '" + b.item_id +
                            "' has D = " + std::to_string(b.vectors.cols()));
  }
  const std::size_t n = a.vectors.rows();
  const std::size_t m = b.vectors.rows();
  const auto na = row_norms(a);
  const auto nb = row_norms(b);

  // Accumulated (cost, path nodes) over two rows; compared lexicographically.
  struct Cell {
    double cost;
    std::size_t nodes;
  };
  auto less = [](const Cell& x, const Cell& y) {
    return x.cost < y.cost || (x.cost == y.cost && x.nodes < y.nodes);
  };
  std::vector<Cell> prev(m), curr(m);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ai = a.vectors.row(i);
    for (std::size_t j = 0; j < m; ++j) {
      const auto bj = b.vectors.row(j);
      double dot = 0.0;
      for (std::size_t d = 0; d < ai.size(); ++d) dot += ai[d] * bj[d];
      const double local = std::clamp(1.0 - dot / (na[i] * nb[j]), 0.0, 2.0);
      Cell best{0.0, 0};
      if (i == 0 && j == 0) {
        best = {0.0, 0};
      } else {
        bool have = false;
        auto consider = [&](const Cell& c) {
          if (!have || less(c, best)) {
            best = c;
            have = true;
          }
        };
        if (i > 0 && j > 0) consider(prev[j - 1]);
        if (i > 0) consider(prev[j]);
        if (j > 0) consider(curr[j - 1]);
      }
      curr[j] = {best.cost + local, best.nodes + 1};
    }
    std::swap(prev, curr);
  }
  const Cell& end = prev[m - 1];
  return end.cost / static_cast<double>(end.nodes);
}

ItemStore::ItemStore(std::vector<CodeVectorSequence> items) {
  for (auto& item : items) add(std::move(item));
}

void ItemStore::add(CodeVectorSequence item) {
  item.validate();
  const std::string id = item.item_id;
  if (!items_.emplace(id, std::move(item)).second) {
    throw ContractViolation("duplicate item id '" + id + "'");
  }
}

const CodeVectorSequence& ItemStore::at(const std::string& item_id) const {
  const auto it = items_.find(item_id);
  if (it == items_.end()) throw ContractViolation("unknown item id '" + item_id + "'");
  return it->second;
}

double abx_score(const AbxTriple& triple, const ItemStore& items) {
  if (triple.a_id == triple.b_id) {
    throw ContractViolation("ABX triple uses '" + triple.a_id + "' as both A and B");
  }
  const auto& x = items.at(triple.x_id);
  const double ax = dtw_distance(items.at(triple.a_id), x);
  const double bx = dtw_distance(items.at(triple.b_id), x);
  if (ax < bx) return 0.0;
  if (ax > bx) return 1.0;
  return 0.5;
}

double abx_error(std::span<const AbxTriple> triples, const ItemStore& items) {
  if (triples.empty()) throw ContractViolation("no ABX triples given");
  double sum = 0.0;
  for (const auto& t : triples) sum += abx_score(t, items);
  return sum / static_cast<double>(triples.size());
}

double ranked_average_precision(std::span<const RankedPair> ranked) {
  std::size_t positives_seen = 0;
  double sum = 0.0;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    if (!ranked[k].same_type) continue;
    ++positives_seen;
    sum += static_cast<double>(positives_seen) / static_cast<double>(k + 1);
  }
  if (positives_seen == 0) throw ContractViolation("average precision needs a positive pair");
  return sum / static_cast<double>(positives_seen);
}

double same_different_ap(std::span<const CodeVectorSequence> items) {
  if (items.size() < 2) throw ContractViolation("same-different needs at least two items");
  struct Scored {
    double distance;
    const std::string* first;
    const std::string* second;
    bool same;
  };
  std::vector<Scored> pairs;
  pairs.reserve(items.size() * (items.size() - 1) / 2);
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].type.empty()) {
      throw ContractViolation("item '" + items[i].item_id + "' has no type label");
    }
    for (std::size_t j = i + 1; j < items.size(); ++j) {
      const auto& lo = std::min(items[i].item_id, items[j].item_id);
      const auto& hi = std::max(items[i].item_id, items[j].item_id);
      pairs.push_back({dtw_distance(items[i], items[j]), &lo, &hi, items[i].type == items[j].type});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Scored& x, const Scored& y) {
    return std::tie(x.distance, *x.first, *x.second) < std::tie(y.distance, *y.first, *y.second);
  });
  std::vector<RankedPair> ranked;
  ranked.reserve(pairs.size());
  for (const auto& p : pairs) ranked.push_back({p.distance, p.same});
  return ranked_average_precision(ranked);
}

}  // namespace vqseg
