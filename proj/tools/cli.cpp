#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "vqseg/core.hpp"
#include "vqseg/dpseg.hpp"
#include "vqseg/dtw_eval.hpp"
#include "vqseg/greedyseg.hpp"
#include "vqseg/io.hpp"
#include "vqseg/kmeans.hpp"
#include "vqseg/metrics.hpp"
#include "vqseg/synth.hpp"
#include "vqseg/wordseg.hpp"

namespace vqseg::cli {

namespace fs = std::filesystem;

namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// Writes to the named file, or to the stream when the path is empty.
void emit(const std::string& path, const std::string& contents, std::ostream& out) {
  if (path.empty()) {
    out << contents;
  } else {
    io::write_file(path, contents);
  }
}

std::map<std::string, io::ManifestRecord> index_manifest(const std::vector<io::ManifestRecord>& records) {
  std::map<std::string, io::ManifestRecord> out;
  for (const auto& r : records) out.emplace(r.utt_id, r);
  return out;
}

const io::ManifestRecord& lookup(const std::map<std::string, io::ManifestRecord>& manifest,
                                 const std::string& utt_id) {
  const auto it = manifest.find(utt_id);
  if (it == manifest.end()) throw ContractViolation("utterance '" + utt_id + "' is not in the manifest");
  return it->second;
}

std::vector<FeatureSequence> load_corpus(const std::vector<io::ManifestRecord>& records) {
  std::vector<FeatureSequence> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(io::load_utterance(r));
  return out;
}

// Reference or hypothesis boundaries from either a segmentation file (four
// columns, converted with the manifest frame rate) or a boundary file (two
// columns). With a manifest, utterances it lists but the file omits are
// included as empty sets.
std::vector<BoundarySet> load_boundary_sets(const std::string& path,
                                            const std::map<std::string, io::ManifestRecord>* manifest) {
  const std::string text = io::read_file(path);
  std::istringstream probe(text);
  std::string line;
  std::size_t columns = 0;
  while (std::getline(probe, line)) {
    if (line.empty() || line.front() == '#') continue;
    columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), '\t')) + 1;
    break;
  }

  std::vector<BoundarySet> sets;
  if (columns == 4) {
    if (!manifest) throw ContractViolation("'" + path + "' is a segmentation file; --manifest is required");
    std::vector<Segmentation> segs;
    try {
      segs = io::parse_segmentations(text);
    } catch (const ParseError& e) {
      throw ParseError(path + ": " + e.what(), e.offset());
    }
    for (const auto& s : segs) {
      sets.push_back(BoundarySet::from_segmentation(s, lookup(*manifest, s.utt_id).frame_rate_hz));
    }
  } else {
    std::vector<io::UttTimes> entries;
    try {
      entries = io::parse_boundaries(text);
    } catch (const ParseError& e) {
      throw ParseError(path + ": " + e.what(), e.offset());
    }
    for (auto& e : entries) {
      const double duration = manifest ? lookup(*manifest, e.utt_id).duration_s
                                       : std::numeric_limits<double>::infinity();
      sets.push_back(BoundarySet::make(e.utt_id, std::move(e.times), duration));
    }
  }
  if (manifest) {
    std::map<std::string, bool> present;
    for (const auto& s : sets) present[s.utt_id] = true;
    for (const auto& [id, rec] : *manifest) {
      if (!present.count(id)) sets.push_back(BoundarySet{id, {}, rec.duration_s});
    }
  }
  return sets;
}

std::vector<BoundarySet> manifest_boundary_sets(const std::vector<io::ManifestRecord>& records) {
  std::vector<BoundarySet> sets;
  for (const auto& r : records) {
    if (!r.boundaries) throw ContractViolation("manifest has no reference boundaries for '" + r.utt_id + "'");
    sets.push_back(BoundarySet::make(r.utt_id, *r.boundaries, r.duration_s));
  }
  return sets;
}

std::vector<CodeVectorSequence> render_items(const std::vector<io::ItemRecord>& records,
                                             const Codebook& codebook, bool per_frame) {
  std::vector<CodeVectorSequence> items;
  items.reserve(records.size());
  for (const auto& r : records) {
    items.push_back(render_item(r.item_id, r.type, r.speaker, r.runs, codebook, per_frame));
  }
  return items;
}

PenaltyScope parse_scope(const std::string& s) {
  return s == "per-frame" ? PenaltyScope::per_frame : PenaltyScope::per_segment;
}

std::vector<Segmentation> segment_corpus(const std::vector<FeatureSequence>& corpus,
                                         const Codebook& codebook, const std::string& method,
                                         const PenaltyConfig& penalty, double frames_per_segment) {
  std::vector<Segmentation> out;
  out.reserve(corpus.size());
  for (const auto& utt : corpus) {
    const DistanceTable table(utt, codebook);
    if (method == "dp") {
      out.push_back(dp_penalized(table, penalty));
    } else {
      const std::size_t n = n_from_frames_per_segment(utt.num_frames(), frames_per_segment);
      out.push_back(method == "greedy" ? greedy_n_segment(table, n) : dp_constrained(table, n));
    }
  }
  return out;
}

double corpus_duration(const std::vector<Segmentation>& segs,
                       const std::map<std::string, io::ManifestRecord>& manifest) {
  double total = 0.0;
  for (const auto& s : segs) total += lookup(manifest, s.utt_id).duration_s;
  return total;
}

std::vector<std::vector<CodeIndex>> symbol_sequences(const std::vector<Segmentation>& segs,
                                                     bool per_frame) {
  std::vector<std::vector<CodeIndex>> out;
  out.reserve(segs.size());
  for (const auto& s : segs) out.push_back(per_frame ? s.frame_codes() : s.codes());
  return out;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Duration-penalized VQ segmentation and evaluation"};
  app.require_subcommand(1);

  // synth
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  bool text_features = false;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with ground truth");
  synth->add_option("--config", config_path, "JSON config file")->required();
  auto* seed_opt = synth->add_option("--seed", seed, "Random seed (overrides the config)");
  synth->add_option("--out-dir", out_dir, "Output directory")->required();
  synth->add_flag("--text", text_features, "Write text feature files instead of binary");

  // train-codebook
  std::string manifest_path, out_path;
  std::size_t num_codes = 512, iters = 50;
  std::uint64_t km_seed = 0;
  auto* train = app.add_subcommand("train-codebook", "k-means codebook from pooled frames");
  train->add_option("--manifest", manifest_path)->required();
  train->add_option("-K", num_codes, "Number of codes")->capture_default_str();
  train->add_option("--iters", iters)->capture_default_str();
  train->add_option("--seed", km_seed)->capture_default_str();
  train->add_option("--out", out_path)->required();

  // quantize
  std::string codebook_path;
  bool merge_runs = false;
  auto* quantize = app.add_subcommand("quantize", "Frame-wise nearest-code quantization");
  quantize->add_option("--manifest", manifest_path)->required();
  quantize->add_option("--codebook", codebook_path)->required();
  quantize->add_option("--out", out_path);
  quantize->add_flag("--merge-runs", merge_runs, "Collapse runs of repeated codes into one segment");

  // segment
  std::string method = "dp", scope = "per-segment";
  double lambda = 3.0, frames_per_segment = 3.0;
  std::size_t max_seg_len = 100;
  auto* segment = app.add_subcommand("segment", "Segment every utterance in a manifest");
  segment->add_option("--method", method)
      ->check(CLI::IsMember({"dp", "dp-constrained", "greedy"}))
      ->capture_default_str();
  segment->add_option("--lambda", lambda)->capture_default_str();
  segment->add_option("--penalty-scope", scope)
      ->check(CLI::IsMember({"per-segment", "per-frame"}))
      ->capture_default_str();
  segment->add_option("--frames-per-segment", frames_per_segment)->capture_default_str();
  segment->add_option("--max-seg-len", max_seg_len, "0 means unlimited")->capture_default_str();
  segment->add_option("--manifest", manifest_path)->required();
  segment->add_option("--codebook", codebook_path)->required();
  segment->add_option("--out", out_path);

  // eval-boundaries / eval-tokens
  std::string ref_path, hyp_path, report_format = "tsv";
  double tolerance_ms = 20.0;
  bool include_edges = false;
  auto* eval_b = app.add_subcommand("eval-boundaries", "Boundary precision/recall/F, OS and R-value");
  eval_b->add_option("--ref", ref_path)->required();
  eval_b->add_option("--hyp", hyp_path)->required();
  eval_b->add_option("--tolerance-ms", tolerance_ms)->capture_default_str();
  eval_b->add_option("--include-edges", include_edges)->capture_default_str();
  eval_b->add_option("--report", report_format)->check(CLI::IsMember({"tsv", "json"}))->capture_default_str();
  eval_b->add_option("--manifest", manifest_path, "Durations and frame rates");

  auto* eval_t = app.add_subcommand("eval-tokens", "Token precision/recall/F");
  eval_t->add_option("--ref", ref_path)->required();
  eval_t->add_option("--hyp", hyp_path)->required();
  eval_t->add_option("--tolerance-ms", tolerance_ms)->capture_default_str();
  eval_t->add_option("--manifest", manifest_path, "Durations and frame rates")->required();
  eval_t->add_option("--report", report_format)->check(CLI::IsMember({"tsv", "json"}))->capture_default_str();

  // bitrate
  std::string segments_path;
  bool per_frame = false;
  auto* bitrate_cmd = app.add_subcommand("bitrate", "Corpus bitrate of a segmentation");
  bitrate_cmd->add_option("--segments", segments_path)->required();
  bitrate_cmd->add_option("--manifest", manifest_path)->required();
  bitrate_cmd->add_flag("--per-frame", per_frame, "One symbol per frame instead of per segment");

  // eval-abx / eval-samediff
  std::string items_path, triples_path;
  auto* abx = app.add_subcommand("eval-abx", "ABX error rate over supplied triples");
  abx->add_option("--items", items_path)->required();
  abx->add_option("--triples", triples_path)->required();
  abx->add_option("--codebook", codebook_path)->required();
  abx->add_flag("--per-frame", per_frame, "One code vector per frame instead of per segment");

  auto* samediff = app.add_subcommand("eval-samediff", "Same-different average precision");
  samediff->add_option("--items", items_path)->required();
  samediff->add_option("--codebook", codebook_path)->required();
  samediff->add_flag("--per-frame", per_frame, "One code vector per frame instead of per segment");

  // wordseg-threshold
  std::string mode = "absolute";
  double theta = 0.1, alpha = 0.1, frame_rate = 50.0;
  auto* wordseg = app.add_subcommand("wordseg-threshold", "Transition-probability word boundaries");
  wordseg->add_option("--segments", segments_path)->required();
  wordseg->add_option("--mode", mode)->check(CLI::IsMember({"absolute", "relative"}))->capture_default_str();
  wordseg->add_option("--theta", theta)->capture_default_str();
  wordseg->add_option("--alpha", alpha, "Add-alpha smoothing")->capture_default_str();
  wordseg->add_option("--manifest", manifest_path, "Frame rates per utterance");
  wordseg->add_option("--frame-rate", frame_rate, "Frame rate when no manifest is given")->capture_default_str();
  wordseg->add_option("--out", out_path);

  // export-symbols
  auto* export_cmd = app.add_subcommand("export-symbols", "Code tokens for external word segmenters");
  export_cmd->add_option("--segments", segments_path)->required();
  export_cmd->add_option("--out", out_path);

  // sweep-lambda
  std::vector<double> lambdas;
  auto* sweep = app.add_subcommand("sweep-lambda", "Bitrate and boundary metrics over penalty weights");
  sweep->add_option("--lambdas", lambdas)->delimiter(',')->required();
  sweep->add_option("--manifest", manifest_path)->required();
  sweep->add_option("--codebook", codebook_path)->required();
  sweep->add_option("--ref", ref_path, "Reference boundaries (default: manifest column)");
  sweep->add_option("--penalty-scope", scope)
      ->check(CLI::IsMember({"per-segment", "per-frame"}))
      ->capture_default_str();
  sweep->add_option("--max-seg-len", max_seg_len, "0 means unlimited")->capture_default_str();
  sweep->add_option("--tolerance-ms", tolerance_ms)->capture_default_str();
  sweep->add_option("--out", out_path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  const double tolerance_s = tolerance_ms / 1000.0;
  PenaltyConfig penalty;
  penalty.lambda = lambda;
  penalty.scope = parse_scope(scope);
  penalty.max_seg_len = max_seg_len == 0 ? std::nullopt : std::optional<std::size_t>(max_seg_len);

  try {
    if (*synth) {
      SynthConfig config = io::parse_synth_config(io::read_file(config_path));
      if (seed_opt->count() > 0) config.seed = seed;
      const SynthCorpus corpus = synth_corpus(config);
      const fs::path dir(out_dir);
      const auto format = text_features ? io::MatrixFormat::text : io::MatrixFormat::binary;
      io::store_codebook(dir / "codebook.vqc", corpus.codebook, format);
      std::vector<io::ManifestRecord> records;
      std::vector<BoundarySet> boundaries;
      for (std::size_t u = 0; u < corpus.features.size(); ++u) {
        const auto& utt = corpus.features[u];
        const std::string rel = "features/" + utt.utt_id() + (text_features ? ".txt" : ".vqf");
        io::store_features(dir / rel, utt.data(), format);
        auto b = BoundarySet::from_segmentation(corpus.truth[u], utt.frame_rate_hz());
        records.push_back({utt.utt_id(), rel, utt.frame_rate_hz(), utt.duration_s(), b.times, "", {}});
        boundaries.push_back(std::move(b));
      }
      io::store_manifest(dir / "manifest.tsv", records);
      io::store_segmentations(dir / "reference.seg", corpus.truth);
      io::write_file(dir / "reference_boundaries.tsv", io::format_boundaries(boundaries));
      return 0;
    }

    if (*train) {
      const auto corpus = load_corpus(io::load_manifest(manifest_path));
      const auto result = kmeans(pool_frames(corpus), num_codes, iters, km_seed);
      io::store_codebook(out_path, result.codebook);
      return 0;
    }

    if (*quantize) {
      const Codebook codebook = io::load_codebook(codebook_path);
      std::vector<Segmentation> segs;
      for (const auto& utt : load_corpus(io::load_manifest(manifest_path))) {
        const auto codes = quantize_sequence(utt, codebook);
        Segmentation s = segmentation_from_codes(utt.utt_id(), codes, merge_runs);
        s.total_cost = segmentation_sse(DistanceTable(utt, codebook), s);
        segs.push_back(std::move(s));
      }
      emit(out_path, io::format_segmentations(segs), out);
      return 0;
    }

    if (*segment) {
      const Codebook codebook = io::load_codebook(codebook_path);
      const auto corpus = load_corpus(io::load_manifest(manifest_path));
      const auto segs = segment_corpus(corpus, codebook, method, penalty, frames_per_segment);
      emit(out_path, io::format_segmentations(segs), out);
      return 0;
    }

    if (*eval_b || *eval_t) {
      std::optional<std::map<std::string, io::ManifestRecord>> manifest;
      if (!manifest_path.empty()) manifest = index_manifest(io::load_manifest(manifest_path));
      const auto* m = manifest ? &*manifest : nullptr;
      const auto refs = load_boundary_sets(ref_path, m);
      const auto hyps = load_boundary_sets(hyp_path, m);
      const EvalReport report = *eval_b ? evaluate_boundaries(refs, hyps, tolerance_s, include_edges)
                                        : evaluate_tokens(refs, hyps, tolerance_s);
      out << (report_format == "json" ? io::report_json(report) : io::report_tsv(report));
      return 0;
    }

    if (*bitrate_cmd) {
      const auto manifest = index_manifest(io::load_manifest(manifest_path));
      const auto segs = io::load_segmentations(segments_path);
      const auto symbols = symbol_sequences(segs, per_frame);
      const double duration = corpus_duration(segs, manifest);
      std::size_t n_symbols = 0;
      for (const auto& s : symbols) n_symbols += s.size();
      out << "n_utterances\tn_symbols\tduration_s\tentropy_bits\tbitrate_bps\n"
          << segs.size() << '\t' << n_symbols << '\t' << fixed6(duration) << '\t'
          << fixed6(symbol_entropy(symbols)) << '\t' << fixed6(bitrate(symbols, duration)) << '\n';
      return 0;
    }

    if (*abx) {
      const Codebook codebook = io::load_codebook(codebook_path);
      const auto triples = io::load_triples(triples_path);
      const ItemStore store(render_items(io::load_items(items_path), codebook, per_frame));
      out << "n_triples\tabx_error\n" << triples.size() << '\t' << fixed6(abx_error(triples, store)) << '\n';
      return 0;
    }

    if (*samediff) {
      const Codebook codebook = io::load_codebook(codebook_path);
      const auto items = render_items(io::load_items(items_path), codebook, per_frame);
      std::size_t positives = 0;
      for (std::size_t i = 0; i < items.size(); ++i) {
        for (std::size_t j = i + 1; j < items.size(); ++j) positives += items[i].type == items[j].type;
      }
      const double ap = same_different_ap(items);
      out << "n_items\tn_pairs\tn_positive\tap\n"
          << items.size() << '\t' << items.size() * (items.size() - 1) / 2 << '\t' << positives
          << '\t' << fixed6(ap) << '\n';
      return 0;
    }

    if (*wordseg) {
      const auto segs = io::load_segmentations(segments_path);
      std::optional<std::map<std::string, io::ManifestRecord>> manifest;
      if (!manifest_path.empty()) manifest = index_manifest(io::load_manifest(manifest_path));
      const auto corpus = symbol_sequences(segs, false);
      const BigramModel model = BigramModel::train(corpus, alpha);
      const ThresholdMode threshold{
          mode == "relative" ? ThresholdMode::Kind::relative : ThresholdMode::Kind::absolute, theta};
      std::vector<BoundarySet> words;
      for (std::size_t u = 0; u < segs.size(); ++u) {
        const double rate = manifest ? lookup(*manifest, segs[u].utt_id).frame_rate_hz : frame_rate;
        std::vector<double> times;
        for (std::size_t pos : threshold_segment(corpus[u], model, threshold)) {
          times.push_back(static_cast<double>(segs[u].segments[pos].start) / rate);
        }
        words.push_back(BoundarySet::make(segs[u].utt_id, std::move(times),
                                          static_cast<double>(segs[u].num_frames()) / rate));
      }
      emit(out_path, io::format_boundaries(words), out);
      return 0;
    }

    if (*export_cmd) {
      emit(out_path, export_symbol_corpus(io::load_segmentations(segments_path)), out);
      return 0;
    }

    if (*sweep) {
      const auto records = io::load_manifest(manifest_path);
      const auto manifest = index_manifest(records);
      const Codebook codebook = io::load_codebook(codebook_path);
      const auto corpus = load_corpus(records);
      const auto refs = ref_path.empty() ? manifest_boundary_sets(records)
                                         : load_boundary_sets(ref_path, &manifest);
      std::vector<DistanceTable> tables;
      tables.reserve(corpus.size());
      for (const auto& utt : corpus) tables.emplace_back(utt, codebook);

      std::string tsv = "lambda\tn_segments\tbitrate_bps\tprecision\trecall\tf_score\tos\tr_value\n";
      for (double l : lambdas) {
        PenaltyConfig cfg = penalty;
        cfg.lambda = l;
        std::vector<Segmentation> segs;
        std::vector<BoundarySet> hyps;
        std::size_t n_segments = 0;
        for (std::size_t u = 0; u < tables.size(); ++u) {
          segs.push_back(dp_penalized(tables[u], cfg));
          n_segments += segs.back().num_segments();
          hyps.push_back(BoundarySet::from_segmentation(segs.back(), corpus[u].frame_rate_hz()));
        }
        const auto symbols = symbol_sequences(segs, false);
        const EvalReport report = evaluate_boundaries(refs, hyps, tolerance_s);
        tsv += io::format_double(l) + '\t' + std::to_string(n_segments) + '\t' +
               fixed6(bitrate(symbols, corpus_duration(segs, manifest))) + '\t' +
               fixed6(report.boundaries.precision) + '\t' + fixed6(report.boundaries.recall) + '\t' +
               fixed6(report.boundaries.f_score) + '\t' + (report.os ? fixed6(*report.os) : "nan") +
               '\t' + (report.r_value ? fixed6(*report.r_value) : "nan") + '\n';
      }
      emit(out_path, tsv, out);
      return 0;
    }
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace vqseg::cli
