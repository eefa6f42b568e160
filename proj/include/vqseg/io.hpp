#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vqseg/core.hpp"
#include "vqseg/dtw_eval.hpp"
#include "vqseg/metrics.hpp"

namespace vqseg {

struct SynthConfig;

namespace io {

// Binary matrices: 4-byte magic, uint32 rows, uint32 cols, then rows*cols
// little-endian float32 values, row-major. Text matrices: one row per line,
// whitespace-separated decimals written with 9 significant digits.
inline constexpr std::string_view kFeatureMagic = "VQF1";
inline constexpr std::string_view kCodebookMagic = "VQC1";

enum class MatrixFormat { binary, text };

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

std::string encode_matrix(const Matrix& m, std::string_view magic, MatrixFormat format);
// Binary when the buffer starts with the magic, text otherwise. Rejects NaN/Inf.
Matrix decode_matrix(std::string_view bytes, std::string_view magic);

void store_features(const std::filesystem::path& path, const Matrix& data,
                    MatrixFormat format = MatrixFormat::binary);
Matrix load_features(const std::filesystem::path& path);

void store_codebook(const std::filesystem::path& path, const Codebook& codebook,
                    MatrixFormat format = MatrixFormat::binary);
Codebook load_codebook(const std::filesystem::path& path);

// Segmentations: "utt_id<TAB>start<TAB>end<TAB>code" per segment.
std::string format_segmentations(std::span<const Segmentation> segmentations);
std::vector<Segmentation> parse_segmentations(std::string_view text);
void store_segmentations(const std::filesystem::path& path, std::span<const Segmentation> segmentations);
std::vector<Segmentation> load_segmentations(const std::filesystem::path& path);

// Boundary files: "utt_id<TAB>time_s" per boundary, utterances in order of
// first appearance.
struct UttTimes {
  std::string utt_id;
  std::vector<double> times;
};
std::string format_boundaries(std::span<const BoundarySet> sets);
std::vector<UttTimes> parse_boundaries(std::string_view text);
std::vector<UttTimes> load_boundaries(const std::filesystem::path& path);

// Corpus manifest, tab-separated:
//   utt_id  features  frame_rate_hz  duration_s  [boundaries]  [label]
// boundaries is a comma-separated list of seconds or "-". Feature paths are
// resolved against the manifest's directory. Lines starting with '#' are
// comments.
struct ManifestRecord {
  std::string utt_id;
  std::string features;  // as written
  double frame_rate_hz = 50.0;
  double duration_s = 0.0;
  std::optional<std::vector<double>> boundaries;
  std::string label;
  std::filesystem::path resolved;
};
std::string format_manifest(std::span<const ManifestRecord> records);
std::vector<ManifestRecord> parse_manifest(std::string_view text, const std::filesystem::path& base_dir);
std::vector<ManifestRecord> load_manifest(const std::filesystem::path& path);
void store_manifest(const std::filesystem::path& path, std::span<const ManifestRecord> records);

// Loads the features a record points to, tagged with its id and frame rate.
FeatureSequence load_utterance(const ManifestRecord& record);

// Item manifest for ABX / same-different, tab-separated:
//   item_id  type  speaker  runs
// runs is space-separated "code" or "code:length"; "-" marks a missing
// type or speaker.
struct ItemRecord {
  std::string item_id;
  std::string type;
  std::string speaker;
  std::vector<CodeRun> runs;
};
std::string format_items(std::span<const ItemRecord> items);
std::vector<ItemRecord> parse_items(std::string_view text);
std::vector<ItemRecord> load_items(const std::filesystem::path& path);

// Triples: "a_id<TAB>b_id<TAB>x_id".
std::string format_triples(std::span<const AbxTriple> triples);
std::vector<AbxTriple> parse_triples(std::string_view text);
std::vector<AbxTriple> load_triples(const std::filesystem::path& path);

// Reports. TSV has a header line and one value line; JSON is one object.
std::string report_tsv(const EvalReport& report);
std::string report_json(const EvalReport& report);

SynthConfig parse_synth_config(std::string_view json_text);

// Shortest decimal that round-trips the double.
std::string format_double(double value);

}  // namespace io
}  // namespace vqseg
