#include "vqseg/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "vqseg/synth.hpp"

namespace vqseg::io {

namespace {

// Splits text into lines, remembering where each line starts.
class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool next(std::string_view& line, std::size_t& offset) {
    if (pos_ >= text_.size()) return false;
    offset = pos_;
    const std::size_t nl = text_.find('\n', pos_);
    const std::size_t stop = nl == std::string_view::npos ? text_.size() : nl;
    line = text_.substr(pos_, stop - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = stop + 1;
    return true;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

struct Token {
  std::string_view text;
  std::size_t offset;
};

std::vector<Token> split(std::string_view line, std::size_t base, bool tabs_only) {
  std::vector<Token> out;
  auto is_sep = [&](char c) { return tabs_only ? c == '\t' : (c == ' ' || c == '\t'); };
  if (tabs_only) {
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || is_sep(line[i])) {
        out.push_back({line.substr(start, i - start), base + start});
        start = i + 1;
      }
    }
    return out;
  }
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_sep(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_sep(line[i])) ++i;
    if (i > start) out.push_back({line.substr(start, i - start), base + start});
  }
  return out;
}

bool skippable(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos || line.front() == '#';
}

double parse_double(const Token& tok, std::string_view what) {
  double value = 0.0;
  const char* first = tok.text.data();
  const char* last = first + tok.text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError("expected a number for " + std::string(what) + ", got '" +
                         std::string(tok.text) + "'",
                     tok.offset);
  }
  if (!std::isfinite(value)) {
    throw ParseError("non-finite " + std::string(what), tok.offset);
  }
  return value;
}

std::uint64_t parse_uint(const Token& tok, std::string_view what) {
  std::uint64_t value = 0;
  const char* first = tok.text.data();
  const char* last = first + tok.text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError("expected a non-negative integer for " + std::string(what) + ", got '" +
                         std::string(tok.text) + "'",
                     tok.offset);
  }
  return value;
}

void expect_fields(const std::vector<Token>& fields, std::size_t min, std::size_t max,
                   std::size_t offset, std::string_view what) {
  if (fields.size() < min || fields.size() > max) {
    throw ParseError(std::string(what) + ": expected " + std::to_string(min) +
                         (min == max ? "" : "-" + std::to_string(max)) + " tab-separated fields, got " +
                         std::to_string(fields.size()),
                     offset);
  }
}

std::string format_g9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::uint32_t swap_if_big_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = (v >> 24) | ((v >> 8) & 0xff00U) | ((v << 8) & 0xff0000U) | (v << 24);
  }
  return v;
}

std::uint32_t read_u32(std::string_view bytes, std::size_t at) {
  std::uint32_t v;
  std::memcpy(&v, bytes.data() + at, 4);
  return swap_if_big_endian(v);
}

void append_u32(std::string& out, std::uint32_t v) {
  v = swap_if_big_endian(v);
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string encode_matrix(const Matrix& m, std::string_view magic, MatrixFormat format) {
  std::string out;
  if (format == MatrixFormat::binary) {
    out.reserve(12 + 4 * m.values().size());
    out.append(magic);
    append_u32(out, static_cast<std::uint32_t>(m.rows()));
    append_u32(out, static_cast<std::uint32_t>(m.cols()));
    for (double v : m.values()) {
      std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
      append_u32(out, bits);
    }
    return out;
  }
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out += ' ';
      out += format_g9(row[c]);
    }
    out += '\n';
  }
  return out;
}

Matrix decode_matrix(std::string_view bytes, std::string_view magic) {
  if (bytes.substr(0, magic.size()) == magic) {
    if (bytes.size() < 12) throw ParseError("truncated header", bytes.size());
    const std::uint64_t rows = read_u32(bytes, 4);
    const std::uint64_t cols = read_u32(bytes, 8);
    const std::uint64_t expected = 12 + 4 * rows * cols;
    if (bytes.size() < expected) throw ParseError("truncated matrix payload", bytes.size());
    if (bytes.size() > expected) throw ParseError("trailing bytes after matrix payload", expected);
    std::vector<double> values(rows * cols);
    for (std::size_t i = 0; i < values.size(); ++i) {
      const std::size_t at = 12 + 4 * i;
      const float f = std::bit_cast<float>(read_u32(bytes, at));
      if (!std::isfinite(f)) throw ParseError("non-finite value", at);
      values[i] = f;
    }
    return Matrix(rows, cols, std::move(values));
  }
  if (bytes.size() >= 2 && bytes[0] == 'V' && bytes[1] == 'Q') {
    throw ParseError("bad magic, expected '" + std::string(magic) + "'", 0);
  }

  LineReader lines(bytes);
  std::string_view line;
  std::size_t offset = 0;
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  while (lines.next(line, offset)) {
    if (skippable(line)) continue;
    const auto tokens = split(line, offset, false);
    if (rows == 0) {
      cols = tokens.size();
    } else if (tokens.size() != cols) {
      throw ParseError("row has " + std::to_string(tokens.size()) + " values, expected " +
                           std::to_string(cols),
                       offset);
    }
    for (const auto& tok : tokens) values.push_back(parse_double(tok, "matrix entry"));
    ++rows;
  }
  if (rows == 0) throw ParseError("no matrix rows", bytes.size());
  return Matrix(rows, cols, std::move(values));
}

void store_features(const std::filesystem::path& path, const Matrix& data, MatrixFormat format) {
  write_file(path, encode_matrix(data, kFeatureMagic, format));
}

Matrix load_features(const std::filesystem::path& path) {
  try {
    return decode_matrix(read_file(path), kFeatureMagic);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.offset());
  }
}

void store_codebook(const std::filesystem::path& path, const Codebook& codebook, MatrixFormat format) {
  write_file(path, encode_matrix(codebook.vectors(), kCodebookMagic, format));
}

Codebook load_codebook(const std::filesystem::path& path) {
  try {
    return Codebook(decode_matrix(read_file(path), kCodebookMagic));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.offset());
  }
}

std::string format_segmentations(std::span<const Segmentation> segmentations) {
  std::string out;
  for (const auto& seg : segmentations) {
    for (const auto& s : seg.segments) {
      out += seg.utt_id;
      out += '\t';
      out += std::to_string(s.start);
      out += '\t';
      out += std::to_string(s.end);
      out += '\t';
      out += std::to_string(s.code);
      out += '\n';
    }
  }
  return out;
}

std::vector<Segmentation> parse_segmentations(std::string_view text) {
  std::vector<Segmentation> out;
  std::map<std::string, std::size_t, std::less<>> index;
  std::vector<std::size_t> first_offset;
  LineReader lines(text);
  std::string_view line;
  std::size_t offset = 0;
  while (lines.next(line, offset)) {
    if (skippable(line)) continue;
    const auto f = split(line, offset, true);
    expect_fields(f, 4, 4, offset, "segmentation line");
    const std::string utt(f[0].text);
    auto it = index.find(utt);
    if (it == index.end()) {
      it = index.emplace(utt, out.size()).first;
      out.push_back({utt, {}, 0.0});
      first_offset.push_back(offset);
    }
    const auto code = parse_uint(f[3], "code");
    if (code > std::numeric_limits<CodeIndex>::max()) throw ParseError("code out of range", f[3].offset);
    out[it->second].segments.push_back({static_cast<std::size_t>(parse_uint(f[1], "start frame")),
                                        static_cast<std::size_t>(parse_uint(f[2], "end frame")),
                                        static_cast<CodeIndex>(code)});
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto& seg = out[i];
    std::stable_sort(seg.segments.begin(), seg.segments.end(),
                     [](const Segment& a, const Segment& b) { return a.start < b.start; });
    try {
      seg.validate(seg.num_frames(), std::numeric_limits<CodeIndex>::max());
    } catch (const ContractViolation& e) {
      throw ParseError(e.what(), first_offset[i]);
    }
  }
  return out;
}

void store_segmentations(const std::filesystem::path& path, std::span<const Segmentation> segmentations) {
  write_file(path, format_segmentations(segmentations));
}

std::vector<Segmentation> load_segmentations(const std::filesystem::path& path) {
  try {
    return parse_segmentations(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.offset());
  }
}

std::string format_boundaries(std::span<const BoundarySet> sets) {
  std::string out;
  for (const auto& set : sets) {
    for (double t : set.times) {
      out += set.utt_id;
      out += '\t';
      out += format_double(t);
      out += '\n';
    }
  }
  return out;
}

std::vector<UttTimes> parse_boundaries(std::string_view text) {
  std::vector<UttTimes> out;
  std::map<std::string, std::size_t, std::less<>> index;
  LineReader lines(text);
  std::string_view line;
  std::size_t offset = 0;
  while (lines.next(line, offset)) {
    if (skippable(line)) continue;
    const auto f = split(line, offset, true);
    expect_fields(f, 2, 2, offset, "boundary line");
    const std::string utt(f[0].text);
    auto it = index.find(utt);
    if (it == index.end()) {
      it = index.emplace(utt, out.size()).first;
      out.push_back({utt, {}});
    }
    out[it->second].times.push_back(parse_double(f[1], "boundary time"));
  }
  return out;
}

std::vector<UttTimes> load_boundaries(const std::filesystem::path& path) {
  try {
    return parse_boundaries(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.offset());
  }
}

std::string format_manifest(std::span<const ManifestRecord> records) {
  std::string out = "# utt_id\tfeatures\tframe_rate_hz\tduration_s\tboundaries\tlabel\n";
  for (const auto& r : records) {
    out += r.utt_id + '\t' + r.features + '\t' + format_double(r.frame_rate_hz) + '\t' +
           format_double(r.duration_s) + '\t';
    if (r.boundaries && !r.boundaries->empty()) {
      for (std::size_t i = 0; i < r.boundaries->size(); ++i) {
        if (i > 0) out += ',';
        out += format_double((*r.boundaries)[i]);
      }
    } else {
      out += r.boundaries ? "" : "-";
    }
    out += '\t';
    out += r.label.empty() ? "-" : r.label;
    out += '\n';
  }
  return out;
}

std::vector<ManifestRecord> parse_manifest(std::string_view text, const std::filesystem::path& base_dir) {
  std::vector<ManifestRecord> out;
  std::map<std::string, std::size_t, std::less<>> seen;
  LineReader lines(text);
  std::string_view line;
  std::size_t offset = 0;
  while (lines.next(line, offset)) {
    if (skippable(line)) continue;
    const auto f = split(line, offset, true);
    expect_fields(f, 4, 6, offset, "manifest line");
    ManifestRecord r;
    r.utt_id = std::string(f[0].text);
    if (r.utt_id.empty()) throw ParseError("empty utterance id", f[0].offset);
    if (!seen.emplace(r.utt_id, out.size()).second) {
      throw ParseError("duplicate utterance id '" + r.utt_id + "'", f[0].offset);
    }
    r.features = std::string(f[1].text);
    r.frame_rate_hz = parse_double(f[2], "frame rate");
    r.duration_s = parse_double(f[3], "duration");
    if (!(r.frame_rate_hz > 0.0)) throw ParseError("frame rate must be positive", f[2].offset);
    if (!(r.duration_s > 0.0)) throw ParseError("duration must be positive", f[3].offset);
    if (f.size() >= 5 && f[4].text != "-") {
      std::vector<double> times;
      std::string_view rest = f[4].text;
      std::size_t pos = 0;
      while (pos <= rest.size() && !rest.empty()) {
        const std::size_t comma = std::min(rest.find(',', pos), rest.size());
        times.push_back(parse_double({rest.substr(pos, comma - pos), f[4].offset + pos}, "boundary time"));
        pos = comma + 1;
      }
      r.boundaries = std::move(times);
    }
    if (f.size() >= 6 && f[5].text != "-") r.label = std::string(f[5].text);
    const std::filesystem::path p(r.features);
    r.resolved = p.is_absolute() ? p : base_dir / p;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ManifestRecord> load_manifest(const std::filesystem::path& path) {
  try {
    return parse_manifest(read_file(path), path.parent_path());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.offset());
  }
}

void store_manifest(const std::filesystem::path& path, std::span<const ManifestRecord> records) {
  write_file(path, format_manifest(records));
}

FeatureSequence load_utterance(const ManifestRecord& record) {
  return FeatureSequence(record.utt_id, record.frame_rate_hz, load_features(record.resolved));
}

namespace {

std::string dash_if_empty(const std::string& s) { return s.empty() ? "-" : s; }
std::string empty_if_dash(std::string_view s) { return s == "-" ? std::string() : std::string(s); }

}  // namespace

std::string format_items(std::span<const ItemRecord> items) {
  std::string out;
  for (const auto& item : items) {
    out += item.item_id + '\t' + dash_if_empty(item.type) + '\t' + dash_if_empty(item.speaker) + '\t';
    for (std::size_t i = 0; i < item.runs.size(); ++i) {
      if (i > 0) out += ' ';
      out += std::to_string(item.runs[i].code);
      if (item.runs[i].length != 1) out += ':' + std::to_string(item.runs[i].length);
    }
    out += '\n';
  }
  return out;
}

std::vector<ItemRecord> parse_items(std::string_view text) {
  std::vector<ItemRecord> out;
  LineReader lines(text);
  std::string_view line;
  std::size_t offset = 0;
  while (lines.next(line, offset)) {
    if (skippable(line)) continue;
    const auto f = split(line, offset, true);
    expect_fields(f, 4, 4, offset, "item line");
    ItemRecord item{std::string(f[0].text), empty_if_dash(f[1].text), empty_if_dash(f[2].text), {}};
    for (const auto& tok : split(f[3].text, f[3].offset, false)) {
      const std::size_t colon = tok.text.find(':');
      CodeRun run;
      const auto code = parse_uint({tok.text.substr(0, colon), tok.offset}, "code");
      if (code > std::numeric_limits<CodeIndex>::max()) throw ParseError("code out of range", tok.offset);
      run.code = static_cast<CodeIndex>(code);
      if (colon != std::string_view::npos) {
        run.length = static_cast<std::size_t>(
            parse_uint({tok.text.substr(colon + 1), tok.offset + colon + 1}, "run length"));
        if (run.length == 0) throw ParseError("run length must be positive", tok.offset + colon + 1);
      }
      item.runs.push_back(run);
    }
    if (item.runs.empty()) throw ParseError("item '" + item.item_id + "' has no codes", f[3].offset);
    out.push_back(std::move(item));
  }
  return out;
}

std::vector<ItemRecord> load_items(const std::filesystem::path& path) {
  try {
    return parse_items(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.offset());
  }
}

std::string format_triples(std::span<const AbxTriple> triples) {
  std::string out;
  for (const auto& t : triples) out += t.a_id + '\t' + t.b_id + '\t' + t.x_id + '\n';
  return out;
}

std::vector<AbxTriple> parse_triples(std::string_view text) {
  std::vector<AbxTriple> out;
  LineReader lines(text);
  std::string_view line;
  std::size_t offset = 0;
  while (lines.next(line, offset)) {
    if (skippable(line)) continue;
    const auto f = split(line, offset, true);
    expect_fields(f, 3, 3, offset, "triple line");
    out.push_back({std::string(f[0].text), std::string(f[1].text), std::string(f[2].text)});
  }
  return out;
}

std::vector<AbxTriple> load_triples(const std::filesystem::path& path) {
  try {
    return parse_triples(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.offset());
  }
}

namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string optional_fixed6(const std::optional<double>& v) { return v ? fixed6(*v) : "nan"; }

}  // namespace

std::string report_tsv(const EvalReport& report) {
  std::string header;
  std::string values;
  auto col = [&](const std::string& name, const std::string& value) {
    if (!header.empty()) {
      header += '\t';
      values += '\t';
    }
    header += name;
    values += value;
  };
  if (!report.token_counts) {
    col("n_ref", std::to_string(report.counts.n_ref));
    col("n_hyp", std::to_string(report.counts.n_hyp));
    col("n_hit", std::to_string(report.counts.n_hit));
    col("precision", fixed6(report.boundaries.precision));
    col("recall", fixed6(report.boundaries.recall));
    col("f_score", fixed6(report.boundaries.f_score));
    col("os", optional_fixed6(report.os));
    col("r_value", optional_fixed6(report.r_value));
  } else {
    col("n_ref_tokens", std::to_string(report.token_counts->n_ref));
    col("n_hyp_tokens", std::to_string(report.token_counts->n_hyp));
    col("n_hit_tokens", std::to_string(report.token_counts->n_hit));
    col("token_precision", fixed6(report.tokens->precision));
    col("token_recall", fixed6(report.tokens->recall));
    col("token_f_score", fixed6(report.tokens->f_score));
  }
  return header + '\n' + values + '\n';
}

std::string report_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  if (!report.token_counts) {
    j["n_ref"] = report.counts.n_ref;
    j["n_hyp"] = report.counts.n_hyp;
    j["n_hit"] = report.counts.n_hit;
    j["precision"] = report.boundaries.precision;
    j["recall"] = report.boundaries.recall;
    j["f_score"] = report.boundaries.f_score;
    j["os"] = report.os ? nlohmann::ordered_json(*report.os) : nlohmann::ordered_json(nullptr);
    j["r_value"] = report.r_value ? nlohmann::ordered_json(*report.r_value) : nlohmann::ordered_json(nullptr);
  } else {
    j["n_ref_tokens"] = report.token_counts->n_ref;
    j["n_hyp_tokens"] = report.token_counts->n_hyp;
    j["n_hit_tokens"] = report.token_counts->n_hit;
    j["token_precision"] = report.tokens->precision;
    j["token_recall"] = report.tokens->recall;
    j["token_f_score"] = report.tokens->f_score;
  }
  return j.dump(2) + '\n';
}

SynthConfig parse_synth_config(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("synth config: ") + e.what(), e.byte);
  }
  if (!j.is_object()) throw ParseError("synth config must be a JSON object", 0);
  SynthConfig c;
  try {
    c.num_codes = j.value("K", c.num_codes);
    c.dim = j.value("D", c.dim);
    c.n_utterances = j.value("n_utterances", c.n_utterances);
    c.mean_segment_len = j.value("mean_segment_len", c.mean_segment_len);
    c.min_segments = j.value("min_segments", c.min_segments);
    c.max_segments = j.value("max_segments", c.max_segments);
    c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
    c.frame_rate_hz = j.value("frame_rate_hz", c.frame_rate_hz);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::type_error& e) {
    throw ParseError(std::string("synth config: ") + e.what(), 0);
  }
  c.validate();
  return c;
}

}  // namespace vqseg::io
