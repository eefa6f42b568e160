#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>

#include "vqseg/error.hpp"
#include "vqseg/io.hpp"
#include "vqseg/synth.hpp"

using namespace vqseg;
namespace fs = std::filesystem;

namespace {

Matrix random_float_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c) {
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<double> v(r * c);
  for (auto& x : v) x = static_cast<double>(u(rng));
  return Matrix(r, c, std::move(v));
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "vqseg_test_io";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("binary matrix round trip is bit exact") {
  std::mt19937_64 rng(301);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = random_float_matrix(rng, 1 + rng() % 30, 1 + rng() % 9);
    const auto bytes = io::encode_matrix(m, io::kFeatureMagic, io::MatrixFormat::binary);
    CHECK(bytes.size() == 12 + 4 * m.rows() * m.cols());
    CHECK(bytes.substr(0, 4) == "VQF1");
    CHECK(io::decode_matrix(bytes, io::kFeatureMagic) == m);
  }
  const auto path = scratch("f.vqf");
  const auto m = random_float_matrix(rng, 7, 3);
  io::store_features(path, m);
  CHECK(io::load_features(path) == m);
  const Codebook cb(random_float_matrix(rng, 4, 3));
  io::store_codebook(scratch("c.vqc"), cb);
  CHECK(io::load_codebook(scratch("c.vqc")).vectors() == cb.vectors());
}

TEST_CASE("binary layout is little endian") {
  const Matrix m{{1.0}};
  const auto bytes = io::encode_matrix(m, io::kCodebookMagic, io::MatrixFormat::binary);
  const unsigned char expected[] = {'V', 'Q', 'C', '1', 1, 0, 0, 0, 1, 0, 0, 0, 0x00, 0x00, 0x80, 0x3f};
  REQUIRE(bytes.size() == sizeof expected);
  CHECK(std::memcmp(bytes.data(), expected, sizeof expected) == 0);
}

TEST_CASE("text and binary encodings agree") {
  std::mt19937_64 rng(307);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = random_float_matrix(rng, 1 + rng() % 20, 1 + rng() % 6);
    const auto text = io::encode_matrix(m, io::kFeatureMagic, io::MatrixFormat::text);
    const auto bin = io::encode_matrix(m, io::kFeatureMagic, io::MatrixFormat::binary);
    const auto a = io::decode_matrix(text, io::kFeatureMagic);
    const auto b = io::decode_matrix(bin, io::kFeatureMagic);
    REQUIRE(a.rows() == b.rows());
    REQUIRE(a.cols() == b.cols());
    for (std::size_t i = 0; i < a.values().size(); ++i) CHECK(std::abs(a.values()[i] - b.values()[i]) <= 1e-9);
  }
  const Matrix precise{{0.123456789012, -3.0e-5}};
  const auto back = io::decode_matrix(io::encode_matrix(precise, io::kFeatureMagic, io::MatrixFormat::text),
                                      io::kFeatureMagic);
  CHECK(back(0, 0) == doctest::Approx(0.123456789).epsilon(1e-12));
}

TEST_CASE("malformed matrices are parse errors with offsets") {
  const Matrix m{{1.0, 2.0}, {3.0, 4.0}};
  const auto bytes = io::encode_matrix(m, io::kFeatureMagic, io::MatrixFormat::binary);
  for (std::size_t cut = 4; cut < bytes.size(); ++cut) {
    CHECK_THROWS_AS(io::decode_matrix(bytes.substr(0, cut), io::kFeatureMagic), ParseError);
  }
  CHECK_THROWS_AS(io::decode_matrix(bytes + "x", io::kFeatureMagic), ParseError);

  float nan = std::nanf("");
  auto with_nan = bytes;
  std::memcpy(with_nan.data() + 12 + 4, &nan, 4);
  try {
    io::decode_matrix(with_nan, io::kFeatureMagic);
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 16);
  }
  CHECK_THROWS_AS(io::decode_matrix("1 2\n3 inf\n", io::kFeatureMagic), ParseError);
  CHECK_THROWS_AS(io::decode_matrix("1 2\n3\n", io::kFeatureMagic), ParseError);
  try {
    io::decode_matrix("1 2\n3 x\n", io::kFeatureMagic);
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 6);
  }
  // a codebook file handed to the feature loader
  const auto cb_bytes = io::encode_matrix(m, io::kCodebookMagic, io::MatrixFormat::binary);
  CHECK_THROWS_AS(io::decode_matrix(cb_bytes, io::kFeatureMagic), ParseError);
  CHECK_THROWS_AS(io::load_features(scratch("does_not_exist.vqf")), IoError);
}

TEST_CASE("segmentation files") {
  const std::vector<Segmentation> segs{
      {"u2", {{0, 3, 1}, {3, 4, 0}}, 0.0},
      {"u1", {{0, 1, 7}}, 0.0}};
  const auto text = io::format_segmentations(segs);
  CHECK(text == "u2\t0\t3\t1\nu2\t3\t4\t0\nu1\t0\t1\t7\n");
  const auto back = io::parse_segmentations(text);
  REQUIRE(back.size() == 2);
  CHECK(io::format_segmentations(back) == text);
  CHECK(back[0].segments[0].code == 1);
  CHECK_THROWS_AS(io::parse_segmentations("u\t0\t2\t1\nu\t3\t4\t1\n"), ParseError);
  CHECK_THROWS_AS(io::parse_segmentations("u\t0\tx\t1\n"), ParseError);
}

TEST_CASE("boundary files") {
  const std::vector<BoundarySet> sets{BoundarySet::make("a", {0.5, 0.12}, 1.0), BoundarySet::make("b", {}, 1.0)};
  const auto text = io::format_boundaries(sets);
  CHECK(text == "a\t0.12\na\t0.5\n");
  const auto back = io::parse_boundaries(text);
  REQUIRE(back.size() == 1);
  CHECK(back[0].times == std::vector<double>{0.12, 0.5});
  std::mt19937_64 rng(311);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::vector<double> t(50);
  for (auto& x : t) x = u(rng);
  const auto parsed = io::parse_boundaries(io::format_boundaries(std::vector<BoundarySet>{BoundarySet::make("r", t)}));
  CHECK(parsed[0].times == BoundarySet::make("r", t).times);
  CHECK_THROWS_AS(io::parse_boundaries("a\tnan\n"), ParseError);
  CHECK_THROWS_AS(io::parse_boundaries("a 0.5\n"), ParseError);
}

TEST_CASE("manifest") {
  const auto base = fs::path("/data/corpus");
  const std::string text =
      "# comment\n"
      "u1\tfeats/u1.vqf\t50\t1.5\t0.2,0.7\tlab\n"
      "u2\t/abs/u2.vqf\t100\t2\t-\n"
      "u3\tu3.vqf\t50\t0.4\n";
  const auto recs = io::parse_manifest(text, base);
  REQUIRE(recs.size() == 3);
  CHECK(recs[0].resolved == base / "feats/u1.vqf");
  CHECK(recs[0].boundaries == std::vector<double>{0.2, 0.7});
  CHECK(recs[0].label == "lab");
  CHECK(recs[1].resolved == fs::path("/abs/u2.vqf"));
  CHECK(recs[1].frame_rate_hz == 100.0);
  CHECK_FALSE(recs[1].boundaries.has_value());
  CHECK_FALSE(recs[2].boundaries.has_value());
  const auto none = io::parse_manifest("u\tu.vqf\t50\t1\t\t-\n", base);
  CHECK(none[0].boundaries == std::vector<double>{});
  const auto again = io::parse_manifest(io::format_manifest(recs), base);
  CHECK(io::format_manifest(again) == io::format_manifest(recs));
  CHECK_THROWS_AS(io::parse_manifest("u1\ta\t50\t1\nu1\tb\t50\t1\n", base), ParseError);
  CHECK_THROWS_AS(io::parse_manifest("u1\ta\tfifty\t1\n", base), ParseError);
  CHECK_THROWS_AS(io::parse_manifest("u1\ta\n", base), ParseError);
}

TEST_CASE("items and triples") {
  const std::string items = "w1\tcat\ts1\t3:2 5\nw2\t-\t-\t4\n";
  const auto recs = io::parse_items(items);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].runs.size() == 2);
  CHECK(recs[0].runs[0].code == 3);
  CHECK(recs[0].runs[0].length == 2);
  CHECK(recs[0].runs[1].length == 1);
  CHECK(recs[1].type.empty());
  CHECK(io::parse_items(io::format_items(recs))[0].runs[0].length == 2);
  CHECK_THROWS_AS(io::parse_items("w\tt\ts\t3:0\n"), ParseError);
  CHECK_THROWS_AS(io::parse_items("w\tt\ts\t\n"), ParseError);

  const auto triples = io::parse_triples("a\tb\tx\n# skip\nc\td\te\n");
  REQUIRE(triples.size() == 2);
  CHECK(triples[1].x_id == "e");
  CHECK(io::format_triples(triples) == "a\tb\tx\nc\td\te\n");
  CHECK_THROWS_AS(io::parse_triples("a\tb\n"), ParseError);
}

TEST_CASE("reports") {
  BoundaryCounts c;
  c.n_ref = 4;
  c.n_hyp = 5;
  c.n_hit = 3;
  const auto r = make_report(c);
  CHECK(io::report_tsv(r) ==
        "n_ref\tn_hyp\tn_hit\tprecision\trecall\tf_score\tos\tr_value\n"
        "4\t5\t3\t0.600000\t0.750000\t0.666667\t0.250000\t0.646447\n");
  const auto json = io::report_json(r);
  CHECK(json.find("\"n_hit\": 3") != std::string::npos);
  const auto empty = make_report(BoundaryCounts{});
  CHECK(io::report_tsv(empty).find("nan") != std::string::npos);
  CHECK(io::report_json(empty).find("\"os\": null") != std::string::npos);
}

TEST_CASE("synth config parsing") {
  const auto c = io::parse_synth_config(R"({"K": 4, "D": 2, "noise_sigma": 0, "seed": 9})");
  CHECK(c.num_codes == 4);
  CHECK(c.dim == 2);
  CHECK(c.noise_sigma == 0.0);
  CHECK(c.seed == 9);
  CHECK(c.n_utterances == SynthConfig{}.n_utterances);
  CHECK_THROWS_AS(io::parse_synth_config("{"), ParseError);
  CHECK_THROWS_AS(io::parse_synth_config(R"({"K": "many"})"), ParseError);
  CHECK_THROWS_AS(io::parse_synth_config(R"({"K": 0})"), ContractViolation);
}

TEST_CASE("format_double is shortest round trip") {
  CHECK(io::format_double(0.1) == "0.1");
  CHECK(io::format_double(2.0) == "2");
  std::mt19937_64 rng(313);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    CHECK(std::stod(io::format_double(x)) == x);
  }
}
