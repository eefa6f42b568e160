#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "test_util.hpp"
#include "vqseg/core.hpp"

using namespace vqseg;
using testutil::column;

TEST_CASE("nearest_code examples") {
  const Codebook cb = testutil::codebook(column({0.0, 1.0}));
  const std::vector<double> z0{0.0}, z_half{0.5}, z4{0.4};
  CHECK(nearest_code(z0, cb) == CodeDistance{0, 0.0});
  CHECK(nearest_code(z_half, cb) == CodeDistance{0, 0.25});
  const auto r = nearest_code(z4, cb);
  CHECK(r.code == 0);
  CHECK(r.distance == doctest::Approx(0.16).epsilon(1e-15));
}

TEST_CASE("nearest_code rejects dimension mismatch naming both dimensions") {
  const Codebook cb = testutil::codebook({{0.0, 0.0}, {1.0, 1.0}});
  const std::vector<double> z{0.0, 1.0, 2.0};
  try {
    nearest_code(z, cb);
    FAIL("expected a contract violation");
  } catch (const ContractViolation& e) {
    const std::string msg = e.what();
    CHECK(msg.find("D = 3") != std::string::npos);
    CHECK(msg.find("D = 2") != std::string::npos);
  }
}

TEST_CASE("nearest_code is permutation covariant") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto codes = oracle::random_rows(rng, 6, 3);
    const auto z = oracle::random_rows(rng, 1, 3)[0];
    std::vector<std::size_t> perm(codes.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    oracle::Rows permuted(codes.size());
    for (std::size_t i = 0; i < perm.size(); ++i) permuted[i] = codes[perm[i]];
    const auto a = nearest_code(z, testutil::codebook(codes));
    const auto b = nearest_code(z, testutil::codebook(permuted));
    CHECK(perm[b.code] == a.code);
    CHECK(a.distance == b.distance);
  }
}

TEST_CASE("quantize_sequence") {
  const Codebook cb = testutil::codebook(column({0.0, 1.0}));
  const auto fs = testutil::features(column({0.0, 0.1, 0.9}));
  CHECK(quantize_sequence(fs, cb) == std::vector<CodeIndex>{0, 0, 1});

  std::mt19937_64 rng(11);
  const auto single = testutil::codebook(oracle::random_rows(rng, 1, 4));
  const auto frames = testutil::features(oracle::random_rows(rng, 12, 4));
  const auto codes = quantize_sequence(frames, single);
  CHECK(std::all_of(codes.begin(), codes.end(), [](CodeIndex c) { return c == 0; }));
}

TEST_CASE("quantize_sequence matches exhaustive per-frame scan") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto frames = oracle::random_rows(rng, 20, 4);
    const auto codes = oracle::random_rows(rng, 5, 4);
    const auto got = quantize_sequence(testutil::features(frames), testutil::codebook(codes));
    const DistanceTable table(testutil::features(frames), testutil::codebook(codes));
    for (std::size_t t = 0; t < frames.size(); ++t) {
      CHECK(got[t] == oracle::nearest(frames[t], codes));
      // Also the argmin of the distance-table row.
      const auto row = table.distance_row(t);
      CHECK(got[t] == static_cast<CodeIndex>(std::min_element(row.begin(), row.end()) - row.begin()));
    }
  }
}

TEST_CASE("distance_table examples") {
  SUBCASE("features equal to codebook rows give a zero diagonal") {
    std::mt19937_64 rng(5);
    const auto rows = oracle::random_rows(rng, 4, 3);
    const DistanceTable table(testutil::features(rows), testutil::codebook(rows));
    for (std::size_t k = 0; k < rows.size(); ++k) CHECK(table.distance(k, k) == 0.0);
  }
  SUBCASE("arithmetic") {
    const DistanceTable table(testutil::features(column({0.0, 1.0})), testutil::codebook(column({0.0})));
    CHECK(table.distance(0, 0) == 0.0);
    CHECK(table.distance(1, 0) == 1.0);
    CHECK(table.prefix(0, 0) == 0.0);
    CHECK(table.prefix(1, 0) == 0.0);
    CHECK(table.prefix(2, 0) == 1.0);
  }
}

TEST_CASE("distance_table prefix sums agree with direct summation") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = testutil::random_instance(rng, 15, 4, 5);
    const DistanceTable table(testutil::features(inst.frames), testutil::codebook(inst.codes));
    const std::size_t T = inst.frames.size();
    for (std::size_t k = 0; k < inst.codes.size(); ++k) {
      double total = 0;
      for (std::size_t t = 0; t < T; ++t) {
        CHECK(table.distance(t, k) >= 0.0);
        CHECK(table.prefix(t + 1, k) >= table.prefix(t, k));
        total += oracle::sqdist(inst.frames[t], inst.codes[k]);
      }
      CHECK(table.prefix(T, k) == doctest::Approx(total).epsilon(1e-12));
      for (std::size_t a = 0; a < T; ++a) {
        for (std::size_t b = a + 1; b <= T; ++b) {
          double direct = 0;
          for (std::size_t t = a; t < b; ++t) direct += table.distance(t, k);
          CHECK(table.prefix(b, k) - table.prefix(a, k) == doctest::Approx(direct).epsilon(1e-9));
        }
      }
    }
  }
}

TEST_CASE("segment_cost") {
  SUBCASE("single frame equals nearest_code") {
    std::mt19937_64 rng(23);
    const auto inst = testutil::random_instance(rng, 10, 3, 5);
    const auto cb = testutil::codebook(inst.codes);
    const DistanceTable table(testutil::features(inst.frames), cb);
    for (std::size_t t = 0; t < inst.frames.size(); ++t) {
      const auto seg = segment_cost(table, t, t + 1);
      const auto nn = nearest_code(inst.frames[t], cb);
      CHECK(seg.code == nn.code);
      CHECK(seg.distance == nn.distance);
    }
  }
  SUBCASE("symmetric tie goes to the lowest code") {
    const DistanceTable table(testutil::features(column({0.0, 1.0})), testutil::codebook(column({0.0, 1.0})));
    CHECK(segment_cost(table, 0, 2) == CodeDistance{0, 1.0});
  }
  SUBCASE("rejects bad ranges") {
    const DistanceTable table(testutil::features(column({0.0, 1.0})), testutil::codebook(column({0.0})));
    CHECK_THROWS_AS(segment_cost(table, 1, 1), ContractViolation);
    CHECK_THROWS_AS(segment_cost(table, 2, 1), ContractViolation);
    CHECK_THROWS_AS(segment_cost(table, 0, 3), ContractViolation);
  }
}

TEST_CASE("segment_cost matches the nested-loop oracle on every span") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 30; ++trial) {
    const auto inst = testutil::random_instance(rng, 10, 4, 5);
    const DistanceTable table(testutil::features(inst.frames), testutil::codebook(inst.codes));
    for (std::size_t a = 0; a < inst.frames.size(); ++a) {
      for (std::size_t b = a + 1; b <= inst.frames.size(); ++b) {
        const auto [k, cost] = oracle::segment_cost(inst.frames, inst.codes, a, b);
        const auto got = segment_cost(table, a, b);
        CHECK(got.code == k);
        CHECK(got.distance == doctest::Approx(cost).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("domain type invariants") {
  CHECK_THROWS_AS(FeatureSequence("u", 50.0, Matrix(0, 3)), ContractViolation);
  CHECK_THROWS_AS(FeatureSequence("u", 0.0, Matrix(2, 3)), ContractViolation);
  CHECK_THROWS_AS(FeatureSequence("u", 50.0, Matrix({{1.0, std::nan("")}})), ContractViolation);
  CHECK_THROWS_AS(Codebook(Matrix(0, 2)), ContractViolation);
  CHECK_THROWS_AS(Codebook(Matrix({{std::numeric_limits<double>::infinity()}})), ContractViolation);

  Segmentation seg{"u", {{0, 2, 0}, {2, 5, 1}}, 0.0};
  CHECK_NOTHROW(seg.validate(5, 2));
  CHECK_THROWS_AS(seg.validate(6, 2), ContractViolation);
  CHECK_THROWS_AS(seg.validate(5, 1), ContractViolation);
  Segmentation gap{"u", {{0, 2, 0}, {3, 5, 1}}, 0.0};
  CHECK_THROWS_AS(gap.validate(5, 2), ContractViolation);
  Segmentation empty_seg{"u", {{0, 0, 0}, {0, 5, 1}}, 0.0};
  CHECK_THROWS_AS(empty_seg.validate(5, 2), ContractViolation);
}

TEST_CASE("segmentation_from_codes") {
  const std::vector<CodeIndex> codes{3, 3, 1, 1, 1, 3};
  const auto runs = segmentation_from_codes("u", codes, true);
  CHECK(runs.segments == std::vector<Segment>{{0, 2, 3}, {2, 5, 1}, {5, 6, 3}});
  CHECK(runs.frame_codes() == codes);
  const auto frames = segmentation_from_codes("u", codes, false);
  CHECK(frames.num_segments() == codes.size());
  CHECK(frames.codes() == codes);
}
