#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_util.hpp"
#include "vqseg/dpseg.hpp"
#include "vqseg/greedyseg.hpp"

using namespace vqseg;
using testutil::column;

TEST_CASE("greedy with N = T is the frame-wise quantization") {
  std::mt19937_64 rng(61);
  const auto frames = oracle::random_rows(rng, 9, 3);
  const auto codes = oracle::random_rows(rng, 4, 3);
  const auto fs = testutil::features(frames);
  const auto cb = testutil::codebook(codes);
  const auto result = greedy_merge(DistanceTable(fs, cb), frames.size());
  CHECK(result.merge_deltas.empty());
  CHECK(result.segmentation.frame_codes() == quantize_sequence(fs, cb));
  CHECK(result.segmentation.num_segments() == frames.size());
}

TEST_CASE("greedy four-frame worked instance") {
  // Singleton costs 0, 0.01, 0.01, 0. Pair deltas: (0,1) 0, (1,2) 0.80,
  // (2,3) 0. The leftmost zero-delta pair merges first, then (2,3).
  const DistanceTable table(testutil::features(column({0.0, 0.1, 0.9, 1.0})),
                            testutil::codebook(column({0.0, 1.0})));
  const auto result = greedy_merge(table, 2);
  CHECK(result.segmentation.segments == std::vector<Segment>{{0, 2, 0}, {2, 4, 1}});
  CHECK(result.segmentation.total_cost == doctest::Approx(0.02).epsilon(1e-12));
  REQUIRE(result.merge_deltas.size() == 2);
  CHECK(result.merge_deltas[0] == doctest::Approx(0.0));
  CHECK(result.merge_deltas[1] == doctest::Approx(0.0));

  const auto one = greedy_merge(table, 1);
  CHECK(one.segmentation.segments == std::vector<Segment>{{0, 4, 0}});
  CHECK(one.merge_deltas.back() == doctest::Approx(1.80));
}

TEST_CASE("greedy never beats the exact constrained optimum") {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = testutil::random_instance(rng);
    const DistanceTable table(testutil::features(inst.frames), testutil::codebook(inst.codes));
    const std::size_t T = inst.frames.size();
    for (std::size_t n = 1; n <= T; ++n) {
      const auto result = greedy_merge(table, n);
      const auto& seg = result.segmentation;
      CHECK(seg.num_segments() == n);
      seg.validate(T, inst.codes.size());
      CHECK(seg.total_cost == doctest::Approx(segmentation_sse(table, seg)).epsilon(1e-9));
      CHECK(seg.total_cost >= dp_constrained(table, n).total_cost - 1e-9);

      // Deltas are non-negative and add up to the SSE growth.
      double sse = 0;
      for (std::size_t t = 0; t < T; ++t) sse += table.segment_cost(t, t + 1).distance;
      for (double d : result.merge_deltas) {
        CHECK(d >= 0.0);
        sse += d;
      }
      CHECK(sse == doctest::Approx(seg.total_cost).epsilon(1e-9));
    }
  }
}

TEST_CASE("greedy is deterministic and prefers the leftmost pair on ties") {
  const DistanceTable table(testutil::features(column({0.0, 0.0, 0.0, 0.0})),
                            testutil::codebook(column({0.0})));
  const auto seg = greedy_n_segment(table, 2);
  CHECK(seg.segments == std::vector<Segment>{{0, 3, 0}, {3, 4, 0}});

  std::mt19937_64 rng(71);
  const auto inst = testutil::random_instance(rng, 30, 3, 6);
  const DistanceTable random_table(testutil::features(inst.frames), testutil::codebook(inst.codes));
  const std::size_t n = std::max<std::size_t>(1, inst.frames.size() / 3);
  CHECK(greedy_n_segment(random_table, n).segments == greedy_n_segment(random_table, n).segments);
}

TEST_CASE("greedy rejects out-of-range N") {
  const DistanceTable table(testutil::features(column({0.0, 1.0})), testutil::codebook(column({0.0})));
  CHECK_THROWS_AS(greedy_n_segment(table, 0), ContractViolation);
  CHECK_THROWS_AS(greedy_n_segment(table, 3), ContractViolation);
}

TEST_CASE("n_from_frames_per_segment") {
  CHECK(n_from_frames_per_segment(9, 3.0) == 3);
  CHECK(n_from_frames_per_segment(2, 3.0) == 1);
  CHECK(n_from_frames_per_segment(10, 3.0) == 3);
  CHECK(n_from_frames_per_segment(11, 2.0) == 6);
  CHECK(n_from_frames_per_segment(5, 1.0) == 5);
  CHECK_THROWS_AS(n_from_frames_per_segment(5, 0.5), ContractViolation);
}
