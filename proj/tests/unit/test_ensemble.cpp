#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fuseval/ensemble.hpp"
#include "fuseval/errors.hpp"
#include "support/fixtures.hpp"

using namespace fuseval;

TEST_CASE("fusing copies of one member reproduces it") {
  std::mt19937_64 rng(101);
  const auto meta = fixtures::meta(8, 8, 8);
  const ProbVolume member = fixtures::random_probs(meta, 4, rng);
  for (int m : {1, 3, 11}) {
    const std::vector<ProbVolume> members(static_cast<std::size_t>(m), member);
    const ProbVolume fused = fuse(members);
    REQUIRE(fused.probs.size() == member.probs.size());
    for (std::size_t i = 0; i < fused.probs.size(); ++i) {
      CHECK(std::abs(double(fused.probs[i]) - double(member.probs[i])) <= 1e-12);
    }
  }
}

TEST_CASE("fused channels sum to one on random members") {
  std::mt19937_64 rng(103);
  const auto meta = fixtures::meta(6, 6, 6);
  std::vector<ProbVolume> members;
  for (int m = 0; m < 5; ++m) members.push_back(fixtures::random_probs(meta, 4, rng));
  const ProbVolume fused = fuse(members);
  const std::size_t nvox = meta.voxel_count();
  for (std::size_t i = 0; i < nvox; ++i) {
    double sum = 0.0;
    for (int c = 0; c < 4; ++c) sum += fused.channel(c)[i];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("fuse is the per-voxel arithmetic mean") {
  const auto meta = fixtures::meta(1, 1, 1);
  ProbVolume a{meta, 2, {0.2f, 0.8f}};
  ProbVolume b{meta, 2, {0.6f, 0.4f}};
  const ProbVolume fused = fuse(std::vector<ProbVolume>{a, b});
  CHECK(fused.probs[0] == doctest::Approx(0.4).epsilon(1e-7));
  CHECK(fused.probs[1] == doctest::Approx(0.6).epsilon(1e-7));
}

TEST_CASE("fuse does not depend on member order") {
  std::mt19937_64 rng(107);
  const auto meta = fixtures::meta(5, 4, 3);
  std::vector<ProbVolume> members;
  for (int m = 0; m < 6; ++m) members.push_back(fixtures::random_probs(meta, 3, rng));
  const ProbVolume forward = fuse(members);
  std::vector<ProbVolume> shuffled = members;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const ProbVolume permuted = fuse(shuffled);
  for (std::size_t i = 0; i < forward.probs.size(); ++i) {
    CHECK(std::abs(double(forward.probs[i]) - double(permuted.probs[i])) <= 1e-6);
  }
}

TEST_CASE("the streaming accumulator matches the one-shot fuse") {
  std::mt19937_64 rng(109);
  const auto meta = fixtures::meta(4, 4, 4);
  std::vector<ProbVolume> members;
  EnsembleAccumulator acc;
  for (int m = 0; m < 7; ++m) {
    members.push_back(fixtures::random_probs(meta, 4, rng));
    acc.add(members.back());
  }
  CHECK(acc.member_count() == 7);
  CHECK(acc.fuse().probs == fuse(members).probs);
}

TEST_CASE("fuse rejects mismatched members and empty input") {
  std::mt19937_64 rng(113);
  const ProbVolume a = fixtures::random_probs(fixtures::meta(4, 4, 4), 4, rng);
  const ProbVolume b = fixtures::random_probs(fixtures::meta(4, 4, 5), 4, rng);
  const ProbVolume c = fixtures::random_probs(fixtures::meta(4, 4, 4), 3, rng);
  ProbVolume d = a;
  d.meta.spacing[0] = 2.0;

  CHECK_THROWS_AS(fuse(std::vector<ProbVolume>{a, b}), ShapeError);
  CHECK_THROWS_AS(fuse(std::vector<ProbVolume>{a, c}), ShapeError);
  CHECK_THROWS_AS(fuse(std::vector<ProbVolume>{a, d}), ShapeError);
  CHECK_THROWS_AS(EnsembleAccumulator{}.fuse(), PreconditionError);
}

TEST_CASE("fuse_to_labels is argmax of the fused probabilities") {
  std::mt19937_64 rng(127);
  const auto meta = fixtures::meta(6, 6, 6);
  std::vector<ProbVolume> members;
  for (int m = 0; m < 3; ++m) members.push_back(fixtures::random_probs(meta, 4, rng));
  const LabelVolume direct = fuse_to_labels(members);
  const LabelVolume composed = argmax_labels(fuse(members));
  CHECK(direct.voxels == composed.voxels);
  CHECK(direct.num_classes == 4);
}

TEST_CASE("majority agreement wins the fused argmax") {
  // Two members vote class 1, one votes class 2 with no higher confidence.
  const auto meta = fixtures::meta(1, 1, 1);
  ProbVolume v1{meta, 3, {0.1f, 0.8f, 0.1f}};
  ProbVolume v2{meta, 3, {0.2f, 0.6f, 0.2f}};
  ProbVolume v3{meta, 3, {0.1f, 0.2f, 0.7f}};
  const LabelVolume out = fuse_to_labels(std::vector<ProbVolume>{v1, v2, v3});
  CHECK(out.voxels[0] == 1);
}
