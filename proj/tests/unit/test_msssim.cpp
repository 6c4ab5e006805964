#include <doctest.h>

#include <cmath>
#include <random>

#include "fuseval/errors.hpp"
#include "fuseval/losses.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace fuseval;

namespace {

std::vector<float> cube_field(const VolumeMeta& m, std::array<std::int64_t, 3> lo,
                              std::array<std::int64_t, 3> hi) {
  std::vector<float> f(m.voxel_count(), 0.0f);
  for (std::int64_t z = lo[2]; z < hi[2]; ++z)
    for (std::int64_t y = lo[1]; y < hi[1]; ++y)
      for (std::int64_t x = lo[0]; x < hi[0]; ++x) f[linear_index(m, x, y, z)] = 1.0f;
  return f;
}

std::vector<double> widen(const std::vector<float>& f) {
  return std::vector<double>(f.begin(), f.end());
}

}  // namespace

TEST_CASE("identical fields score exactly 1") {
  std::mt19937_64 rng(307);
  const VolumeMeta m = fixtures::meta(12, 10, 9);
  std::vector<float> f(m.voxel_count());
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (auto& v : f) v = u(rng);
  MsSsimConfig cfg;
  CHECK(ms_ssim_index(f.data(), f.data(), m.dims, cfg) == 1.0);
}

TEST_CASE("the index is symmetric in its arguments") {
  std::mt19937_64 rng(311);
  const VolumeMeta m = fixtures::meta(10, 10, 10);
  std::vector<float> a(m.voxel_count()), b(m.voxel_count());
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (auto& v : a) v = u(rng);
  for (auto& v : b) v = u(rng);
  MsSsimConfig cfg;
  CHECK(ms_ssim_index(a.data(), b.data(), m.dims, cfg) ==
        doctest::Approx(ms_ssim_index(b.data(), a.data(), m.dims, cfg)).epsilon(1e-15));
}

TEST_CASE("a shifted cube scores below a matching cube, above a disjoint one") {
  const VolumeMeta m = fixtures::meta(16, 16, 16);
  const auto centered = cube_field(m, {4, 4, 4}, {12, 12, 12});
  const auto shifted = cube_field(m, {6, 4, 4}, {14, 12, 12});
  const auto corner = cube_field(m, {0, 0, 0}, {3, 3, 3});
  MsSsimConfig cfg;
  const double same = ms_ssim_index(centered.data(), centered.data(), m.dims, cfg);
  const double near = ms_ssim_index(centered.data(), shifted.data(), m.dims, cfg);
  const double far = ms_ssim_index(centered.data(), corner.data(), m.dims, cfg);
  CHECK(same == 1.0);
  CHECK(near < same);
  CHECK(far < near);
  CHECK(near > 0.0);
}

TEST_CASE("separable blur matches the dense-window oracle") {
  const VolumeMeta m = fixtures::meta(16, 16, 16);
  const auto centered = cube_field(m, {4, 4, 4}, {12, 12, 12});
  const auto shifted = cube_field(m, {6, 4, 4}, {14, 12, 12});
  MsSsimConfig cfg;
  cfg.scales = 2;
  const double got = ms_ssim_index(centered.data(), shifted.data(), m.dims, cfg);
  const double want = oracle::ms_ssim_dense(widen(centered), widen(shifted), m.dims, cfg);
  CHECK(got == doctest::Approx(want).epsilon(1e-6));
}

TEST_CASE("dense-oracle agreement on random fields across configs") {
  std::mt19937_64 rng(313);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (int trial = 0; trial < 4; ++trial) {
    const VolumeMeta m = fixtures::meta(9 + trial, 8 + trial, 7 + trial);
    std::vector<float> a(m.voxel_count()), b(m.voxel_count());
    for (auto& v : a) v = u(rng);
    for (auto& v : b) v = u(rng);
    MsSsimConfig cfg;
    cfg.window = trial % 2 == 0 ? 7 : 5;
    cfg.sigma = 1.0 + 0.5 * trial;
    cfg.scales = 1 + trial % 2;
    const double got = ms_ssim_index(a.data(), b.data(), m.dims, cfg);
    const double want = oracle::ms_ssim_dense(widen(a), widen(b), m.dims, cfg);
    CHECK(got == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("effective scale count follows the floor-halving pyramid") {
  MsSsimConfig cfg;  // window 7, scales 3
  CHECK(ms_ssim_effective_scales({64, 64, 64}, cfg) == 3);
  CHECK(ms_ssim_effective_scales({16, 16, 16}, cfg) == 2);
  CHECK(ms_ssim_effective_scales({8, 8, 8}, cfg) == 1);
  CHECK(ms_ssim_effective_scales({64, 64, 8}, cfg) == 1);  // limited by the smallest axis
  cfg.scales = 1;
  CHECK(ms_ssim_effective_scales({64, 64, 64}, cfg) == 1);
  CHECK_THROWS_AS(ms_ssim_effective_scales({6, 64, 64}, MsSsimConfig{}), ConfigError);
}

TEST_CASE("config validation rejects bad windows, sigma and scales") {
  MsSsimConfig cfg;
  cfg.window = 4;
  CHECK_THROWS_AS(ms_ssim_effective_scales({16, 16, 16}, cfg), ConfigError);
  cfg = MsSsimConfig{};
  cfg.window = 1;
  CHECK_THROWS_AS(ms_ssim_effective_scales({16, 16, 16}, cfg), ConfigError);
  cfg = MsSsimConfig{};
  cfg.sigma = 0.0;
  CHECK_THROWS_AS(ms_ssim_effective_scales({16, 16, 16}, cfg), ConfigError);
  cfg = MsSsimConfig{};
  cfg.scales = 0;
  CHECK_THROWS_AS(ms_ssim_effective_scales({16, 16, 16}, cfg), ConfigError);
}

TEST_CASE("constant fields compare as identical regardless of level") {
  // Border renormalization keeps constants constant, so two equal constants
  // give l = cs = 1 everywhere.
  const VolumeMeta m = fixtures::meta(8, 8, 8);
  std::vector<float> half(m.voxel_count(), 0.5f);
  MsSsimConfig cfg;
  CHECK(ms_ssim_index(half.data(), half.data(), m.dims, cfg) == 1.0);
}

TEST_CASE("axis permutation of both fields leaves the index unchanged on cubes") {
  const VolumeMeta m = fixtures::meta(12, 12, 12);
  const auto a = cube_field(m, {2, 2, 2}, {7, 7, 7});
  const auto b = cube_field(m, {4, 2, 2}, {9, 7, 7});  // shifted along x
  // Transpose x<->y of both fields: the pair is geometrically identical.
  std::vector<float> at(a.size()), bt(b.size());
  for (std::int64_t z = 0; z < 12; ++z)
    for (std::int64_t y = 0; y < 12; ++y)
      for (std::int64_t x = 0; x < 12; ++x) {
        at[linear_index(m, y, x, z)] = a[linear_index(m, x, y, z)];
        bt[linear_index(m, y, x, z)] = b[linear_index(m, x, y, z)];
      }
  MsSsimConfig cfg;
  cfg.scales = 2;
  const double plain = ms_ssim_index(a.data(), b.data(), m.dims, cfg);
  const double swapped = ms_ssim_index(at.data(), bt.data(), m.dims, cfg);
  CHECK(plain == doctest::Approx(swapped).epsilon(1e-12));
}
