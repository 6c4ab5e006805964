#include <doctest.h>

#include <random>

#include "fuseval/components.hpp"
#include "fuseval/errors.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace fuseval;

TEST_CASE("connectivity name round trip") {
  CHECK(connectivity_from_string("face6") == Connectivity::Face6);
  CHECK(connectivity_from_string("edge18") == Connectivity::Edge18);
  CHECK(connectivity_from_string("vertex26") == Connectivity::Vertex26);
  CHECK(to_string(Connectivity::Face6) == std::string("face6"));
  CHECK(to_string(Connectivity::Edge18) == std::string("edge18"));
  CHECK(to_string(Connectivity::Vertex26) == std::string("vertex26"));
  CHECK_THROWS_AS(connectivity_from_string("city-block"), ConfigError);
}

TEST_CASE("neighbor offset counts") {
  CHECK(neighbor_offsets(Connectivity::Face6).size() == 6);
  CHECK(neighbor_offsets(Connectivity::Edge18).size() == 18);
  CHECK(neighbor_offsets(Connectivity::Vertex26).size() == 26);
}

TEST_CASE("diagonal pairs split or join per connectivity") {
  const VolumeMeta m = fixtures::meta(3, 3, 3);

  // In-plane diagonal: shares an edge.
  Mask planar = fixtures::empty_mask(m);
  fixtures::set(planar, 0, 0, 0);
  fixtures::set(planar, 1, 1, 0);
  CHECK(connected_components(planar, Connectivity::Face6).count == 2);
  CHECK(connected_components(planar, Connectivity::Edge18).count == 1);
  CHECK(connected_components(planar, Connectivity::Vertex26).count == 1);

  // Space diagonal: shares only a vertex.
  Mask corner = fixtures::empty_mask(m);
  fixtures::set(corner, 0, 0, 0);
  fixtures::set(corner, 1, 1, 1);
  CHECK(connected_components(corner, Connectivity::Face6).count == 2);
  CHECK(connected_components(corner, Connectivity::Edge18).count == 2);
  CHECK(connected_components(corner, Connectivity::Vertex26).count == 1);
}

TEST_CASE("component ids follow first-encounter scan order") {
  const VolumeMeta m = fixtures::meta(5, 3, 1);
  Mask mask = fixtures::empty_mask(m);
  fixtures::set(mask, 4, 0, 0);  // encountered first (y=0 row)
  fixtures::set(mask, 0, 1, 0);  // second
  fixtures::set(mask, 2, 2, 0);  // third
  const ComponentMap cm = connected_components(mask, Connectivity::Face6);
  REQUIRE(cm.count == 3);
  CHECK(cm.ids[linear_index(m, 4, 0, 0)] == 1);
  CHECK(cm.ids[linear_index(m, 0, 1, 0)] == 2);
  CHECK(cm.ids[linear_index(m, 2, 2, 0)] == 3);
}

TEST_CASE("component sizes report voxel counts and physical volume") {
  const VolumeMeta m = fixtures::meta(8, 8, 8, 0.5, 1.0, 2.0);
  Mask mask = fixtures::empty_mask(m);
  fixtures::fill_box(mask, {0, 0, 0}, {2, 2, 2});  // 8 voxels
  fixtures::fill_box(mask, {5, 5, 5}, {8, 8, 8});  // 27 voxels
  const ComponentMap cm = connected_components(mask, Connectivity::Vertex26);
  const auto sizes = component_sizes(cm);
  REQUIRE(sizes.size() == 2);
  CHECK(sizes[0].id == 1);
  CHECK(sizes[0].voxel_count == 8);
  CHECK(sizes[0].volume_mm3 == doctest::Approx(8 * 1.0).epsilon(1e-12));
  CHECK(sizes[1].voxel_count == 27);
  CHECK(sizes[1].volume_mm3 == doctest::Approx(27 * 1.0).epsilon(1e-12));
}

TEST_CASE("component masks partition the input mask") {
  std::mt19937_64 rng(17);
  const auto meta = fixtures::meta(6, 5, 4);
  const Mask mask = fixtures::random_mask(meta, rng, 0.4);
  const ComponentMap cm = connected_components(mask, Connectivity::Face6);
  Mask rebuilt = fixtures::empty_mask(meta);
  for (std::int32_t id = 1; id <= cm.count; ++id) {
    const Mask part = component_mask(cm, id);
    for (std::size_t i = 0; i < part.v.size(); ++i) {
      if (part.v[i]) {
        CHECK(rebuilt.v[i] == 0);  // parts are disjoint
        rebuilt.v[i] = 1;
      }
    }
  }
  CHECK(rebuilt.v == mask.v);
}

TEST_CASE("labeling agrees with the BFS oracle on random masks") {
  std::mt19937_64 rng(23);
  const Connectivity conns[] = {Connectivity::Face6, Connectivity::Edge18,
                                Connectivity::Vertex26};
  std::uniform_int_distribution<int> dim(3, 6);
  std::uniform_real_distribution<double> fill(0.1, 0.9);
  for (int trial = 0; trial < 300; ++trial) {
    const auto meta = fixtures::meta(dim(rng), dim(rng), dim(rng));
    const Mask mask = fixtures::random_mask(meta, rng, fill(rng));
    for (Connectivity conn : conns) {
      const ComponentMap got = connected_components(mask, conn);
      const oracle::Labeling want = oracle::bfs_components(mask, conn);
      REQUIRE(got.count == want.count);
      REQUIRE(got.ids == want.ids);
    }
  }
}

TEST_CASE("dilate point growth per connectivity") {
  const VolumeMeta m = fixtures::meta(7, 7, 7);
  Mask point = fixtures::empty_mask(m);
  fixtures::set(point, 3, 3, 3);
  CHECK(dilate(point, 1, Connectivity::Face6).count_set() == 7);
  CHECK(dilate(point, 1, Connectivity::Edge18).count_set() == 19);
  CHECK(dilate(point, 1, Connectivity::Vertex26).count_set() == 27);
  CHECK(dilate(point, 3, Connectivity::Vertex26).count_set() == 343);  // full 7x7x7
  CHECK(dilate(point, 0, Connectivity::Face6).v == point.v);
}

TEST_CASE("iterated dilation equals composed single steps") {
  std::mt19937_64 rng(29);
  const auto meta = fixtures::meta(8, 7, 6);
  for (int trial = 0; trial < 10; ++trial) {
    const Mask mask = fixtures::random_mask(meta, rng, 0.15);
    for (Connectivity conn :
         {Connectivity::Face6, Connectivity::Edge18, Connectivity::Vertex26}) {
      CHECK(dilate(mask, 2, conn).v == dilate(dilate(mask, 1, conn), 1, conn).v);
    }
  }
}

TEST_CASE("erosion is dual to dilation away from the volume border") {
  std::mt19937_64 rng(31);
  const auto meta = fixtures::meta(8, 8, 8);
  for (int trial = 0; trial < 20; ++trial) {
    Mask mask = fixtures::random_mask(meta, rng, 0.6);
    fixtures::clear_border(mask);
    for (Connectivity conn :
         {Connectivity::Face6, Connectivity::Edge18, Connectivity::Vertex26}) {
      const Mask eroded = erode(mask, 1, conn);
      const Mask dual = fixtures::complement(dilate(fixtures::complement(mask), 1, conn));
      CHECK(eroded.v == dual.v);
    }
  }
}

TEST_CASE("erosion shrinks boxes and erodes at the volume border") {
  const VolumeMeta m = fixtures::meta(5, 5, 5);
  Mask box = fixtures::empty_mask(m);
  fixtures::fill_box(box, {1, 1, 1}, {4, 4, 4});  // 3x3x3
  const Mask eroded = erode(box, 1, Connectivity::Face6);
  CHECK(eroded.count_set() == 1);
  CHECK(eroded.get(2, 2, 2));

  // A mask touching the border loses its border voxels too.
  const Mask full = fixtures::full_mask(m);
  const Mask shrunk = erode(full, 1, Connectivity::Face6);
  CHECK(shrunk.count_set() == 27);
  CHECK(erode(full, 0, Connectivity::Face6).v == full.v);
}

TEST_CASE("morph_reconstruct keeps exactly the marked components") {
  const VolumeMeta m = fixtures::meta(9, 3, 3);
  Mask limit = fixtures::empty_mask(m);
  fixtures::fill_box(limit, {0, 0, 0}, {2, 2, 2});
  fixtures::fill_box(limit, {4, 0, 0}, {6, 2, 2});
  fixtures::fill_box(limit, {8, 0, 0}, {9, 3, 3});
  Mask marker = fixtures::empty_mask(m);
  fixtures::set(marker, 4, 1, 1);  // inside the middle component only

  const Mask out = morph_reconstruct(marker, limit, Connectivity::Face6);
  Mask expected = fixtures::empty_mask(m);
  fixtures::fill_box(expected, {4, 0, 0}, {6, 2, 2});
  CHECK(out.v == expected.v);
}

TEST_CASE("morph_reconstruct demands marker inside limit") {
  const VolumeMeta m = fixtures::meta(4, 4, 4);
  Mask limit = fixtures::empty_mask(m);
  fixtures::fill_box(limit, {0, 0, 0}, {2, 2, 2});
  Mask marker = fixtures::empty_mask(m);
  fixtures::set(marker, 3, 3, 3);
  CHECK_THROWS_AS(morph_reconstruct(marker, limit, Connectivity::Face6), PreconditionError);
}

TEST_CASE("morph_reconstruct is idempotent and bounded by the limit") {
  std::mt19937_64 rng(37);
  const auto meta = fixtures::meta(7, 7, 7);
  for (int trial = 0; trial < 20; ++trial) {
    const Mask limit = fixtures::random_mask(meta, rng, 0.5);
    Mask marker = limit;
    std::bernoulli_distribution thin(0.3);
    for (auto& v : marker.v) {
      if (v && !thin(rng)) v = 0;
    }
    const Mask out = morph_reconstruct(marker, limit, Connectivity::Vertex26);
    for (std::size_t i = 0; i < out.v.size(); ++i) {
      if (marker.v[i]) CHECK(out.v[i]);  // extensive on the marker
      if (out.v[i]) CHECK(limit.v[i]);   // bounded by the limit
    }
    CHECK(morph_reconstruct(out, limit, Connectivity::Vertex26).v == out.v);

    // Equivalent formulation: union of limit components touched by the marker.
    const ComponentMap cm = connected_components(limit, Connectivity::Vertex26);
    std::vector<bool> touched(static_cast<std::size_t>(cm.count) + 1, false);
    for (std::size_t i = 0; i < marker.v.size(); ++i) {
      if (marker.v[i]) touched[static_cast<std::size_t>(cm.ids[i])] = true;
    }
    for (std::size_t i = 0; i < out.v.size(); ++i) {
      const bool want = cm.ids[i] != 0 && touched[static_cast<std::size_t>(cm.ids[i])];
      CHECK(out.v[i] == (want ? 1 : 0));
    }
  }
}
