#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "fuseval/errors.hpp"
#include "fuseval/nifti.hpp"
#include "support/fixtures.hpp"

using namespace fuseval;

namespace {

LabelVolume sample_labels(std::mt19937_64& rng, const VolumeMeta& m, int num_classes) {
  auto l = fixtures::random_labels(m, num_classes, rng);
  l.meta = m;
  return l;
}

}  // namespace

TEST_CASE("label volume round trips bit-exact, plain and gzip") {
  fixtures::TempDir tmp("nifti-labels");
  std::mt19937_64 rng(41);
  VolumeMeta m = fixtures::meta(7, 5, 3, 0.5, 1.0, 2.5);
  m.case_id = "trip01";
  const LabelVolume in = sample_labels(rng, m, 4);

  for (const char* name : {"vol.nii", "vol.nii.gz"}) {
    const std::string path = tmp.file(name);
    write_nifti(in, path);
    const LabelVolume out = read_labels(path);
    CHECK(out.voxels == in.voxels);
    CHECK(out.meta.dims == in.meta.dims);
    CHECK(out.meta.spacing == in.meta.spacing);
    CHECK(out.meta.case_id == "trip01");
  }
}

TEST_CASE("probability volume round trips bit-exact") {
  fixtures::TempDir tmp("nifti-probs");
  std::mt19937_64 rng(43);
  VolumeMeta m = fixtures::meta(4, 6, 5, 1.0, 1.0, 1.0);
  m.case_id = "probs01";
  ProbVolume in = fixtures::random_probs(m, 4, rng);
  in.meta = m;

  for (const char* name : {"p.nii", "p.nii.gz"}) {
    const std::string path = tmp.file(name);
    write_nifti(in, path);
    const ProbVolume out = read_probs(path);
    CHECK(out.channels == 4);
    CHECK(out.probs == in.probs);
    CHECK(out.meta.dims == in.meta.dims);
    CHECK(out.meta.spacing == in.meta.spacing);
    CHECK(out.meta.case_id == "probs01");
  }
}

TEST_CASE("gzip detection uses the magic bytes, not the extension") {
  fixtures::TempDir tmp("nifti-magic");
  std::mt19937_64 rng(47);
  VolumeMeta m = fixtures::meta(3, 3, 3);
  m.case_id = "magic";
  const LabelVolume in = sample_labels(rng, m, 4);

  // Compressed bytes behind a .nii name still parse.
  write_nifti(in, tmp.file("a.nii.gz"));
  std::filesystem::copy_file(tmp.file("a.nii.gz"), tmp.file("b.nii"));
  CHECK(read_labels(tmp.file("b.nii")).voxels == in.voxels);

  // And plain bytes behind a .gz name.
  write_nifti(in, tmp.file("c.nii"));
  std::filesystem::copy_file(tmp.file("c.nii"), tmp.file("d.nii.gz"));
  CHECK(read_labels(tmp.file("d.nii.gz")).voxels == in.voxels);
}

TEST_CASE("empty descrip falls back to the filename stem") {
  fixtures::TempDir tmp("nifti-stem");
  std::mt19937_64 rng(53);
  const LabelVolume in = sample_labels(rng, fixtures::meta(3, 3, 3), 4);  // no case_id
  write_nifti(in, tmp.file("sub-007.nii.gz"));
  CHECK(read_labels(tmp.file("sub-007.nii.gz")).meta.case_id == "sub-007");
}

TEST_CASE("case_id_from_path strips directories and both extensions") {
  CHECK(case_id_from_path("/data/out/case001.nii.gz") == "case001");
  CHECK(case_id_from_path("case002.nii") == "case002");
  CHECK(case_id_from_path("dir/sub.dir/case003.nii.gz") == "case003");
}

TEST_CASE("reader failure modes") {
  fixtures::TempDir tmp("nifti-bad");
  CHECK_THROWS_AS(read_nifti(tmp.file("missing.nii")), IoError);

  {
    std::ofstream f(tmp.file("short.nii"), std::ios::binary);
    f << "tiny";
  }
  CHECK_THROWS_AS(read_nifti(tmp.file("short.nii")), FormatError);

  {
    std::ofstream f(tmp.file("junk.nii"), std::ios::binary);
    std::vector<char> zeros(400, 0);
    f.write(zeros.data(), static_cast<std::streamsize>(zeros.size()));
  }
  CHECK_THROWS_AS(read_nifti(tmp.file("junk.nii")), FormatError);
}

TEST_CASE("unsupported datatype is rejected explicitly") {
  fixtures::TempDir tmp("nifti-dtype");
  std::mt19937_64 rng(59);
  const LabelVolume in = sample_labels(rng, fixtures::meta(3, 3, 3), 4);
  const std::string path = tmp.file("int16.nii");
  write_nifti(in, path);
  {
    // Patch datatype (offset 70) to int16 (code 4) and bitpix (offset 72) to 16.
    std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
    const std::int16_t dtype = 4, bitpix = 16;
    f.seekp(70);
    f.write(reinterpret_cast<const char*>(&dtype), 2);
    f.write(reinterpret_cast<const char*>(&bitpix), 2);
  }
  CHECK_THROWS_AS(read_nifti(path), UnsupportedError);
}

TEST_CASE("wrong payload kind raises UnsupportedError") {
  fixtures::TempDir tmp("nifti-kind");
  std::mt19937_64 rng(61);
  const VolumeMeta m = fixtures::meta(3, 3, 3);
  write_nifti(sample_labels(rng, m, 4), tmp.file("l.nii"));
  ProbVolume p = fixtures::random_probs(m, 4, rng);
  write_nifti(p, tmp.file("p.nii"));
  CHECK_THROWS_AS(read_probs(tmp.file("l.nii")), UnsupportedError);
  CHECK_THROWS_AS(read_labels(tmp.file("p.nii")), UnsupportedError);
}

TEST_CASE("out-of-range float payloads are rejected") {
  fixtures::TempDir tmp("nifti-range");
  std::mt19937_64 rng(67);
  const VolumeMeta m = fixtures::meta(2, 2, 2);
  ProbVolume p = fixtures::random_probs(m, 2, rng);
  p.probs[3] = 1.0f;  // stays valid for the write
  write_nifti(p, tmp.file("ok.nii"));
  CHECK_NOTHROW(read_probs(tmp.file("ok.nii")));

  // Patch one float beyond 1 after writing; the reader must catch it.
  {
    std::fstream f(tmp.file("ok.nii"), std::ios::binary | std::ios::in | std::ios::out);
    const float bad = 2.5f;
    f.seekp(352);
    f.write(reinterpret_cast<const char*>(&bad), 4);
  }
  CHECK_THROWS_AS(read_probs(tmp.file("ok.nii")), DataError);
}

TEST_CASE("long case ids are truncated to the descrip field") {
  fixtures::TempDir tmp("nifti-long");
  std::mt19937_64 rng(71);
  VolumeMeta m = fixtures::meta(2, 2, 2);
  m.case_id = std::string(120, 'x');
  const LabelVolume in = sample_labels(rng, m, 4);
  write_nifti(in, tmp.file("long.nii"));
  const LabelVolume out = read_labels(tmp.file("long.nii"));
  CHECK(out.meta.case_id == std::string(79, 'x'));  // descrip holds 80 chars with NUL
}
