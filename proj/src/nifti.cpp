#include "fuseval/nifti.hpp"

#include <zlib.h>

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "fuseval/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "NIfTI reader assumes a little-endian host");

namespace fuseval {

namespace {

constexpr std::int16_t kDtUint8 = 2;
constexpr std::int16_t kDtFloat32 = 16;
constexpr float kVoxOffset = 352.0f;  // 348-byte header + 4 extension bytes

#pragma pack(push, 1)
struct Nifti1Header {
  std::int32_t sizeof_hdr;
  char data_type[10];
  char db_name[18];
  std::int32_t extents;
  std::int16_t session_error;
  char regular;
  char dim_info;
  std::int16_t dim[8];
  float intent_p1, intent_p2, intent_p3;
  std::int16_t intent_code;
  std::int16_t datatype;
  std::int16_t bitpix;
  std::int16_t slice_start;
  float pixdim[8];
  float vox_offset;
  float scl_slope;
  float scl_inter;
  std::int16_t slice_end;
  char slice_code;
  char xyzt_units;
  float cal_max, cal_min;
  float slice_duration;
  float toffset;
  std::int32_t glmax, glmin;
  char descrip[80];
  char aux_file[24];
  std::int16_t qform_code;
  std::int16_t sform_code;
  float quatern_b, quatern_c, quatern_d;
  float qoffset_x, qoffset_y, qoffset_z;
  float srow_x[4];
  float srow_y[4];
  float srow_z[4];
  char intent_name[16];
  char magic[4];
};
#pragma pack(pop)
static_assert(sizeof(Nifti1Header) == 348, "NIfTI-1 header must be 348 bytes");

// RAII wrapper for zlib's gzFile; reads plain files transparently.
struct GzReader {
  gzFile f = nullptr;

  explicit GzReader(const std::string& path) {
    f = gzopen(path.c_str(), "rb");
    if (!f) throw IoError("cannot open '" + path + "' for reading");
  }
  ~GzReader() {
    if (f) gzclose(f);
  }
  GzReader(const GzReader&) = delete;
  GzReader& operator=(const GzReader&) = delete;

  void read_exact(void* dst, std::size_t n, const std::string& path) {
    std::size_t done = 0;
    auto* out = static_cast<unsigned char*>(dst);
    while (done < n) {
      const unsigned chunk =
          static_cast<unsigned>(std::min<std::size_t>(n - done, 1u << 30));
      const int got = gzread(f, out + done, chunk);
      if (got <= 0) throw FormatError("truncated NIfTI file '" + path + "'");
      done += static_cast<std::size_t>(got);
    }
  }
};

Nifti1Header make_header(const VolumeMeta& meta, std::int16_t datatype, int channels) {
  Nifti1Header h;
  std::memset(&h, 0, sizeof(h));
  h.sizeof_hdr = 348;
  h.regular = 'r';
  h.dim[0] = channels > 0 ? 4 : 3;
  h.dim[1] = static_cast<std::int16_t>(meta.dims[0]);
  h.dim[2] = static_cast<std::int16_t>(meta.dims[1]);
  h.dim[3] = static_cast<std::int16_t>(meta.dims[2]);
  h.dim[4] = channels > 0 ? static_cast<std::int16_t>(channels) : 1;
  for (int i = 5; i < 8; ++i) h.dim[i] = 1;
  h.datatype = datatype;
  h.bitpix = datatype == kDtUint8 ? 8 : 32;
  h.pixdim[0] = 1.0f;
  h.pixdim[1] = static_cast<float>(meta.spacing[0]);
  h.pixdim[2] = static_cast<float>(meta.spacing[1]);
  h.pixdim[3] = static_cast<float>(meta.spacing[2]);
  h.vox_offset = kVoxOffset;
  h.scl_slope = 1.0f;
  h.scl_inter = 0.0f;
  h.xyzt_units = 2;  // millimeters
  std::snprintf(h.descrip, sizeof(h.descrip), "%s", meta.case_id.c_str());
  // Diagonal sform so downstream viewers get a usable affine.
  h.sform_code = 1;
  h.srow_x[0] = h.pixdim[1];
  h.srow_y[1] = h.pixdim[2];
  h.srow_z[2] = h.pixdim[3];
  std::memcpy(h.magic, "n+1", 4);
  return h;
}

void check_dims_fit(const VolumeMeta& meta, int channels) {
  for (int a = 0; a < 3; ++a) {
    if (meta.dims[a] > 32767) {
      throw UnsupportedError("dim " + std::to_string(meta.dims[a]) +
                             " exceeds the NIfTI-1 int16 limit");
    }
  }
  if (channels > 32767) throw UnsupportedError("too many channels for NIfTI-1");
}

void write_payload(const std::string& path, const Nifti1Header& header, const void* data,
                   std::size_t bytes) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  fs::path tmp = target;
  tmp += ".tmp";

  const bool compress = target.extension() == ".gz";
  const char extension_bytes[4] = {0, 0, 0, 0};
  bool ok = true;
  if (compress) {
    gzFile f = gzopen(tmp.string().c_str(), "wb");
    if (!f) throw IoError("cannot open '" + tmp.string() + "' for writing");
    ok = gzwrite(f, &header, sizeof(header)) == int(sizeof(header)) &&
         gzwrite(f, extension_bytes, 4) == 4;
    std::size_t done = 0;
    const auto* src = static_cast<const unsigned char*>(data);
    while (ok && done < bytes) {
      const unsigned chunk =
          static_cast<unsigned>(std::min<std::size_t>(bytes - done, 1u << 30));
      ok = gzwrite(f, src + done, chunk) == int(chunk);
      done += chunk;
    }
    ok = gzclose(f) == Z_OK && ok;
  } else {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + tmp.string() + "' for writing");
    f.write(reinterpret_cast<const char*>(&header), sizeof(header));
    f.write(extension_bytes, 4);
    f.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
    ok = f.good();
    f.close();
    ok = ok && f.good();
  }
  if (!ok) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw IoError("failed writing '" + path + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("failed to move temp file into place for '" + path + "'");
  }
}

}  // namespace

std::string case_id_from_path(const std::string& path) {
  std::filesystem::path p(path);
  std::string stem = p.filename().string();
  for (const char* suffix : {".gz", ".nii"}) {
    const std::size_t len = std::strlen(suffix);
    if (stem.size() > len && stem.compare(stem.size() - len, len, suffix) == 0) {
      stem.resize(stem.size() - len);
    }
  }
  return stem;
}

NiftiPayload read_nifti(const std::string& path) {
  if (!std::filesystem::exists(path)) throw IoError("no such file: '" + path + "'");
  GzReader in(path);

  Nifti1Header h;
  in.read_exact(&h, sizeof(h), path);
  if (std::memcmp(h.magic, "n+1", 4) != 0) {
    if (std::memcmp(h.magic, "ni1", 4) == 0) {
      throw UnsupportedError("two-file (.hdr/.img) NIfTI is not supported: '" + path + "'");
    }
    if (h.sizeof_hdr != 348) {
      // 348 byte-swapped: big-endian writer.
      if (h.sizeof_hdr == 0x5C010000) {
        throw UnsupportedError("big-endian NIfTI is not supported: '" + path + "'");
      }
      throw FormatError("not a NIfTI-1 file (bad sizeof_hdr): '" + path + "'");
    }
    throw FormatError("not a NIfTI-1 file (bad magic): '" + path + "'");
  }

  const int ndim = h.dim[0];
  if (ndim != 3 && ndim != 4) {
    throw UnsupportedError("only 3D or 4D volumes are supported, got dim[0]=" +
                           std::to_string(ndim) + " in '" + path + "'");
  }
  VolumeMeta meta;
  for (int a = 0; a < 3; ++a) {
    meta.dims[a] = h.dim[a + 1];
    meta.spacing[a] = h.pixdim[a + 1];
  }
  meta.case_id = h.descrip[0] ? std::string(h.descrip, strnlen(h.descrip, sizeof(h.descrip)))
                              : case_id_from_path(path);
  validate_meta(meta);

  const int channels = ndim == 4 ? h.dim[4] : 1;
  if (channels < 1) throw FormatError("dim[4] must be >= 1 in '" + path + "'");
  if (h.scl_slope != 0.0f && h.scl_slope != 1.0f) {
    throw UnsupportedError("scl_slope scaling is not supported: '" + path + "'");
  }
  if (h.scl_inter != 0.0f) {
    throw UnsupportedError("scl_inter offsets are not supported: '" + path + "'");
  }

  const std::size_t vox_offset = static_cast<std::size_t>(h.vox_offset);
  if (h.vox_offset < 348.0f || h.vox_offset != std::floor(h.vox_offset)) {
    throw FormatError("invalid vox_offset in '" + path + "'");
  }
  // Skip extension bytes between header and payload.
  std::vector<char> skip(vox_offset - sizeof(Nifti1Header));
  if (!skip.empty()) in.read_exact(skip.data(), skip.size(), path);

  const std::size_t nvox = meta.voxel_count() * static_cast<std::size_t>(channels);

  if (h.datatype == kDtUint8) {
    if (ndim == 4 && channels != 1) {
      throw UnsupportedError("4D uint8 volumes are not supported (labels are 3D): '" +
                             path + "'");
    }
    LabelVolume l;
    l.meta = meta;
    l.voxels.resize(nvox);
    in.read_exact(l.voxels.data(), nvox, path);
    int max_label = 0;
    for (std::uint8_t v : l.voxels) max_label = std::max<int>(max_label, v);
    l.num_classes = std::max(4, max_label + 1);
    return l;
  }
  if (h.datatype == kDtFloat32) {
    ProbVolume p;
    p.meta = meta;
    p.channels = channels;
    p.probs.resize(nvox);
    in.read_exact(p.probs.data(), nvox * sizeof(float), path);
    for (float v : p.probs) {
      if (!std::isfinite(v)) {
        throw DataError("non-finite voxel value in '" + path + "'");
      }
      if (v < 0.0f || v > 1.0f) {
        throw DataError("probability outside [0, 1] in '" + path + "'");
      }
    }
    return p;
  }
  throw UnsupportedError("unsupported NIfTI datatype " + std::to_string(h.datatype) +
                         " in '" + path + "' (only uint8 and float32)");
}

LabelVolume read_labels(const std::string& path) {
  auto payload = read_nifti(path);
  if (auto* l = std::get_if<LabelVolume>(&payload)) return std::move(*l);
  throw UnsupportedError("expected a uint8 label volume in '" + path + "'");
}

ProbVolume read_probs(const std::string& path) {
  auto payload = read_nifti(path);
  if (auto* p = std::get_if<ProbVolume>(&payload)) return std::move(*p);
  throw UnsupportedError("expected a float32 probability volume in '" + path + "'");
}

void write_nifti(const LabelVolume& volume, const std::string& path) {
  validate_labels(volume);
  check_dims_fit(volume.meta, 0);
  const Nifti1Header h = make_header(volume.meta, kDtUint8, 0);
  write_payload(path, h, volume.voxels.data(), volume.voxels.size());
}

void write_nifti(const ProbVolume& volume, const std::string& path) {
  validate_probs(volume);  // rejects NaN before any bytes hit the disk
  check_dims_fit(volume.meta, volume.channels);
  const Nifti1Header h = make_header(volume.meta, kDtFloat32, volume.channels);
  write_payload(path, h, volume.probs.data(), volume.probs.size() * sizeof(float));
}

}  // namespace fuseval
