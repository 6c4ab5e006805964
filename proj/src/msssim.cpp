#include <algorithm>
#include <cmath>
#include <vector>

#include "fuseval/errors.hpp"
#include "fuseval/losses.hpp"

namespace fuseval {

namespace {

struct Dims {
  std::int64_t nx, ny, nz;
  std::size_t count() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
           static_cast<std::size_t>(nz);
  }
};

std::vector<double> gaussian_kernel(int window, double sigma) {
  const int radius = window / 2;
  std::vector<double> w(static_cast<std::size_t>(window));
  double sum = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    const double v = std::exp(-0.5 * (double(k) * double(k)) / (sigma * sigma));
    w[static_cast<std::size_t>(k + radius)] = v;
    sum += v;
  }
  for (double& v : w) v /= sum;
  return w;
}

// Gaussian blur along one axis. Near the border the window is truncated and
// the remaining weights renormalized, which keeps constant fields constant.
void blur_axis(const std::vector<double>& src, std::vector<double>& dst, const Dims& d,
               int axis, const std::vector<double>& kernel) {
  const int radius = static_cast<int>(kernel.size()) / 2;
  const std::int64_t n[3] = {d.nx, d.ny, d.nz};
  const std::int64_t stride[3] = {1, d.nx, d.nx * d.ny};
  const std::int64_t len = n[axis];
  const std::int64_t s = stride[axis];

  const int oa = axis == 0 ? 1 : 0;  // the two other axes
  const int ob = axis == 2 ? 1 : 2;
  for (std::int64_t b = 0; b < n[ob]; ++b) {
    for (std::int64_t a = 0; a < n[oa]; ++a) {
      const std::int64_t base = a * stride[oa] + b * stride[ob];
      for (std::int64_t i = 0; i < len; ++i) {
        const std::int64_t lo = std::max<std::int64_t>(0, i - radius);
        const std::int64_t hi = std::min<std::int64_t>(len - 1, i + radius);
        double acc = 0.0, wsum = 0.0;
        for (std::int64_t j = lo; j <= hi; ++j) {
          const double w = kernel[static_cast<std::size_t>(j - i + radius)];
          acc += w * src[static_cast<std::size_t>(base + j * s)];
          wsum += w;
        }
        dst[static_cast<std::size_t>(base + i * s)] = acc / wsum;
      }
    }
  }
}

std::vector<double> blur(const std::vector<double>& src, const Dims& d,
                         const std::vector<double>& kernel) {
  std::vector<double> tmp(src.size()), out(src.size());
  blur_axis(src, tmp, d, 0, kernel);
  blur_axis(tmp, out, d, 1, kernel);
  blur_axis(out, tmp, d, 2, kernel);
  return tmp;
}

// 2x average pooling with floor dims; trailing odd voxels are dropped.
std::vector<double> downsample2(const std::vector<double>& src, const Dims& d, Dims& out_d) {
  out_d = {d.nx / 2, d.ny / 2, d.nz / 2};
  std::vector<double> out(out_d.count());
  std::size_t o = 0;
  for (std::int64_t z = 0; z < out_d.nz; ++z) {
    for (std::int64_t y = 0; y < out_d.ny; ++y) {
      for (std::int64_t x = 0; x < out_d.nx; ++x, ++o) {
        double acc = 0.0;
        for (int dz = 0; dz < 2; ++dz) {
          for (int dy = 0; dy < 2; ++dy) {
            for (int dx = 0; dx < 2; ++dx) {
              const std::size_t i =
                  static_cast<std::size_t>((2 * x + dx) +
                                           d.nx * ((2 * y + dy) + d.ny * (2 * z + dz)));
              acc += src[i];
            }
          }
        }
        out[o] = acc / 8.0;
      }
    }
  }
  return out;
}

struct ScaleStats {
  double mean_cs = 0.0;
  double mean_ssim = 0.0;
};

ScaleStats ssim_scale(const std::vector<double>& a, const std::vector<double>& b,
                      const Dims& d, const std::vector<double>& kernel, double c1, double c2) {
  const std::size_t n = d.count();
  std::vector<double> aa(n), bb(n), ab(n);
  for (std::size_t i = 0; i < n; ++i) {
    aa[i] = a[i] * a[i];
    bb[i] = b[i] * b[i];
    ab[i] = a[i] * b[i];
  }
  const std::vector<double> mu_a = blur(a, d, kernel);
  const std::vector<double> mu_b = blur(b, d, kernel);
  const std::vector<double> e_aa = blur(aa, d, kernel);
  const std::vector<double> e_bb = blur(bb, d, kernel);
  const std::vector<double> e_ab = blur(ab, d, kernel);

  double sum_cs = 0.0, sum_ssim = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double var_a = e_aa[i] - mu_a[i] * mu_a[i];
    const double var_b = e_bb[i] - mu_b[i] * mu_b[i];
    const double cov = e_ab[i] - mu_a[i] * mu_b[i];
    const double l = (2.0 * mu_a[i] * mu_b[i] + c1) / (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1);
    const double cs = (2.0 * cov + c2) / (var_a + var_b + c2);
    sum_cs += cs;
    sum_ssim += l * cs;
  }
  return {sum_cs / double(n), sum_ssim / double(n)};
}

}  // namespace

int ms_ssim_effective_scales(const std::array<std::int64_t, 3>& dims, const MsSsimConfig& cfg) {
  if (cfg.window < 3 || cfg.window % 2 == 0) {
    throw ConfigError("ms-ssim window must be odd and >= 3");
  }
  if (!(cfg.sigma > 0.0)) throw ConfigError("ms-ssim sigma must be > 0");
  if (cfg.scales < 1) throw ConfigError("ms-ssim scales must be >= 1");

  Dims d{dims[0], dims[1], dims[2]};
  int usable = 0;
  for (int s = 0; s < cfg.scales; ++s) {
    if (std::min({d.nx, d.ny, d.nz}) < cfg.window) break;
    ++usable;
    d = {d.nx / 2, d.ny / 2, d.nz / 2};
  }
  if (usable == 0) {
    throw ConfigError("volume " + std::to_string(dims[0]) + "x" + std::to_string(dims[1]) +
                      "x" + std::to_string(dims[2]) + " is smaller than the ms-ssim window " +
                      std::to_string(cfg.window));
  }
  return usable;
}

double ms_ssim_index(const float* a, const float* b, const std::array<std::int64_t, 3>& dims,
                     const MsSsimConfig& cfg) {
  const int scales = ms_ssim_effective_scales(dims, cfg);
  const std::vector<double> kernel = gaussian_kernel(cfg.window, cfg.sigma);
  const double c1 = (cfg.k1 * cfg.dynamic_range) * (cfg.k1 * cfg.dynamic_range);
  const double c2 = (cfg.k2 * cfg.dynamic_range) * (cfg.k2 * cfg.dynamic_range);

  Dims d{dims[0], dims[1], dims[2]};
  std::vector<double> va(d.count()), vb(d.count());
  for (std::size_t i = 0; i < va.size(); ++i) {
    va[i] = a[i];
    vb[i] = b[i];
  }

  // Equal exponents across scales: contrast-structure terms at every scale,
  // the full ssim (luminance included) only at the coarsest.
  const double exponent = 1.0 / double(scales);
  double result = 1.0;
  for (int s = 0; s < scales; ++s) {
    const ScaleStats stats = ssim_scale(va, vb, d, kernel, c1, c2);
    const double term = s + 1 == scales ? stats.mean_ssim : stats.mean_cs;
    result *= std::pow(std::max(term, 0.0), exponent);
    if (s + 1 < scales) {
      Dims nd;
      va = downsample2(va, d, nd);
      vb = downsample2(vb, d, nd);
      d = nd;
    }
  }
  return result;
}

}  // namespace fuseval
