#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "fusekit/raster.hpp"

namespace fusekit::metrics {

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;

// Returned by psnr() for identical inputs.
inline constexpr double kInfinitePsnr = std::numeric_limits<double>::infinity();

double mse(const Raster& a, const Raster& b);

// 10 log10(1 / mse) with peak 1.0; kInfinitePsnr when mse == 0.
double psnr(const Raster& a, const Raster& b);
double psnr_from_mse(double mse);

// Mean SSIM over the full-size map, computed per channel with an 11x11
// Gaussian window (sigma 1.5, symmetric borders) and averaged over RGB.
double ssim(const Raster& a, const Raster& b);

// Per-pixel SSIM of one channel; width*height values.
std::vector<double> ssim_map(const Raster& a, const Raster& b, int channel);

struct ImageMetrics {
  std::string id;
  double psnr_db = 0.0;  // kInfinitePsnr when mse == 0
  double ssim = 0.0;
  double mse = 0.0;
};

struct MetricReport {
  std::vector<ImageMetrics> per_image;  // sorted by id
  // Mean over finite entries only; infinite when every entry is infinite.
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
  std::size_t count = 0;
  std::size_t infinite_count = 0;
};

// Scores clamped outputs against clamped ground truth for every id.
MetricReport evaluate_dataset(const ImageSet& outputs, const ImageSet& gts);

}  // namespace fusekit::metrics
