#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>

#include "fusekit/raster.hpp"

namespace fusekit::enhance {

enum class EnhancerKind { Identity, Gamma, LinearStretch, HistEqualize, LogRetinex };

std::string to_string(EnhancerKind kind);
EnhancerKind parse_enhancer_kind(const std::string& name);

// Classical stand-ins for learned enhancement operators.
//   gamma:        params["exponent"] > 0
//   log_retinex:  params["blur_sigma"] > 0
struct EnhancerSpec {
  EnhancerKind kind = EnhancerKind::Identity;
  std::map<std::string, double> params;

  double param(const std::string& key, double fallback) const;
  void validate() const;
};

inline constexpr double kDefaultGamma = 0.5;
inline constexpr double kDefaultBlurSigma = 15.0;
inline constexpr int kHistogramBins = 256;

Raster apply_enhancer(const EnhancerSpec& spec, const Raster& img);

Raster apply_gamma(const Raster& img, double exponent);
// Global min/max over all samples; throws InvalidArgument on a constant image.
Raster linear_stretch(const Raster& img);
// Per-channel CDF remap over 256 bins. Constant images come back unchanged.
Raster hist_equalize(const Raster& img);
Raster log_retinex(const Raster& img, double blur_sigma);

inline constexpr double kAugmentGammaLo = 0.6;
inline constexpr double kAugmentGammaHi = 1.2;

struct AugmentResult {
  Raster image;
  double gamma = 1.0;
};

// v^gamma with gamma ~ U[lo, hi] drawn from Rng(seed).
AugmentResult random_gamma_augment(const Raster& img, std::uint64_t seed,
                                   double lo = kAugmentGammaLo,
                                   double hi = kAugmentGammaHi);

// Synthetic low-light degradation: clamp(scale * v^gamma_d + n),
// n ~ N(0, noise_sigma^2) per sample.
struct DegradeSpec {
  double gamma_d = 2.0;
  double scale = 0.5;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

Raster degrade(const Raster& img, const DegradeSpec& spec);

}  // namespace fusekit::enhance
