#include "fusekit/enhancers.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "fusekit/error.hpp"
#include "fusekit/image_io.hpp"
#include "fusekit/kernels.hpp"
#include "fusekit/rng.hpp"

namespace fusekit::enhance {

namespace {

struct KindName {
  EnhancerKind kind;
  const char* name;
};

constexpr std::array<KindName, 5> kKindNames{{
    {EnhancerKind::Identity, "identity"},
    {EnhancerKind::Gamma, "gamma"},
    {EnhancerKind::LinearStretch, "linear_stretch"},
    {EnhancerKind::HistEqualize, "hist_equalize"},
    {EnhancerKind::LogRetinex, "log_retinex"},
}};

Raster map_samples(const Raster& img, auto&& fn) {
  Raster out = img;
  auto s = out.samples();
  const auto n = static_cast<std::ptrdiff_t>(s.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) s[i] = fn(s[i]);
  return out;
}

double power_law(double v, double exponent) { return std::pow(std::max(v, 0.0), exponent); }

}  // namespace

std::string to_string(EnhancerKind kind) {
  for (const auto& k : kKindNames) {
    if (k.kind == kind) return k.name;
  }
  return "unknown";
}

EnhancerKind parse_enhancer_kind(const std::string& name) {
  for (const auto& k : kKindNames) {
    if (name == k.name) return k.kind;
  }
  throw InvalidArgument("unknown enhancer kind '" + name +
                        "' (expected identity, gamma, linear_stretch, hist_equalize, "
                        "log_retinex)");
}

double EnhancerSpec::param(const std::string& key, double fallback) const {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void EnhancerSpec::validate() const {
  if (kind == EnhancerKind::Gamma && !(param("exponent", kDefaultGamma) > 0.0)) {
    throw InvalidArgument("gamma exponent must be > 0");
  }
  if (kind == EnhancerKind::LogRetinex && !(param("blur_sigma", kDefaultBlurSigma) > 0.0)) {
    throw InvalidArgument("log_retinex blur_sigma must be > 0");
  }
}

Raster apply_gamma(const Raster& img, double exponent) {
  if (!(exponent > 0.0)) throw InvalidArgument("gamma exponent must be > 0");
  return map_samples(img, [exponent](double v) { return power_law(v, exponent); });
}

Raster linear_stretch(const Raster& img) {
  const auto s = img.samples();
  const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
  const double min = *lo;
  const double range = *hi - *lo;
  if (!(range > 0.0)) {
    throw InvalidArgument("linear_stretch: image has zero dynamic range");
  }
  return map_samples(img, [min, range](double v) { return (v - min) / range; });
}

Raster hist_equalize(const Raster& img) {
  Raster out = img;
  const double n = static_cast<double>(img.pixel_count());
  for (int c = 0; c < Raster::kChannels; ++c) {
    std::vector<double> plane = img.plane(c);
    std::array<std::size_t, kHistogramBins> counts{};
    std::vector<unsigned> bins(plane.size());
    for (std::size_t i = 0; i < plane.size(); ++i) {
      bins[i] = quantize_sample(plane[i], 8);
      ++counts[bins[i]];
    }
    const auto occupied = std::count_if(counts.begin(), counts.end(),
                                        [](std::size_t k) { return k > 0; });
    if (occupied <= 1) continue;
    std::array<double, kHistogramBins> cdf{};
    std::size_t running = 0;
    for (int b = 0; b < kHistogramBins; ++b) {
      running += counts[b];
      cdf[b] = static_cast<double>(running) / n;
    }
    for (std::size_t i = 0; i < plane.size(); ++i) plane[i] = cdf[bins[i]];
    out.set_plane(c, plane);
  }
  return out;
}

Raster log_retinex(const Raster& img, double blur_sigma) {
  if (!(blur_sigma > 0.0)) throw InvalidArgument("log_retinex blur_sigma must be > 0");
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * blur_sigma)));
  const std::vector<double> taps = kernels::gaussian_taps(blur_sigma, radius);
  Raster reflectance = img;
  std::vector<double> blurred(img.pixel_count());
  for (int c = 0; c < Raster::kChannels; ++c) {
    std::vector<double> plane = img.plane(c);
    for (double& v : plane) v = std::max(v, 0.0);
    kernels::parallel::separable_filter(plane, img.width(), img.height(), taps, blurred);
    for (std::size_t i = 0; i < plane.size(); ++i) {
      plane[i] = std::log1p(plane[i]) - std::log1p(blurred[i]);
    }
    reflectance.set_plane(c, plane);
  }
  try {
    return linear_stretch(reflectance);
  } catch (const InvalidArgument&) {
    throw InvalidArgument("log_retinex: image has zero dynamic range");
  }
}

Raster apply_enhancer(const EnhancerSpec& spec, const Raster& img) {
  spec.validate();
  switch (spec.kind) {
    case EnhancerKind::Identity:
      return img;
    case EnhancerKind::Gamma:
      return apply_gamma(img, spec.param("exponent", kDefaultGamma));
    case EnhancerKind::LinearStretch:
      return linear_stretch(img);
    case EnhancerKind::HistEqualize:
      return hist_equalize(img);
    case EnhancerKind::LogRetinex:
      return log_retinex(img, spec.param("blur_sigma", kDefaultBlurSigma));
  }
  throw InvalidArgument("unhandled enhancer kind");
}

AugmentResult random_gamma_augment(const Raster& img, std::uint64_t seed, double lo, double hi) {
  if (!(lo > 0.0) || !(lo <= hi) || !std::isfinite(hi)) {
    throw InvalidArgument("random gamma range must satisfy 0 < lo <= hi");
  }
  Rng rng(seed);
  const double gamma = rng.uniform(lo, hi);
  return {apply_gamma(img, gamma), gamma};
}

void DegradeSpec::validate() const {
  if (!(gamma_d >= 1.0) || !std::isfinite(gamma_d)) {
    throw InvalidArgument("degrade gamma_d must be >= 1");
  }
  if (!(scale > 0.0 && scale <= 1.0)) throw InvalidArgument("degrade scale must be in (0,1]");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw InvalidArgument("degrade noise_sigma must be >= 0");
  }
}

Raster degrade(const Raster& img, const DegradeSpec& spec) {
  spec.validate();
  Raster out = img;
  Rng rng(spec.seed);
  for (double& v : out.samples()) {
    double d = spec.scale * power_law(v, spec.gamma_d);
    if (spec.noise_sigma > 0.0) d += rng.normal(0.0, spec.noise_sigma);
    v = std::clamp(d, 0.0, 1.0);
  }
  return out;
}

}  // namespace fusekit::enhance
