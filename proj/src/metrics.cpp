#include "fusekit/metrics.hpp"

#include <algorithm>

#include "fusekit/error.hpp"
#include "fusekit/kernels.hpp"

namespace fusekit::metrics {

namespace {

void require_same_shape(const Raster& a, const Raster& b, const char* op) {
  if (!a.same_shape(b) || a.empty()) {
    throw DimensionError(std::string(op) + ": dimension mismatch " + shape_string(a) + " vs " +
                         shape_string(b));
  }
}

const std::vector<double>& ssim_taps() {
  static const std::vector<double> taps =
      kernels::gaussian_taps(kSsimSigma, kSsimWindow / 2);
  return taps;
}

constexpr kernels::SsimConstants kSsimConstants{(kSsimK1 * 1.0) * (kSsimK1 * 1.0),
                                                (kSsimK2 * 1.0) * (kSsimK2 * 1.0)};

}  // namespace

double mse(const Raster& a, const Raster& b) {
  require_same_shape(a, b, "mse");
  return kernels::parallel::sum_squared_diff(a.samples(), b.samples()) /
         static_cast<double>(a.sample_count());
}

double psnr_from_mse(double m) {
  if (m <= 0.0) return kInfinitePsnr;
  return 10.0 * std::log10(1.0 / m);
}

double psnr(const Raster& a, const Raster& b) { return psnr_from_mse(mse(a, b)); }

std::vector<double> ssim_map(const Raster& a, const Raster& b, int channel) {
  require_same_shape(a, b, "ssim");
  if (std::min(a.width(), a.height()) < kSsimWindow) {
    throw DimensionError("ssim: image " + shape_string(a) + " is smaller than the " +
                         std::to_string(kSsimWindow) + "x" + std::to_string(kSsimWindow) +
                         " window");
  }
  if (channel < 0 || channel >= Raster::kChannels) throw InvalidArgument("ssim: bad channel");
  const std::vector<double> x = a.plane(channel);
  const std::vector<double> y = b.plane(channel);
  std::vector<double> out(x.size());
  kernels::parallel::ssim_map(x, y, a.width(), a.height(), ssim_taps(), kSsimConstants, out);
  return out;
}

double ssim(const Raster& a, const Raster& b) {
  double total = 0.0;
  for (int c = 0; c < Raster::kChannels; ++c) {
    const std::vector<double> map = ssim_map(a, b, c);
    total += kernels::parallel::sum(map) / static_cast<double>(map.size());
  }
  return total / Raster::kChannels;
}

MetricReport evaluate_dataset(const ImageSet& outputs, const ImageSet& gts) {
  std::vector<std::string> missing;
  for (const auto& [id, _] : gts) {
    if (!outputs.contains(id)) missing.push_back(id);
  }
  std::vector<std::string> extra;
  for (const auto& [id, _] : outputs) {
    if (!gts.contains(id)) extra.push_back(id);
  }
  if (!missing.empty() || !extra.empty() || gts.empty()) {
    std::string msg = "evaluate_dataset: id sets differ";
    if (gts.empty()) msg += " (no ground-truth ids)";
    for (const auto& id : missing) msg += "; missing output for '" + id + "'";
    for (const auto& id : extra) msg += "; no ground truth for '" + id + "'";
    throw InvalidArgument(msg);
  }

  MetricReport report;
  report.per_image.reserve(gts.size());
  for (const auto& [id, gt] : gts) {
    try {
      const Raster out = clamped(outputs.at(id));
      const Raster ref = clamped(gt);
      ImageMetrics m;
      m.id = id;
      m.mse = mse(out, ref);
      m.psnr_db = psnr_from_mse(m.mse);
      m.ssim = ssim(out, ref);
      report.per_image.push_back(std::move(m));
    } catch (const Error& e) {
      throw DimensionError("image '" + id + "': " + e.what());
    }
  }

  report.count = report.per_image.size();
  double psnr_total = 0.0;
  double ssim_total = 0.0;
  for (const auto& m : report.per_image) {
    ssim_total += m.ssim;
    if (std::isinf(m.psnr_db)) {
      ++report.infinite_count;
    } else {
      psnr_total += m.psnr_db;
    }
  }
  const std::size_t finite = report.count - report.infinite_count;
  report.mean_psnr = finite == 0 ? kInfinitePsnr : psnr_total / static_cast<double>(finite);
  report.mean_ssim = ssim_total / static_cast<double>(report.count);
  return report;
}

}  // namespace fusekit::metrics
