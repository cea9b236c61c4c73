#include "fusekit/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "fusekit/error.hpp"

namespace fusekit::kernels {

namespace {

// Neumaier-compensated accumulator.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + carry; }
};

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": length mismatch " + std::to_string(a) +
                         " vs " + std::to_string(b));
  }
}

void check_filter_args(std::span<const double> plane, int width, int height,
                       std::span<const double> taps, std::span<double> out) {
  if (width < 1 || height < 1 ||
      plane.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) ||
      out.size() != plane.size()) {
    throw DimensionError("separable_filter: plane does not match dimensions");
  }
  if (taps.empty() || taps.size() % 2 == 0) {
    throw InvalidArgument("separable_filter: tap count must be odd");
  }
}

void filter_row(const double* src, double* dst, int width, std::span<const double> taps) {
  const int radius = static_cast<int>(taps.size() / 2);
  for (int x = 0; x < width; ++x) {
    double acc = 0.0;
    for (int t = -radius; t <= radius; ++t) {
      acc += taps[t + radius] * src[reflect_index(x + t, width)];
    }
    dst[x] = acc;
  }
}

void filter_column_pixel(const double* src, double* dst, int x, int y, int width, int height,
                         std::span<const double> taps) {
  const int radius = static_cast<int>(taps.size() / 2);
  double acc = 0.0;
  for (int t = -radius; t <= radius; ++t) {
    acc += taps[t + radius] *
           src[static_cast<std::size_t>(reflect_index(y + t, height)) * width + x];
  }
  dst[static_cast<std::size_t>(y) * width + x] = acc;
}

inline double ssim_value(double mx, double my, double xx, double yy, double xy,
                         SsimConstants k) {
  const double vx = xx - mx * mx;
  const double vy = yy - my * my;
  const double cxy = xy - mx * my;
  const double num = (2.0 * mx * my + k.c1) * (2.0 * cxy + k.c2);
  const double den = (mx * mx + my * my + k.c1) * (vx + vy + k.c2);
  return num / den;
}

template <typename Filter>
void ssim_map_impl(std::span<const double> x, std::span<const double> y, int width, int height,
                   std::span<const double> taps, SsimConstants k, std::span<double> out,
                   Filter&& filter, bool par) {
  const std::size_t n = x.size();
  require_same_length(n, y.size(), "ssim_map");
  require_same_length(n, out.size(), "ssim_map");
  std::vector<double> xx(n), yy(n), xy(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  std::vector<double> mx(n), my(n), fxx(n), fyy(n), fxy(n);
  filter(x, width, height, taps, std::span<double>(mx));
  filter(y, width, height, taps, std::span<double>(my));
  filter(std::span<const double>(xx), width, height, taps, std::span<double>(fxx));
  filter(std::span<const double>(yy), width, height, taps, std::span<double>(fyy));
  filter(std::span<const double>(xy), width, height, taps, std::span<double>(fxy));
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    out[i] = ssim_value(mx[i], my[i], fxx[i], fyy[i], fxy[i], k);
  }
}

void check_weighted_sum(std::span<const std::span<const double>> inputs,
                        std::span<const double> weights, std::span<double> out) {
  require_same_length(inputs.size(), weights.size(), "weighted_sum");
  for (const auto& in : inputs) require_same_length(in.size(), out.size(), "weighted_sum");
}

template <typename BlockFn>
double blocked_reduce(std::size_t n, BlockFn&& block_sum) {
  const std::size_t blocks = (n + parallel::kReduceBlock - 1) / parallel::kReduceBlock;
  std::vector<double> partial(blocks, 0.0);
  const auto nb = static_cast<std::ptrdiff_t>(blocks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < nb; ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * parallel::kReduceBlock;
    const std::size_t end = std::min(n, begin + parallel::kReduceBlock);
    partial[b] = block_sum(begin, end);
  }
  CompensatedSum total;
  for (double p : partial) total.add(p);
  return total.value();
}

}  // namespace

std::vector<double> gaussian_taps(double sigma, int radius) {
  if (!(sigma > 0.0) || radius < 0) throw InvalidArgument("gaussian_taps: sigma must be > 0");
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
    taps[i + radius] = w;
    total += w;
  }
  for (double& w : taps) w /= total;
  return taps;
}

// ---------------------------------------------------------------- serial

namespace serial {

double sum(std::span<const double> x) {
  CompensatedSum acc;
  for (double v : x) acc.add(v);
  return acc.value();
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_length(a.size(), b.size(), "dot");
  CompensatedSum acc;
  for (std::size_t i = 0; i < a.size(); ++i) acc.add(a[i] * b[i]);
  return acc.value();
}

double sum_squared_diff(std::span<const double> a, std::span<const double> b) {
  require_same_length(a.size(), b.size(), "sum_squared_diff");
  CompensatedSum acc;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc.add(d * d);
  }
  return acc.value();
}

void weighted_sum(std::span<const std::span<const double>> inputs,
                  std::span<const double> weights, std::span<double> out) {
  check_weighted_sum(inputs, weights, out);
  for (std::size_t j = 0; j < out.size(); ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) acc += weights[i] * inputs[i][j];
    out[j] = acc;
  }
}

void separable_filter(std::span<const double> plane, int width, int height,
                      std::span<const double> taps, std::span<double> out) {
  check_filter_args(plane, width, height, taps, out);
  std::vector<double> tmp(plane.size());
  for (int y = 0; y < height; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * width;
    filter_row(plane.data() + row, tmp.data() + row, width, taps);
  }
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      filter_column_pixel(tmp.data(), out.data(), x, y, width, height, taps);
    }
  }
}

void ssim_map(std::span<const double> x, std::span<const double> y, int width, int height,
              std::span<const double> taps, SsimConstants k, std::span<double> out) {
  ssim_map_impl(x, y, width, height, taps, k, out, &serial::separable_filter, false);
}

}  // namespace serial

// -------------------------------------------------------------- parallel

namespace parallel {

double sum(std::span<const double> x) {
  return blocked_reduce(x.size(), [&](std::size_t begin, std::size_t end) {
    CompensatedSum acc;
    for (std::size_t i = begin; i < end; ++i) acc.add(x[i]);
    return acc.value();
  });
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_length(a.size(), b.size(), "dot");
  return blocked_reduce(a.size(), [&](std::size_t begin, std::size_t end) {
    CompensatedSum acc;
    for (std::size_t i = begin; i < end; ++i) acc.add(a[i] * b[i]);
    return acc.value();
  });
}

double sum_squared_diff(std::span<const double> a, std::span<const double> b) {
  require_same_length(a.size(), b.size(), "sum_squared_diff");
  return blocked_reduce(a.size(), [&](std::size_t begin, std::size_t end) {
    CompensatedSum acc;
    for (std::size_t i = begin; i < end; ++i) {
      const double d = a[i] - b[i];
      acc.add(d * d);
    }
    return acc.value();
  });
}

void weighted_sum(std::span<const std::span<const double>> inputs,
                  std::span<const double> weights, std::span<double> out) {
  check_weighted_sum(inputs, weights, out);
  const auto n = static_cast<std::ptrdiff_t>(out.size());
  const std::size_t m = inputs.size();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) acc += weights[i] * inputs[i][j];
    out[j] = acc;
  }
}

void separable_filter(std::span<const double> plane, int width, int height,
                      std::span<const double> taps, std::span<double> out) {
  check_filter_args(plane, width, height, taps, out);
  std::vector<double> tmp(plane.size());
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * width;
    filter_row(plane.data() + row, tmp.data() + row, width, taps);
  }
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      filter_column_pixel(tmp.data(), out.data(), x, y, width, height, taps);
    }
  }
}

void ssim_map(std::span<const double> x, std::span<const double> y, int width, int height,
              std::span<const double> taps, SsimConstants k, std::span<double> out) {
  ssim_map_impl(x, y, width, height, taps, k, out, &parallel::separable_filter, true);
}

}  // namespace parallel

}  // namespace fusekit::kernels
