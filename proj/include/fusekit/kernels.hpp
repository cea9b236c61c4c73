#pragma once

// Data-parallel inner loops shared by metrics, enhancers and fusion.
//
// Every kernel exists twice: `serial` is the plain single-threaded reference
// kept for testing and benchmarking, `parallel` is the OpenMP version used by
// the library. Reductions in `parallel` sum fixed-size blocks independently
// and then combine the block partials in block order, so the result does not
// depend on the thread count or scheduling.

#include <cstddef>
#include <span>
#include <vector>

namespace fusekit::kernels {

// Half-sample symmetric reflection: -1 -> 0, -2 -> 1, n -> n-1. Periodic
// with period 2n, so any offset is valid even when it exceeds n.
inline int reflect_index(int i, int n) noexcept {
  const int period = 2 * n;
  int r = i % period;
  if (r < 0) r += period;
  return r < n ? r : period - 1 - r;
}

// Normalized 1-D Gaussian taps of length 2*radius+1.
std::vector<double> gaussian_taps(double sigma, int radius);

struct SsimConstants {
  double c1;
  double c2;
};

namespace serial {

double sum(std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);
double sum_squared_diff(std::span<const double> a, std::span<const double> b);

// out[j] = sum_i weights[i] * inputs[i][j]
void weighted_sum(std::span<const std::span<const double>> inputs,
                  std::span<const double> weights, std::span<double> out);

// Separable filter of one width x height plane with symmetric borders.
void separable_filter(std::span<const double> plane, int width, int height,
                      std::span<const double> taps, std::span<double> out);

// Per-pixel SSIM of two planes, local statistics weighted by taps x taps.
void ssim_map(std::span<const double> x, std::span<const double> y, int width,
              int height, std::span<const double> taps, SsimConstants k,
              std::span<double> out);

}  // namespace serial

namespace parallel {

inline constexpr std::size_t kReduceBlock = 8192;

double sum(std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);
double sum_squared_diff(std::span<const double> a, std::span<const double> b);
void weighted_sum(std::span<const std::span<const double>> inputs,
                  std::span<const double> weights, std::span<double> out);
void separable_filter(std::span<const double> plane, int width, int height,
                      std::span<const double> taps, std::span<double> out);
void ssim_map(std::span<const double> x, std::span<const double> y, int width,
              int height, std::span<const double> taps, SsimConstants k,
              std::span<double> out);

}  // namespace parallel

}  // namespace fusekit::kernels
