#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "fusekit/error.hpp"
#include "fusekit/kernels.hpp"
#include "fusekit/rng.hpp"
#include "oracles.hpp"

namespace fusekit::kernels {
namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1.0, 2.0);
  return v;
}

TEST(ReflectIndex, HalfSampleSymmetric) {
  EXPECT_EQ(reflect_index(-1, 5), 0);
  EXPECT_EQ(reflect_index(-2, 5), 1);
  EXPECT_EQ(reflect_index(5, 5), 4);
  EXPECT_EQ(reflect_index(6, 5), 3);
  EXPECT_EQ(reflect_index(2, 5), 2);
  for (int n = 1; n < 9; ++n) {
    for (int i = -40; i < 40; ++i) {
      ASSERT_EQ(reflect_index(i, n), testing::naive_reflect(i, n)) << i << " " << n;
    }
  }
}

TEST(GaussianTaps, NormalizedAndSymmetric) {
  const auto taps = gaussian_taps(1.5, 5);
  ASSERT_EQ(taps.size(), 11u);
  EXPECT_NEAR(std::accumulate(taps.begin(), taps.end(), 0.0), 1.0, 1e-15);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(taps[i], taps[10 - i]);
  EXPECT_THROW(gaussian_taps(0.0, 3), InvalidArgument);
}

// Parallel reductions agree with the serial reference across sizes that
// straddle the block boundary.
TEST(ParallelMatchesSerial, Reductions) {
  for (std::size_t n : {std::size_t{1}, std::size_t{7}, parallel::kReduceBlock - 1,
                        parallel::kReduceBlock, parallel::kReduceBlock + 1,
                        3 * parallel::kReduceBlock + 17}) {
    const auto a = random_vector(n, n);
    const auto b = random_vector(n, n + 1);
    const double scale = static_cast<double>(n);
    EXPECT_NEAR(parallel::sum(a), serial::sum(a), 1e-12 * scale);
    EXPECT_NEAR(parallel::dot(a, b), serial::dot(a, b), 1e-12 * scale);
    EXPECT_NEAR(parallel::sum_squared_diff(a, b), serial::sum_squared_diff(a, b), 1e-12 * scale);
    EXPECT_NEAR(serial::dot(a, b), testing::naive_dot(a, b), 1e-10 * scale);
  }
}

TEST(ParallelMatchesSerial, WeightedSumIsBitIdentical) {
  const auto a = random_vector(5000, 1);
  const auto b = random_vector(5000, 2);
  const auto c = random_vector(5000, 3);
  const std::vector<std::span<const double>> inputs{a, b, c};
  const std::vector<double> w{0.16, 0.40, 0.44};
  std::vector<double> s(5000), p(5000);
  serial::weighted_sum(inputs, w, s);
  parallel::weighted_sum(inputs, w, p);
  EXPECT_EQ(s, p);
  EXPECT_THROW(parallel::weighted_sum(inputs, std::vector<double>{1.0}, p), DimensionError);
}

TEST(ParallelMatchesSerial, FilterAndSsimMap) {
  const auto taps = gaussian_taps(1.5, 5);
  for (auto [w, h] : {std::pair{11, 11}, std::pair{23, 17}, std::pair{64, 40}}) {
    const auto x = random_vector(static_cast<std::size_t>(w * h), w);
    const auto y = random_vector(static_cast<std::size_t>(w * h), h + 1000);
    std::vector<double> fs(x.size()), fp(x.size());
    serial::separable_filter(x, w, h, taps, fs);
    parallel::separable_filter(x, w, h, taps, fp);
    EXPECT_EQ(fs, fp);
    const SsimConstants k{1e-4, 9e-4};
    serial::ssim_map(x, y, w, h, taps, k, fs);
    parallel::ssim_map(x, y, w, h, taps, k, fp);
    EXPECT_EQ(fs, fp);
  }
}

TEST(SeparableFilter, PreservesConstantsAndRejectsBadArgs) {
  const auto taps = gaussian_taps(2.0, 6);
  std::vector<double> plane(12 * 5, 0.3), out(plane.size());
  parallel::separable_filter(plane, 12, 5, taps, out);
  for (double v : out) EXPECT_NEAR(v, 0.3, 1e-15);
  EXPECT_THROW(parallel::separable_filter(plane, 11, 5, taps, out), DimensionError);
  const std::vector<double> even{0.5, 0.5};
  EXPECT_THROW(parallel::separable_filter(plane, 12, 5, even, out), InvalidArgument);
}

}  // namespace
}  // namespace fusekit::kernels
