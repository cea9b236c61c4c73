#include "fusekit/raster.hpp"

#include <algorithm>

#include "fusekit/error.hpp"
#include "fusekit/kernels.hpp"

namespace fusekit {

namespace {

void check_dims(int width, int height) {
  if (width < 1 || height < 1) {
    throw DimensionError("raster dimensions must be positive, got " + std::to_string(width) +
                         "x" + std::to_string(height));
  }
}

}  // namespace

Raster::Raster(int width, int height, double fill) : width_(width), height_(height) {
  check_dims(width, height);
  data_.assign(pixel_count() * kChannels, fill);
}

Raster::Raster(int width, int height, std::vector<double> samples)
    : width_(width), height_(height), data_(std::move(samples)) {
  check_dims(width, height);
  if (data_.size() != pixel_count() * kChannels) {
    throw DimensionError("raster sample count " + std::to_string(data_.size()) +
                         " does not match " + std::to_string(width) + "x" +
                         std::to_string(height) + "x3");
  }
}

std::vector<double> Raster::plane(int c) const {
  std::vector<double> out(pixel_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = data_[i * kChannels + c];
  return out;
}

void Raster::set_plane(int c, std::span<const double> values) {
  if (values.size() != pixel_count()) throw DimensionError("plane size mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) data_[i * kChannels + c] = values[i];
}

Raster clamped(const Raster& img) {
  Raster out = img;
  for (double& v : out.samples()) v = std::clamp(v, 0.0, 1.0);
  return out;
}

double mean_luminance(const Raster& img) {
  if (img.empty()) throw DimensionError("mean_luminance of an empty raster");
  return kernels::parallel::sum(img.samples()) / static_cast<double>(img.sample_count());
}

std::string shape_string(const Raster& img) {
  return std::to_string(img.width()) + "x" + std::to_string(img.height());
}

}  // namespace fusekit
