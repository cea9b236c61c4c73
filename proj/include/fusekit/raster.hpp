#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace fusekit {

// Three-channel floating-point image, row-major, RGB interleaved. Samples
// are nominally in [0,1] but intermediate results may leave that range;
// clamping happens at export and before metric computation.
class Raster {
 public:
  static constexpr int kChannels = 3;

  Raster() = default;
  Raster(int width, int height, double fill = 0.0);
  Raster(int width, int height, std::vector<double> samples);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  std::size_t sample_count() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const double> samples() const noexcept { return data_; }
  std::span<double> samples() noexcept { return data_; }

  double at(int x, int y, int c) const { return data_[index(x, y, c)]; }
  double& at(int x, int y, int c) { return data_[index(x, y, c)]; }

  bool same_shape(const Raster& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  // One channel as a contiguous width*height plane.
  std::vector<double> plane(int c) const;
  void set_plane(int c, std::span<const double> values);

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) *
               kChannels +
           static_cast<std::size_t>(c);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

// Images keyed by pair id. std::map keeps iteration in lexicographic id
// order, which every report and column layout relies on.
using ImageSet = std::map<std::string, Raster>;

struct ImagePairRecord {
  std::string id;
  std::string low_path;
  std::string gt_path;
};

// Copy with every sample clamped to [0,1].
Raster clamped(const Raster& img);

// Arithmetic mean over all samples of all channels.
double mean_luminance(const Raster& img);

std::string shape_string(const Raster& img);

}  // namespace fusekit
