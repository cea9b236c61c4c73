#include "fusekit/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "fusekit/rng.hpp"

namespace fusekit::synthetic {

Raster scene(int width, int height, std::uint64_t seed) {
  Rng rng(seed);
  Raster img(width, height);

  double base[3], gx[3], gy[3];
  for (int c = 0; c < 3; ++c) {
    base[c] = rng.uniform(0.2, 0.6);
    gx[c] = rng.uniform(-0.3, 0.3);
    gy[c] = rng.uniform(-0.3, 0.3);
  }
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double u = static_cast<double>(x) / width - 0.5;
      const double v = static_cast<double>(y) / height - 0.5;
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = base[c] + gx[c] * u + gy[c] * v;
    }
  }

  // Flat shapes: alternating axis-aligned rectangles and disks.
  const int shapes = 3 + static_cast<int>(rng.uniform() * 4.0);
  for (int s = 0; s < shapes; ++s) {
    double color[3];
    for (double& c : color) c = rng.uniform(0.05, 0.95);
    const double cx = rng.uniform(0.0, width);
    const double cy = rng.uniform(0.0, height);
    const double rx = rng.uniform(0.08, 0.3) * width;
    const double ry = rng.uniform(0.08, 0.3) * height;
    const bool disk = s % 2 == 1;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double dx = (x - cx) / rx;
        const double dy = (y - cy) / ry;
        const bool inside = disk ? dx * dx + dy * dy <= 1.0 : std::abs(dx) <= 1.0 && std::abs(dy) <= 1.0;
        if (inside) {
          for (int c = 0; c < 3; ++c) img.at(x, y, c) = color[c];
        }
      }
    }
  }

  const double freq_x = rng.uniform(0.1, 0.6);
  const double freq_y = rng.uniform(0.1, 0.6);
  const double amp = rng.uniform(0.02, 0.08);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double t = amp * std::sin(freq_x * x + freq_y * y + phase);
      for (int c = 0; c < 3; ++c) {
        img.at(x, y, c) = std::clamp(img.at(x, y, c) + t, 0.03, 0.97);
      }
    }
  }
  return img;
}

Instance make_instance(std::uint64_t seed, int image_count, int size) {
  Rng rng(derive_seed(seed, "instance"));
  enhance::DegradeSpec degrade;
  degrade.gamma_d = rng.uniform(1.6, 2.6);
  degrade.scale = rng.uniform(0.35, 0.7);
  degrade.noise_sigma = rng.uniform(0.005, 0.02);

  Instance inst;
  enhance::EnhancerSpec gamma{enhance::EnhancerKind::Gamma, {{"exponent", rng.uniform(0.3, 0.6)}}};
  enhance::EnhancerSpec equalize{enhance::EnhancerKind::HistEqualize, {}};
  enhance::EnhancerSpec retinex{enhance::EnhancerKind::LogRetinex,
                                {{"blur_sigma", rng.uniform(4.0, 12.0)}}};
  inst.enhancers = {gamma, equalize, retinex};
  inst.method_ids = {"gamma", "hist_equalize", "log_retinex"};

  for (int i = 0; i < image_count; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "img%03d", i);
    Raster gt = scene(size, size, derive_seed(seed, std::string("scene/") + id));
    enhance::DegradeSpec d = degrade;
    d.seed = derive_seed(seed, std::string("noise/") + id);
    Raster low = enhance::degrade(gt, d);
    for (std::size_t m = 0; m < inst.enhancers.size(); ++m) {
      inst.outputs[inst.method_ids[m]][id] = enhance::apply_enhancer(inst.enhancers[m], low);
    }
    inst.gts.emplace(id, std::move(gt));
    inst.lows.emplace(id, std::move(low));
  }
  return inst;
}

}  // namespace fusekit::synthetic
