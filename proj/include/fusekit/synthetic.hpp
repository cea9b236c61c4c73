#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fusekit/enhancers.hpp"
#include "fusekit/fusion.hpp"
#include "fusekit/raster.hpp"

namespace fusekit::synthetic {

// Procedural ground-truth scene: smooth color gradients, a few flat shapes
// and a sinusoidal texture, samples in roughly [0.03, 0.97].
Raster scene(int width, int height, std::uint64_t seed);

// A desk-scale fusion instance: ground truth, degraded inputs, and the
// outputs of three dissimilar stand-in enhancers (gamma, histogram
// equalization, log retinex) with per-instance random parameters.
struct Instance {
  ImageSet gts;
  ImageSet lows;
  std::vector<std::string> method_ids;
  fusion::MethodOutputs outputs;
  std::vector<enhance::EnhancerSpec> enhancers;
};

Instance make_instance(std::uint64_t seed, int image_count = 8, int size = 64);

}  // namespace fusekit::synthetic
