#pragma once

#include <filesystem>

#include "fusekit/raster.hpp"

namespace fusekit {

// Reads an 8/16-bit RGB PNG or a binary PPM (P6, maxval 255 or 65535).
// Integer sample v at bit depth d becomes v / (2^d - 1).
Raster load_raster(const std::filesystem::path& path);

// Clamps to [0,1] and quantizes with round-half-away-from-zero of
// v * (2^d - 1). The codec is chosen from the extension (.png or .ppm).
void save_raster(const Raster& img, const std::filesystem::path& path,
                 int bit_depth = 8);

// The integer code save_raster stores for one sample.
unsigned quantize_sample(double v, int bit_depth);

}  // namespace fusekit
