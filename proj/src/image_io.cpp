#include "fusekit/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "fusekit/error.hpp"

namespace fusekit {

namespace fs = std::filesystem;

namespace {

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

std::vector<unsigned char> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for " + path.string());
  return bytes;
}

void write_file(const fs::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

// Decoded integer samples before scaling. Lives outside the setjmp frames so
// its destructor always runs.
struct IntImage {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  int bit_depth = 8;
  std::vector<unsigned char> rows;  // packed RGB, big-endian for 16-bit
};

Raster to_raster(const IntImage& img) {
  const double scale = img.bit_depth == 16 ? 65535.0 : 255.0;
  const std::size_t count = static_cast<std::size_t>(img.width) * img.height * 3;
  std::vector<double> samples(count);
  if (img.bit_depth == 16) {
    for (std::size_t i = 0; i < count; ++i) {
      const unsigned v = (static_cast<unsigned>(img.rows[2 * i]) << 8) | img.rows[2 * i + 1];
      samples[i] = v / scale;
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) samples[i] = img.rows[i] / scale;
  }
  return Raster(static_cast<int>(img.width), static_cast<int>(img.height), std::move(samples));
}

IntImage from_raster(const Raster& img, int bit_depth) {
  IntImage out;
  out.width = static_cast<std::uint32_t>(img.width());
  out.height = static_cast<std::uint32_t>(img.height());
  out.bit_depth = bit_depth;
  const auto samples = img.samples();
  const std::size_t bytes_per = bit_depth == 16 ? 2 : 1;
  out.rows.resize(samples.size() * bytes_per);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const unsigned q = quantize_sample(samples[i], bit_depth);
    if (bit_depth == 16) {
      out.rows[2 * i] = static_cast<unsigned char>(q >> 8);
      out.rows[2 * i + 1] = static_cast<unsigned char>(q & 0xFF);
    } else {
      out.rows[i] = static_cast<unsigned char>(q);
    }
  }
  return out;
}

// ---------------------------------------------------------------- PNG

struct PngMemoryReader {
  const std::vector<unsigned char>* bytes;
  std::size_t offset;
};

struct PngErrorState {
  char message[256];
};

extern "C" void png_read_from_memory(png_structp png, png_bytep out, png_size_t length) {
  auto* src = static_cast<PngMemoryReader*>(png_get_io_ptr(png));
  if (src->offset + length > src->bytes->size()) png_error(png, "unexpected end of PNG data");
  std::memcpy(out, src->bytes->data() + src->offset, length);
  src->offset += length;
}

extern "C" void png_write_to_memory(png_structp png, png_bytep data, png_size_t length) {
  auto* dst = static_cast<std::vector<unsigned char>*>(png_get_io_ptr(png));
  dst->insert(dst->end(), data, data + length);
}

extern "C" void png_flush_noop(png_structp) {}

extern "C" void png_error_handler(png_structp png, png_const_charp msg) {
  auto* state = static_cast<PngErrorState*>(png_get_error_ptr(png));
  std::snprintf(state->message, sizeof state->message, "%s", msg);
  png_longjmp(png, 1);
}

extern "C" void png_warning_handler(png_structp, png_const_charp) {}

// Returns an empty string on success, otherwise the reason.
std::string decode_png(const std::vector<unsigned char>& bytes, IntImage& out) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) return "not a PNG file";
  PngErrorState err{};
  PngMemoryReader reader{&bytes, 0};
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_error_handler,
                                           png_warning_handler);
  if (png == nullptr) return "png_create_read_struct failed";
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return "png_create_info_struct failed";
  }
  // Only trivially destructible locals may be created between here and the
  // last libpng call.
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return err.message[0] != '\0' ? err.message : "corrupt PNG";
  }
  png_set_read_fn(png, &reader, png_read_from_memory);
  png_read_info(png, info);
  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int color_type = png_get_color_type(png, info);
  int bit_depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) {
    if (png_get_valid(png, info, PNG_INFO_tRNS)) {
      png_destroy_read_struct(&png, &info, nullptr);
      return "palette PNG with transparency has 4 channels; expected 3";
    }
    png_set_palette_to_rgb(png);
    bit_depth = 8;
  } else if (color_type != PNG_COLOR_TYPE_RGB) {
    const int channels = png_get_channels(png, info);
    png_destroy_read_struct(&png, &info, nullptr);
    std::snprintf(err.message, sizeof err.message,
                  "PNG has %d channel(s); only 3-channel RGB is supported", channels);
    return err.message;
  }
  if (bit_depth != 8 && bit_depth != 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    return "unsupported PNG bit depth";
  }
  png_read_update_info(png, info);
  const png_size_t rowbytes = png_get_rowbytes(png, info);
  const std::size_t expected = static_cast<std::size_t>(width) * 3 * (bit_depth / 8);
  if (rowbytes != expected) {
    png_destroy_read_struct(&png, &info, nullptr);
    return "unexpected PNG row layout";
  }
  out.width = width;
  out.height = height;
  out.bit_depth = bit_depth;
  out.rows.resize(rowbytes * height);
  for (png_uint_32 y = 0; y < height; ++y) {
    png_read_row(png, out.rows.data() + rowbytes * y, nullptr);
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return {};
}

std::string encode_png(const IntImage& img, std::vector<unsigned char>& out) {
  PngErrorState err{};
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_error_handler,
                                            png_warning_handler);
  if (png == nullptr) return "png_create_write_struct failed";
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    return "png_create_info_struct failed";
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return err.message[0] != '\0' ? err.message : "PNG encode failed";
  }
  png_set_write_fn(png, &out, png_write_to_memory, png_flush_noop);
  png_set_IHDR(png, info, img.width, img.height, img.bit_depth, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t rowbytes = static_cast<std::size_t>(img.width) * 3 * (img.bit_depth / 8);
  for (std::uint32_t y = 0; y < img.height; ++y) {
    png_write_row(png, img.rows.data() + rowbytes * y);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return {};
}

// ---------------------------------------------------------------- PPM

class PpmHeaderReader {
 public:
  explicit PpmHeaderReader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

  unsigned long next_number(const char* field) {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      throw FormatError(std::string("corrupt PPM header: missing ") + field);
    }
    unsigned long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > 0xFFFFFFul) throw FormatError(std::string("corrupt PPM header: ") + field);
      ++pos_;
    }
    return v;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t data_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw FormatError("corrupt PPM header: no separator before raster");
    }
    return pos_ + 1;
  }

  std::size_t pos_ = 2;

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<unsigned char>& bytes_;
};

IntImage decode_ppm(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P') throw FormatError("not a PNM file");
  if (bytes[1] != '6') {
    throw FormatError(std::string("unsupported PNM variant P") + static_cast<char>(bytes[1]) +
                      "; only binary RGB (P6) is supported");
  }
  PpmHeaderReader header(bytes);
  const unsigned long width = header.next_number("width");
  const unsigned long height = header.next_number("height");
  const unsigned long maxval = header.next_number("maxval");
  if (width == 0 || height == 0) throw FormatError("corrupt PPM header: zero dimension");
  if (maxval != 255 && maxval != 65535) {
    throw FormatError("unsupported PPM maxval " + std::to_string(maxval) +
                      "; expected 255 or 65535");
  }
  const std::size_t offset = header.data_offset();
  IntImage img;
  img.width = static_cast<std::uint32_t>(width);
  img.height = static_cast<std::uint32_t>(height);
  img.bit_depth = maxval == 65535 ? 16 : 8;
  const std::size_t need = static_cast<std::size_t>(width) * height * 3 * (img.bit_depth / 8);
  if (bytes.size() - offset < need) throw FormatError("truncated PPM raster");
  img.rows.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset),
                  bytes.begin() + static_cast<std::ptrdiff_t>(offset + need));
  return img;
}

std::vector<unsigned char> encode_ppm(const IntImage& img) {
  const std::string header = "P6\n" + std::to_string(img.width) + " " +
                             std::to_string(img.height) + "\n" +
                             (img.bit_depth == 16 ? "65535" : "255") + "\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  out.insert(out.end(), img.rows.begin(), img.rows.end());
  return out;
}

}  // namespace

unsigned quantize_sample(double v, int bit_depth) {
  const double full = bit_depth == 16 ? 65535.0 : 255.0;
  const double c = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
  return static_cast<unsigned>(std::round(c * full));
}

Raster load_raster(const fs::path& path) {
  const std::string ext = lower_extension(path);
  if (ext != ".png" && ext != ".ppm") {
    throw FormatError("unsupported image extension '" + ext + "' for " + path.string());
  }
  const std::vector<unsigned char> bytes = read_file(path);
  try {
    if (ext == ".png") {
      IntImage img;
      const std::string err = decode_png(bytes, img);
      if (!err.empty()) throw FormatError(err);
      return to_raster(img);
    }
    return to_raster(decode_ppm(bytes));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_raster(const Raster& img, const fs::path& path, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) {
    throw InvalidArgument("bit depth must be 8 or 16, got " + std::to_string(bit_depth));
  }
  if (img.empty()) throw DimensionError("cannot save an empty raster");
  const std::string ext = lower_extension(path);
  const IntImage packed = from_raster(img, bit_depth);
  if (ext == ".png") {
    std::vector<unsigned char> bytes;
    const std::string err = encode_png(packed, bytes);
    if (!err.empty()) throw IoError(path.string() + ": " + err);
    write_file(path, bytes);
  } else if (ext == ".ppm") {
    write_file(path, encode_ppm(packed));
  } else {
    throw FormatError("unsupported image extension '" + ext + "' for " + path.string());
  }
}

}  // namespace fusekit
