#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fusekit/raster.hpp"

namespace fusekit {

// Dataset description shared by every CLI stage.
//
//   {"version": 1,
//    "pairs":   [{"id": "0001", "low": "low/0001.png", "gt": "gt/0001.png"}],
//    "methods": {"gamma": "enhanced/gamma"}}
//
// Relative paths are resolved against the manifest's directory. A method
// directory holds one `<id>.png` per pair.
struct Manifest {
  static constexpr int kVersion = 1;

  std::vector<ImagePairRecord> pairs;                 // absolute paths
  std::map<std::string, std::filesystem::path> methods;  // absolute dirs

  // Parses and validates: version tag, unique ids, and (unless
  // check_methods is false) an output file for every id in every method.
  static Manifest load(const std::filesystem::path& path, bool check_methods = true);

  // Paths are written relative to the manifest's own directory.
  void save(const std::filesystem::path& path) const;

  std::filesystem::path method_file(const std::string& method, const std::string& id) const;
  std::vector<std::string> ids() const;

  ImageSet load_lows() const;
  ImageSet load_gts() const;
  ImageSet load_method(const std::string& method) const;
};

}  // namespace fusekit
