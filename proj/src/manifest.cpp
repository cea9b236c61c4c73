#include "fusekit/manifest.hpp"

#include <set>

#include "fusekit/error.hpp"
#include "fusekit/image_io.hpp"
#include "fusekit/serialize.hpp"

namespace fusekit {

namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return (path.is_absolute() ? path : base / path).lexically_normal();
}

std::string relative_to(const fs::path& p, const fs::path& base) {
  const fs::path rel = fs::absolute(p).lexically_normal().lexically_relative(base);
  return rel.empty() ? p.generic_string() : rel.generic_string();
}

std::string string_field(const json& j, const char* key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw InvalidArgument(where + ": missing string field '" + key + "'");
  }
  return it->get<std::string>();
}

ImageSet load_set(const std::vector<std::string>& ids, auto&& path_of) {
  ImageSet out;
  for (const auto& id : ids) out.emplace(id, load_raster(path_of(id)));
  return out;
}

}  // namespace

Manifest Manifest::load(const fs::path& path, bool check_methods) {
  const json j = read_json_file(path);
  const std::string where = path.string();
  if (!j.is_object()) throw InvalidArgument(where + ": manifest must be a JSON object");
  const auto version = j.find("version");
  if (version == j.end() || !version->is_number_integer() || version->get<int>() != kVersion) {
    throw InvalidArgument(where + ": unsupported manifest version (expected " +
                          std::to_string(kVersion) + ")");
  }
  const fs::path base = fs::absolute(path).parent_path();

  Manifest m;
  const auto pairs = j.find("pairs");
  if (pairs == j.end() || !pairs->is_array()) {
    throw InvalidArgument(where + ": manifest needs a 'pairs' array");
  }
  std::set<std::string> seen;
  for (const auto& p : *pairs) {
    if (!p.is_object()) throw InvalidArgument(where + ": pair entries must be objects");
    ImagePairRecord rec;
    rec.id = string_field(p, "id", where);
    if (rec.id.empty() || rec.id.find('/') != std::string::npos) {
      throw InvalidArgument(where + ": invalid pair id '" + rec.id + "'");
    }
    if (!seen.insert(rec.id).second) {
      throw InvalidArgument(where + ": duplicate pair id '" + rec.id + "'");
    }
    rec.low_path = resolve(base, string_field(p, "low", where)).string();
    rec.gt_path = resolve(base, string_field(p, "gt", where)).string();
    m.pairs.push_back(std::move(rec));
  }

  if (const auto methods = j.find("methods"); methods != j.end() && !methods->is_null()) {
    if (!methods->is_object()) throw InvalidArgument(where + ": 'methods' must be an object");
    for (const auto& [name, dir] : methods->items()) {
      if (!dir.is_string()) throw InvalidArgument(where + ": method '" + name + "' needs a path");
      m.methods[name] = resolve(base, dir.get<std::string>());
    }
  }

  if (check_methods) {
    std::string missing;
    std::size_t missing_count = 0;
    for (const auto& [name, _] : m.methods) {
      for (const auto& rec : m.pairs) {
        const fs::path f = m.method_file(name, rec.id);
        if (!fs::exists(f)) {
          if (++missing_count <= 10) missing += "\n  " + f.string();
        }
      }
    }
    if (missing_count > 0) {
      throw InvalidArgument(where + ": " + std::to_string(missing_count) +
                            " method output file(s) missing:" + missing);
    }
  }
  return m;
}

void Manifest::save(const fs::path& path) const {
  const fs::path base = fs::absolute(path).parent_path().lexically_normal();
  json pairs_json = json::array();
  for (const auto& rec : pairs) {
    pairs_json.push_back({{"id", rec.id},
                          {"low", relative_to(rec.low_path, base)},
                          {"gt", relative_to(rec.gt_path, base)}});
  }
  json methods_json = json::object();
  for (const auto& [name, dir] : methods) methods_json[name] = relative_to(dir, base);
  const json j = {{"version", kVersion}, {"pairs", pairs_json}, {"methods", methods_json}};
  write_text_file(path, j.dump(2) + "\n");
}

fs::path Manifest::method_file(const std::string& method, const std::string& id) const {
  const auto it = methods.find(method);
  if (it == methods.end()) throw InvalidArgument("manifest has no method '" + method + "'");
  return it->second / (id + ".png");
}

std::vector<std::string> Manifest::ids() const {
  std::vector<std::string> out;
  for (const auto& rec : pairs) out.push_back(rec.id);
  return out;
}

ImageSet Manifest::load_lows() const {
  ImageSet out;
  for (const auto& rec : pairs) out.emplace(rec.id, load_raster(rec.low_path));
  return out;
}

ImageSet Manifest::load_gts() const {
  ImageSet out;
  for (const auto& rec : pairs) out.emplace(rec.id, load_raster(rec.gt_path));
  return out;
}

ImageSet Manifest::load_method(const std::string& method) const {
  return load_set(ids(), [&](const std::string& id) { return method_file(method, id); });
}

}  // namespace fusekit
