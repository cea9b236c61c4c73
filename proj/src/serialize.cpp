#include "fusekit/serialize.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "fusekit/error.hpp"

namespace fusekit {

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->template get<T>();
  } catch (const json::exception&) {
    throw InvalidArgument(std::string("JSON field '") + key + "' has the wrong type");
  }
}

void require_object(const json& j, const char* what) {
  if (!j.is_object()) throw InvalidArgument(std::string(what) + " must be a JSON object");
}

}  // namespace

std::string to_string(Optimizer o) { return o == Optimizer::Grid ? "grid" : "closed_form"; }

Optimizer parse_optimizer(const std::string& s) {
  if (s == "closed_form" || s == "closed-form") return Optimizer::ClosedForm;
  if (s == "grid") return Optimizer::Grid;
  throw InvalidArgument("unknown optimizer '" + s + "' (expected closed_form or grid)");
}

void RunConfig::validate() const {
  fusion::grid_divisions(grid_step);
  if (!(weight_sum > 0.0) || !std::isfinite(weight_sum)) {
    throw InvalidArgument("weight_sum must be > 0");
  }
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw InvalidArgument("ridge must be >= 0");
  if (bit_depth != 8 && bit_depth != 16) throw InvalidArgument("bit_depth must be 8 or 16");
}

RunConfig run_config_from_json(const json& j) {
  require_object(j, "run config");
  RunConfig c;
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
  c.weight_sum = get_or<double>(j, "weight_sum", c.weight_sum);
  c.grid_step = get_or<double>(j, "grid_step", c.grid_step);
  c.ridge = get_or<double>(j, "ridge", c.ridge);
  c.optimizer = parse_optimizer(get_or<std::string>(j, "optimizer", to_string(c.optimizer)));
  c.bit_depth = get_or<int>(j, "bit_depth", c.bit_depth);
  c.validate();
  return c;
}

json to_json(const RunConfig& c) {
  return {{"seed", c.seed},           {"weight_sum", c.weight_sum},
          {"grid_step", c.grid_step}, {"ridge", c.ridge},
          {"optimizer", to_string(c.optimizer)}, {"bit_depth", c.bit_depth}};
}

enhance::EnhancerSpec enhancer_spec_from_json(const json& j) {
  require_object(j, "enhancer spec");
  enhance::EnhancerSpec s;
  s.kind = enhance::parse_enhancer_kind(get_or<std::string>(j, "kind", ""));
  if (const auto it = j.find("params"); it != j.end()) {
    require_object(*it, "enhancer params");
    for (const auto& [key, value] : it->items()) {
      if (!value.is_number()) throw InvalidArgument("enhancer param '" + key + "' must be a number");
      s.params[key] = value.get<double>();
    }
  }
  s.validate();
  return s;
}

json to_json(const enhance::EnhancerSpec& s) {
  json params = json::object();
  for (const auto& [k, v] : s.params) params[k] = v;
  return {{"kind", enhance::to_string(s.kind)}, {"params", params}};
}

enhance::DegradeSpec degrade_spec_from_json(const json& j) {
  require_object(j, "degrade spec");
  enhance::DegradeSpec s;
  s.gamma_d = get_or<double>(j, "gamma_d", s.gamma_d);
  s.scale = get_or<double>(j, "scale", s.scale);
  s.noise_sigma = get_or<double>(j, "noise_sigma", s.noise_sigma);
  s.seed = get_or<std::uint64_t>(j, "seed", s.seed);
  s.validate();
  return s;
}

json to_json(const enhance::DegradeSpec& s) {
  return {{"gamma_d", s.gamma_d},
          {"scale", s.scale},
          {"noise_sigma", s.noise_sigma},
          {"seed", s.seed}};
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json to_json(const fusion::WeightVector& w) {
  return {{"weights", w.weights}, {"target_sum", w.target_sum}, {"nonnegative", w.nonnegative}};
}

json to_json(const fusion::GramDiagnostics& d) {
  return {{"correlations", d.correlations},
          {"gram_condition", number_or_null(d.gram_condition)},
          {"residual_norm", d.residual_norm},
          {"fused_mse", d.fused_mse},
          {"per_method_mse", d.per_method_mse}};
}

json to_json(const metrics::MetricReport& r) {
  json rows = json::array();
  for (const auto& m : r.per_image) {
    rows.push_back({{"id", m.id},
                    {"psnr", number_or_null(m.psnr_db)},
                    {"infinite", std::isinf(m.psnr_db)},
                    {"ssim", m.ssim},
                    {"mse", m.mse}});
  }
  return {{"count", r.count},
          {"mean_psnr", number_or_null(r.mean_psnr)},
          {"mean_ssim", r.mean_ssim},
          {"infinite_count", r.infinite_count},
          {"per_image", rows}};
}

json to_json(const ranking::RankTable& t) {
  json metrics = json::array();
  for (const auto& m : t.metrics) {
    metrics.push_back(
        {{"name", m.name}, {"direction", ranking::to_string(m.direction)}, {"weight", m.weight}});
  }
  json rows = json::array();
  for (const auto& row : t.rows) {
    json ranks = json::object();
    for (const auto& m : t.metrics) ranks[m.name] = row.ranks.at(m.name);
    rows.push_back({{"name", row.name}, {"ranks", ranks}, {"total", row.total}});
  }
  return {{"metrics", metrics}, {"rows", rows}};
}

RankInput rank_input_from_json(const json& j) {
  require_object(j, "rank input");
  RankInput in;
  const auto metrics = j.find("metrics");
  const auto entrants = j.find("entrants");
  if (metrics == j.end() || !metrics->is_array()) {
    throw InvalidArgument("rank input needs a 'metrics' array");
  }
  if (entrants == j.end() || !entrants->is_array()) {
    throw InvalidArgument("rank input needs an 'entrants' array");
  }
  for (const auto& m : *metrics) {
    require_object(m, "metric spec");
    ranking::MetricSpec spec;
    spec.name = get_or<std::string>(m, "name", "");
    if (spec.name.empty()) throw InvalidArgument("metric spec without a name");
    spec.direction = ranking::parse_direction(get_or<std::string>(m, "direction", "higher-better"));
    if (!m.contains("weight")) throw InvalidArgument("metric '" + spec.name + "' has no weight");
    spec.weight = get_or<double>(m, "weight", 0.0);
    in.metrics.push_back(spec);
  }
  for (const auto& e : *entrants) {
    require_object(e, "entrant");
    ranking::Entrant entrant;
    entrant.name = get_or<std::string>(e, "name", "");
    if (entrant.name.empty()) throw InvalidArgument("entrant without a name");
    if (const auto it = e.find("values"); it != e.end()) {
      require_object(*it, "entrant values");
      for (const auto& [k, v] : it->items()) {
        if (!v.is_number()) throw InvalidArgument("value for '" + k + "' must be a number");
        entrant.values[k] = v.get<double>();
      }
    }
    if (const auto it = e.find("ranks"); it != e.end()) {
      require_object(*it, "entrant ranks");
      for (const auto& [k, v] : it->items()) {
        if (!v.is_number_integer()) throw InvalidArgument("rank for '" + k + "' must be an integer");
        entrant.ranks[k] = v.get<int>();
      }
    }
    in.entrants.push_back(std::move(entrant));
  }
  return in;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(path.string() + ": invalid JSON: " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace fusekit
