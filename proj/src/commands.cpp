#include "fusekit/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "fusekit/error.hpp"
#include "fusekit/fusion.hpp"
#include "fusekit/image_io.hpp"
#include "fusekit/manifest.hpp"
#include "fusekit/metrics.hpp"
#include "fusekit/ranking.hpp"
#include "fusekit/rng.hpp"
#include "fusekit/synthetic.hpp"

namespace fusekit::cli {

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

// Runs fn(i) for i in [0, n) across threads and returns per-item error text
// (empty on success), indexed like the input so reporting stays ordered.
template <typename Fn>
std::vector<std::string> run_items(std::size_t n, Fn&& fn) {
  std::vector<std::string> errors(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (const std::exception& e) {
      errors[i] = e.what();
      if (errors[i].empty()) errors[i] = "unknown error";
    }
  }
  return errors;
}

std::size_t report_errors(const std::vector<std::string>& errors,
                          const std::vector<std::string>& labels, std::ostream& log) {
  std::size_t failed = 0;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i].empty()) {
      log << "error: " << labels[i] << ": " << errors[i] << '\n';
      ++failed;
    }
  }
  return failed;
}

std::string fixed(double v, int decimals) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string pad_left(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
}

void check_method_name(const std::string& name) {
  if (name.empty() || name.find('/') != std::string::npos || name == "." || name == "..") {
    throw InvalidArgument("invalid method name '" + name + "'");
  }
}

struct StoredWeights {
  std::vector<std::string> method_ids;
  fusion::WeightVector weights;
  std::vector<std::string> tuning_ids;
};

StoredWeights read_weights(const fs::path& path) {
  const json j = read_json_file(path);
  if (!j.is_object() || !j.contains("weights") || !j["weights"].is_array()) {
    throw InvalidArgument(path.string() + ": weights file needs a 'weights' array");
  }
  StoredWeights s;
  try {
    s.weights.weights = j["weights"].get<std::vector<double>>();
    s.weights.target_sum = j.value("target_sum", 1.0);
    if (j.contains("method_ids")) s.method_ids = j["method_ids"].get<std::vector<std::string>>();
    if (j.contains("tuning_ids")) s.tuning_ids = j["tuning_ids"].get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw InvalidArgument(path.string() + ": malformed weights file: " + e.what());
  }
  s.weights.nonnegative = true;
  for (double k : s.weights.weights) s.weights.nonnegative = s.weights.nonnegative && k >= 0.0;
  if (s.method_ids.size() != s.weights.weights.size()) {
    throw InvalidArgument(path.string() + ": 'method_ids' and 'weights' differ in length");
  }
  return s;
}

std::string metric_table(const metrics::MetricReport& r) {
  std::size_t w = 2;
  for (const auto& m : r.per_image) w = std::max(w, m.id.size());
  w = std::max<std::size_t>(w, 4);
  std::ostringstream out;
  out << "id" << std::string(w - 2, ' ') << "      PSNR    SSIM         MSE\n";
  for (const auto& m : r.per_image) {
    out << m.id << std::string(w - m.id.size(), ' ') << pad_left(fixed(m.psnr_db, 4), 10)
        << pad_left(fixed(m.ssim, 4), 8) << pad_left(fixed(m.mse, 8), 12) << '\n';
  }
  out << "mean" << std::string(w - 4, ' ') << pad_left(fixed(r.mean_psnr, 4), 10)
      << pad_left(fixed(r.mean_ssim, 4), 8) << '\n';
  if (r.infinite_count > 0) {
    out << "(" << r.infinite_count << " infinite PSNR value(s) excluded from the mean)\n";
  }
  return out.str();
}

}  // namespace

// ------------------------------------------------------------------ degrade

int cmd_degrade(const DegradeOptions& opt, std::ostream& log) {
  opt.spec.validate();
  if (opt.bit_depth != 8 && opt.bit_depth != 16) throw InvalidArgument("bit depth must be 8 or 16");
  const Manifest in = Manifest::load(opt.manifest, false);
  ensure_dir(opt.out_dir);
  const fs::path out_dir = fs::absolute(opt.out_dir);

  Manifest out = in;
  out.methods.clear();
  const auto errors = run_items(in.pairs.size(), [&](std::size_t i) {
    const ImagePairRecord& rec = in.pairs[i];
    enhance::DegradeSpec spec = opt.spec;
    spec.seed = derive_seed(opt.spec.seed, rec.id);
    const Raster gt = load_raster(rec.gt_path);
    const fs::path dst = out_dir / (rec.id + ".png");
    save_raster(enhance::degrade(gt, spec), dst, opt.bit_depth);
    out.pairs[i].low_path = dst.string();
  });
  const std::size_t failed = report_errors(errors, in.ids(), log);
  out.save(out_dir / "manifest.json");
  log << "degrade: wrote " << (in.pairs.size() - failed) << " of " << in.pairs.size()
      << " images to " << out_dir.string() << '\n';
  return failed == 0 ? 0 : 1;
}

// ------------------------------------------------------------------ enhance

std::vector<NamedEnhancer> enhancers_from_json(const json& j) {
  const json* list = &j;
  if (j.is_object()) {
    const auto it = j.find("enhancers");
    if (it == j.end()) throw InvalidArgument("enhancer config needs an 'enhancers' array");
    list = &*it;
  }
  if (!list->is_array() || list->empty()) {
    throw InvalidArgument("enhancer config must list at least one enhancer");
  }
  std::vector<NamedEnhancer> out;
  for (const auto& e : *list) {
    if (!e.is_object()) throw InvalidArgument("enhancer entries must be objects");
    NamedEnhancer ne;
    ne.name = e.value("name", std::string());
    if (ne.name.empty()) ne.name = e.value("kind", std::string());
    check_method_name(ne.name);
    ne.spec = enhancer_spec_from_json(e);
    if (const auto rg = e.find("random_gamma"); rg != e.end() && !rg->is_null()) {
      RandomGammaRange range;
      if (rg->is_object()) {
        range.lo = rg->value("lo", range.lo);
        range.hi = rg->value("hi", range.hi);
      } else if (!(rg->is_boolean() && rg->get<bool>())) {
        throw InvalidArgument("'random_gamma' must be an object or true");
      }
      if (!(range.lo > 0.0 && range.lo <= range.hi)) {
        throw InvalidArgument("random_gamma range must satisfy 0 < lo <= hi");
      }
      if (!(rg->is_boolean() && !rg->get<bool>())) ne.random_gamma = range;
    }
    for (const auto& prev : out) {
      if (prev.name == ne.name) throw InvalidArgument("duplicate enhancer name '" + ne.name + "'");
    }
    out.push_back(std::move(ne));
  }
  return out;
}

int cmd_enhance(const EnhanceOptions& opt, std::ostream& log) {
  if (opt.enhancers.empty()) throw InvalidArgument("no enhancers given");
  if (opt.bit_depth != 8 && opt.bit_depth != 16) throw InvalidArgument("bit depth must be 8 or 16");
  for (const auto& e : opt.enhancers) {
    check_method_name(e.name);
    e.spec.validate();
  }
  const Manifest in = Manifest::load(opt.manifest, false);
  const fs::path root = fs::absolute(opt.out_root);
  for (const auto& e : opt.enhancers) ensure_dir(root / e.name);

  const std::vector<std::string> ids = in.ids();
  std::vector<Raster> lows(ids.size());
  const auto load_errors = run_items(ids.size(), [&](std::size_t i) {
    lows[i] = load_raster(in.pairs[i].low_path);
  });
  std::size_t failed = report_errors(load_errors, ids, log);

  const std::size_t per = ids.size();
  const std::size_t items = opt.enhancers.size() * per;
  std::vector<double> gammas(items, 0.0);
  std::vector<std::string> labels(items);
  for (std::size_t m = 0; m < opt.enhancers.size(); ++m) {
    for (std::size_t i = 0; i < per; ++i) labels[m * per + i] = opt.enhancers[m].name + "/" + ids[i];
  }
  const auto errors = run_items(items, [&](std::size_t item) {
    const std::size_t i = item % per;
    const NamedEnhancer& e = opt.enhancers[item / per];
    if (!load_errors[i].empty()) throw IoError("input could not be loaded");
    Raster input = lows[i];
    if (e.random_gamma) {
      auto aug = enhance::random_gamma_augment(input, derive_seed(opt.seed, labels[item]),
                                               e.random_gamma->lo, e.random_gamma->hi);
      gammas[item] = aug.gamma;
      input = std::move(aug.image);
    }
    save_raster(enhance::apply_enhancer(e.spec, input), root / e.name / (ids[i] + ".png"),
                opt.bit_depth);
  });
  std::size_t item_failures = 0;
  for (std::size_t item = 0; item < items; ++item) {
    if (!errors[item].empty() && load_errors[item % per].empty()) {
      log << "error: " << labels[item] << ": " << errors[item] << '\n';
      ++item_failures;
    }
  }
  failed += item_failures;

  Manifest out = in;
  for (std::size_t m = 0; m < opt.enhancers.size(); ++m) {
    const NamedEnhancer& e = opt.enhancers[m];
    out.methods[e.name] = root / e.name;
    if (e.random_gamma) {
      json drawn = json::object();
      for (std::size_t i = 0; i < per; ++i) {
        if (errors[m * per + i].empty()) drawn[ids[i]] = gammas[m * per + i];
      }
      const json record = {{"lo", e.random_gamma->lo},
                           {"hi", e.random_gamma->hi},
                           {"seed", opt.seed},
                           {"gamma", drawn}};
      write_text_file(root / e.name / "gamma.json", record.dump(2) + "\n");
    }
  }
  out.save(root / "manifest.json");
  log << "enhance: " << opt.enhancers.size() << " method(s) x " << per << " image(s), "
      << failed << " failure(s); outputs under " << root.string() << '\n';
  return failed == 0 ? 0 : 1;
}

// ----------------------------------------------------------------- optimize

int cmd_optimize(const OptimizeOptions& opt, std::ostream& out, std::ostream& log) {
  opt.config.validate();
  const Manifest manifest = Manifest::load(opt.manifest);
  if (manifest.methods.empty()) throw InvalidArgument("manifest lists no methods to fuse");
  if (manifest.pairs.empty()) throw InvalidArgument("manifest lists no image pairs");

  const ImageSet gts = manifest.load_gts();
  fusion::MethodOutputs outputs;
  std::vector<std::string> method_ids;
  for (const auto& [name, _] : manifest.methods) {
    method_ids.push_back(name);
    outputs[name] = manifest.load_method(name);
  }
  const fusion::FusionProblem problem = fusion::build_problem(method_ids, outputs, gts);
  log << "optimize: " << method_ids.size() << " method(s), " << problem.image_ids.size()
      << " image(s), " << problem.sample_count() << " samples\n";

  json result = {{"optimizer", to_string(opt.config.optimizer)}, {"method_ids", method_ids}};
  fusion::WeightVector weights;
  fusion::GramDiagnostics diagnostics;
  std::optional<fusion::SurfaceTable> surface;
  if (opt.config.optimizer == Optimizer::ClosedForm) {
    const auto solved =
        fusion::solve_weights_closed_form(problem, opt.config.weight_sum, opt.config.ridge);
    weights = solved.weights;
    diagnostics = solved.diagnostics;
  } else {
    const auto searched =
        fusion::grid_search_weights(problem, opt.config.grid_step, opt.config.weight_sum);
    weights = searched.weights;
    diagnostics = fusion::diagnose(problem, weights.weights);
    log << "optimize: sweeping " << searched.evaluated << " grid points for the surface\n";
    surface = fusion::sweep_surface(method_ids, outputs, gts, opt.config.grid_step);
  }

  result["weights"] = weights.weights;
  result["target_sum"] = weights.target_sum;
  result["nonnegative"] = weights.nonnegative;
  result["ridge"] = opt.config.ridge;
  if (opt.config.optimizer == Optimizer::Grid) result["grid_step"] = opt.config.grid_step;
  result["diagnostics"] = to_json(diagnostics);
  result["tuning_ids"] = problem.image_ids;
  if (surface) {
    const auto& best_p = surface->rows[surface->argmax_psnr];
    const auto& best_s = surface->rows[surface->argmax_ssim];
    result["surface"] = {
        {"argmax_psnr", {{"weights", best_p.weights}, {"mean_psnr", number_or_null(best_p.mean_psnr)}}},
        {"argmax_ssim", {{"weights", best_s.weights}, {"mean_ssim", best_s.mean_ssim}}}};
  }

  const std::string text = result.dump(2) + "\n";
  out << text;
  if (opt.out_dir) {
    ensure_dir(*opt.out_dir);
    write_text_file(*opt.out_dir / "weights.json", text);
    if (surface) write_text_file(*opt.out_dir / "surface.csv", fusion::surface_to_csv(*surface));
  } else if (surface) {
    log << "optimize: no --out directory given; surface CSV not written\n";
  }
  return 0;
}

// --------------------------------------------------------------------- fuse

int cmd_fuse(const FuseOptions& opt, std::ostream& log) {
  if (opt.bit_depth != 8 && opt.bit_depth != 16) throw InvalidArgument("bit depth must be 8 or 16");
  const StoredWeights stored = read_weights(opt.weights);
  stored.weights.validate();
  const Manifest manifest = Manifest::load(opt.manifest);
  for (const auto& id : stored.method_ids) {
    if (!manifest.methods.contains(id)) {
      throw InvalidArgument("weights reference method '" + id + "' absent from the manifest");
    }
  }
  ensure_dir(opt.out_dir);
  const std::vector<std::string> ids = manifest.ids();
  const auto errors = run_items(ids.size(), [&](std::size_t i) {
    std::vector<Raster> outputs;
    for (const auto& m : stored.method_ids) {
      outputs.push_back(load_raster(manifest.method_file(m, ids[i])));
    }
    save_raster(fusion::fuse(outputs, stored.weights), opt.out_dir / (ids[i] + ".png"),
                opt.bit_depth);
  });
  const std::size_t failed = report_errors(errors, ids, log);
  log << "fuse: wrote " << (ids.size() - failed) << " of " << ids.size() << " images to "
      << opt.out_dir.string() << '\n';
  return failed == 0 ? 0 : 1;
}

// ----------------------------------------------------------------- evaluate

int cmd_evaluate(const EvaluateOptions& opt, std::ostream& out, std::ostream& log) {
  const Manifest manifest = Manifest::load(opt.manifest, opt.weights.has_value());
  const std::vector<std::string> ids = manifest.ids();
  std::vector<std::string> missing;
  for (const auto& id : ids) {
    if (!fs::exists(opt.candidate_dir / (id + ".png"))) missing.push_back(id);
  }
  if (missing.size() == ids.size()) {
    throw InvalidArgument("candidate directory " + opt.candidate_dir.string() + " covers 0 of " +
                          std::to_string(ids.size()) + " manifest ids");
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& id : missing) list += " " + id;
    throw InvalidArgument("candidate directory " + opt.candidate_dir.string() + " is missing " +
                          std::to_string(missing.size()) + " id(s):" + list);
  }

  const ImageSet gts = manifest.load_gts();
  ImageSet candidates;
  for (const auto& id : ids) candidates.emplace(id, load_raster(opt.candidate_dir / (id + ".png")));
  const metrics::MetricReport report = metrics::evaluate_dataset(candidates, gts);
  json j = to_json(report);

  if (opt.weights) {
    const StoredWeights stored = read_weights(*opt.weights);
    stored.weights.validate();
    fusion::MethodOutputs outputs;
    for (const auto& m : stored.method_ids) outputs[m] = manifest.load_method(m);
    const auto problem = fusion::build_problem(stored.method_ids, outputs, gts);
    const auto diag = fusion::diagnose(problem, stored.weights.weights);
    json per_method = json::object();
    bool dominates = true;
    for (std::size_t i = 0; i < stored.method_ids.size(); ++i) {
      per_method[stored.method_ids[i]] = diag.per_method_mse[i];
      dominates = dominates && diag.fused_mse <= diag.per_method_mse[i];
    }
    std::vector<std::string> sorted_tuning = stored.tuning_ids;
    std::sort(sorted_tuning.begin(), sorted_tuning.end());
    std::vector<std::string> sorted_ids = ids;
    std::sort(sorted_ids.begin(), sorted_ids.end());
    j["pre_clamp"] = {{"fused_mse", diag.fused_mse},
                      {"per_method_mse", per_method},
                      {"fused_not_worse_than_any_method", dominates},
                      {"tuned_on_evaluation_set", sorted_tuning == sorted_ids}};
  }

  const std::string table = metric_table(report);
  if (opt.out_dir) {
    ensure_dir(*opt.out_dir);
    write_text_file(*opt.out_dir / "report.json", j.dump(2) + "\n");
    out << table;
  } else {
    out << j.dump(2) << '\n';
    log << table;
  }
  return 0;
}

// -------------------------------------------------------------------- sweep

int cmd_sweep(const SweepOptions& opt, std::ostream& out, std::ostream& log) {
  fusion::grid_divisions(opt.grid_step);
  const Manifest manifest = Manifest::load(opt.manifest);
  if (manifest.methods.empty()) throw InvalidArgument("manifest lists no methods to sweep");
  const ImageSet gts = manifest.load_gts();
  fusion::MethodOutputs outputs;
  std::vector<std::string> method_ids;
  for (const auto& [name, _] : manifest.methods) {
    method_ids.push_back(name);
    outputs[name] = manifest.load_method(name);
  }
  const auto table = fusion::sweep_surface(method_ids, outputs, gts, opt.grid_step);
  const auto& best_p = table.rows[table.argmax_psnr];
  const auto& best_s = table.rows[table.argmax_ssim];
  const json summary = {
      {"method_ids", method_ids},
      {"grid_step", opt.grid_step},
      {"points", table.rows.size()},
      {"argmax_psnr", {{"weights", best_p.weights}, {"mean_psnr", number_or_null(best_p.mean_psnr)}, {"mean_ssim", best_p.mean_ssim}}},
      {"argmax_ssim", {{"weights", best_s.weights}, {"mean_psnr", number_or_null(best_s.mean_psnr)}, {"mean_ssim", best_s.mean_ssim}}}};
  const std::string csv = fusion::surface_to_csv(table);
  if (opt.out_dir) {
    ensure_dir(*opt.out_dir);
    write_text_file(*opt.out_dir / "surface.csv", csv);
    write_text_file(*opt.out_dir / "sweep.json", summary.dump(2) + "\n");
    out << summary.dump(2) << '\n';
  } else {
    out << csv;
    log << summary.dump(2) << '\n';
  }
  log << "sweep: " << table.rows.size() << " grid points over " << method_ids.size()
      << " method(s)\n";
  return 0;
}

// --------------------------------------------------------------------- rank

int cmd_rank(const RankOptions& opt, std::ostream& out, std::ostream& log) {
  const RankInput input = rank_input_from_json(read_json_file(opt.input));
  const ranking::RankTable table = ranking::build_rank_table(input.entrants, input.metrics);
  const std::string text = ranking::format_rank_table(table);
  const std::string js = to_json(table).dump(2) + "\n";
  out << (opt.json_output ? js : text);
  if (opt.out_dir) {
    ensure_dir(*opt.out_dir);
    write_text_file(*opt.out_dir / "ranks.json", js);
    write_text_file(*opt.out_dir / "ranks.txt", text);
  }
  log << "rank: " << table.rows.size() << " entrant(s), " << table.metrics.size()
      << " metric(s)\n";
  return 0;
}

// -------------------------------------------------------------------- synth

int cmd_synth(const SynthOptions& opt, std::ostream& log) {
  if (opt.count < 1) throw InvalidArgument("synth needs --count >= 1");
  if (opt.size < 1) throw InvalidArgument("synth needs --size >= 1");
  const fs::path root = fs::absolute(opt.out_dir);
  ensure_dir(root / "gt");
  Manifest m;
  for (int i = 0; i < opt.count; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "%04d", i);
    const fs::path path = root / "gt" / (std::string(id) + ".png");
    save_raster(synthetic::scene(opt.size, opt.size, derive_seed(opt.seed, id)), path, 8);
    m.pairs.push_back({id, path.string(), path.string()});
  }
  m.save(root / "manifest.json");
  log << "synth: wrote " << opt.count << " scene(s) to " << (root / "gt").string() << '\n';
  return 0;
}

}  // namespace fusekit::cli
