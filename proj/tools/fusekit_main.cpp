// fusekit: batch pipeline for multi-method linear fusion of low-light
// enhancement outputs.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "fusekit/commands.hpp"
#include "fusekit/error.hpp"
#include "fusekit/serialize.hpp"

namespace {

using namespace fusekit;

// Values for --config: the file is read first, explicit flags override it.
struct RunFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> weight_sum;
  std::optional<double> grid_step;
  std::optional<double> ridge;
  std::optional<std::string> optimizer;
  std::optional<int> bit_depth;
  bool nonnegative = false;

  RunConfig resolve() const {
    RunConfig c = config.empty() ? RunConfig{} : run_config_from_json(read_json_file(config));
    if (seed) c.seed = *seed;
    if (weight_sum) c.weight_sum = *weight_sum;
    if (grid_step) c.grid_step = *grid_step;
    if (ridge) c.ridge = *ridge;
    if (optimizer) c.optimizer = parse_optimizer(*optimizer);
    if (bit_depth) c.bit_depth = *bit_depth;
    if (nonnegative) c.optimizer = Optimizer::Grid;
    c.validate();
    return c;
  }
};

void add_config_flag(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config, "JSON RunConfig {seed, weight_sum, grid_step, ridge, "
                                        "optimizer, bit_depth}; flags override it")
      ->check(CLI::ExistingFile);
}

void add_seed_flag(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--seed", f.seed, "Seed for every random draw (default 0)");
}

void add_bit_depth_flag(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--bit-depth", f.bit_depth, "Output PNG bit depth, 8 or 16 (default 8)")
      ->check(CLI::IsMember({8, 16}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fusekit - linear fusion of low-light enhancement outputs"};
  app.require_subcommand(1);

  std::string manifest;
  std::string out;
  RunFlags flags;

  // degrade
  auto* degrade = app.add_subcommand("degrade", "Synthesize low-light inputs from ground truth");
  enhance::DegradeSpec dspec;
  std::string degrade_spec_path;
  std::optional<double> gamma_d, scale, noise_sigma;
  degrade->add_option("--manifest", manifest, "Input manifest (gt paths are read)")->required();
  degrade->add_option("--out", out, "Output directory for <id>.png and manifest.json")->required();
  add_seed_flag(degrade, flags);
  add_config_flag(degrade, flags);
  add_bit_depth_flag(degrade, flags);
  degrade->add_option("--degrade-spec", degrade_spec_path,
                      "JSON DegradeSpec {gamma_d, scale, noise_sigma, seed}")
      ->check(CLI::ExistingFile);
  degrade->add_option("--gamma-d", gamma_d, "Darkening exponent >= 1 (default 2)");
  degrade->add_option("--scale", scale, "Brightness factor in (0,1] (default 0.5)");
  degrade->add_option("--noise-sigma", noise_sigma, "Gaussian noise std >= 0 (default 0)");

  // enhance
  auto* enhance_cmd = app.add_subcommand("enhance", "Run stand-in enhancers on the low inputs");
  std::string enhancers_path;
  enhance_cmd->add_option("--manifest", manifest, "Input manifest (low paths are read)")->required();
  enhance_cmd->add_option("--out", out, "Output root; one directory per enhancer")->required();
  enhance_cmd->add_option("--enhancers", enhancers_path,
                          "JSON list of {name, kind, params, random_gamma?: {lo, hi}}")
      ->required()
      ->check(CLI::ExistingFile);
  add_seed_flag(enhance_cmd, flags);
  add_config_flag(enhance_cmd, flags);
  add_bit_depth_flag(enhance_cmd, flags);

  // optimize
  auto* optimize = app.add_subcommand("optimize", "Find fusion weights for the manifest methods");
  optimize->add_option("--manifest", manifest, "Tuning-set manifest with methods")->required();
  optimize->add_option("--out", out, "Directory for weights.json (and surface.csv in grid mode)");
  add_config_flag(optimize, flags);
  add_seed_flag(optimize, flags);
  optimize->add_option("--optimizer", flags.optimizer, "closed_form (default) or grid")
      ->check(CLI::IsMember({"closed_form", "grid"}));
  optimize->add_option("--weight-sum", flags.weight_sum, "Required sum of the weights (default 1)");
  optimize->add_option("--ridge", flags.ridge,
                       "Tikhonov term added to the normalized Gram matrix (default 0)");
  optimize->add_option("--grid-step", flags.grid_step, "Simplex grid step (default 0.02)");
  optimize->add_flag("--nonnegative", flags.nonnegative, "Restrict to nonnegative weights (grid)");

  // fuse
  auto* fuse = app.add_subcommand("fuse", "Write weighted sums of the method outputs");
  std::string weights_path;
  fuse->add_option("--manifest", manifest, "Manifest with methods")->required();
  fuse->add_option("--weights", weights_path, "weights.json from optimize")
      ->required()
      ->check(CLI::ExistingFile);
  fuse->add_option("--out", out, "Output directory for fused <id>.png")->required();
  add_config_flag(fuse, flags);
  add_seed_flag(fuse, flags);
  add_bit_depth_flag(fuse, flags);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "PSNR/SSIM of a candidate directory vs gt");
  std::string candidate;
  std::string eval_weights;
  evaluate->add_option("--manifest", manifest, "Manifest whose gt paths are the references")
      ->required();
  evaluate->add_option("--candidate", candidate, "Directory holding <id>.png for every pair")
      ->required();
  evaluate->add_option("--weights", eval_weights,
                       "weights.json; adds pre-clamp fused vs per-method MSE to the report")
      ->check(CLI::ExistingFile);
  evaluate->add_option("--out", out, "Directory for report.json (table then goes to stdout)");
  add_config_flag(evaluate, flags);
  add_seed_flag(evaluate, flags);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Mean PSNR/SSIM over the weight simplex grid");
  sweep->add_option("--manifest", manifest, "Manifest with methods")->required();
  sweep->add_option("--out", out, "Directory for surface.csv and sweep.json");
  sweep->add_option("--grid-step", flags.grid_step, "Simplex grid step (default 0.02)");
  add_config_flag(sweep, flags);
  add_seed_flag(sweep, flags);

  // rank
  auto* rank = app.add_subcommand("rank", "Weighted-rank aggregation of challenge entrants");
  std::string rank_input;
  bool rank_json = false;
  rank->add_option("--input", rank_input, "JSON {metrics: [...], entrants: [...]}")
      ->required()
      ->check(CLI::ExistingFile);
  rank->add_flag("--json", rank_json, "Print JSON instead of the text table");
  rank->add_option("--out", out, "Directory for ranks.json and ranks.txt");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate procedural ground-truth scenes");
  cli::SynthOptions synth_opt;
  synth->add_option("--out", out, "Output directory")->required();
  synth->add_option("--count", synth_opt.count, "Number of scenes (default 8)");
  synth->add_option("--size", synth_opt.size, "Square scene size in pixels (default 64)");
  add_seed_flag(synth, flags);

  CLI11_PARSE(app, argc, argv);

  try {
    const auto opt_out = [&]() -> std::optional<std::filesystem::path> {
      if (out.empty()) return std::nullopt;
      return std::filesystem::path(out);
    };
    if (degrade->parsed()) {
      const RunConfig cfg = flags.resolve();
      cli::DegradeOptions opt;
      opt.manifest = manifest;
      opt.out_dir = out;
      if (!degrade_spec_path.empty()) opt.spec = degrade_spec_from_json(read_json_file(degrade_spec_path));
      if (gamma_d) opt.spec.gamma_d = *gamma_d;
      if (scale) opt.spec.scale = *scale;
      if (noise_sigma) opt.spec.noise_sigma = *noise_sigma;
      if (flags.seed || degrade_spec_path.empty()) opt.spec.seed = cfg.seed;
      opt.bit_depth = cfg.bit_depth;
      return cli::cmd_degrade(opt, std::cerr);
    }
    if (enhance_cmd->parsed()) {
      const RunConfig cfg = flags.resolve();
      cli::EnhanceOptions opt;
      opt.manifest = manifest;
      opt.out_root = out;
      opt.enhancers = cli::enhancers_from_json(read_json_file(enhancers_path));
      opt.seed = cfg.seed;
      opt.bit_depth = cfg.bit_depth;
      return cli::cmd_enhance(opt, std::cerr);
    }
    if (optimize->parsed()) {
      cli::OptimizeOptions opt;
      opt.manifest = manifest;
      opt.out_dir = opt_out();
      opt.config = flags.resolve();
      return cli::cmd_optimize(opt, std::cout, std::cerr);
    }
    if (fuse->parsed()) {
      cli::FuseOptions opt;
      opt.manifest = manifest;
      opt.weights = weights_path;
      opt.out_dir = out;
      opt.bit_depth = flags.resolve().bit_depth;
      return cli::cmd_fuse(opt, std::cerr);
    }
    if (evaluate->parsed()) {
      flags.resolve();
      cli::EvaluateOptions opt;
      opt.manifest = manifest;
      opt.candidate_dir = candidate;
      if (!eval_weights.empty()) opt.weights = std::filesystem::path(eval_weights);
      opt.out_dir = opt_out();
      return cli::cmd_evaluate(opt, std::cout, std::cerr);
    }
    if (sweep->parsed()) {
      cli::SweepOptions opt;
      opt.manifest = manifest;
      opt.out_dir = opt_out();
      opt.grid_step = flags.resolve().grid_step;
      return cli::cmd_sweep(opt, std::cout, std::cerr);
    }
    if (rank->parsed()) {
      cli::RankOptions opt;
      opt.input = rank_input;
      opt.json_output = rank_json;
      opt.out_dir = opt_out();
      return cli::cmd_rank(opt, std::cout, std::cerr);
    }
    if (synth->parsed()) {
      synth_opt.out_dir = out;
      synth_opt.seed = flags.resolve().seed;
      return cli::cmd_synth(synth_opt, std::cerr);
    }
  } catch (const fusekit::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
