#pragma once

// Batch pipeline stages behind the `fusekit` subcommands. Each returns the
// process exit status: 0 when every item succeeded, 1 when any per-item
// error occurred (the run still completes the remaining items). Errors that
// stop a stage before any work is done are thrown as fusekit::Error.
//
// Machine-readable results go to files under the output directory or to
// `out`; progress and tables meant for people go to `log`.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fusekit/enhancers.hpp"
#include "fusekit/serialize.hpp"

namespace fusekit::cli {

namespace fs = std::filesystem;

struct DegradeOptions {
  fs::path manifest;
  fs::path out_dir;
  enhance::DegradeSpec spec;  // spec.seed is the run seed
  int bit_depth = 8;
};

// Writes <out>/<id>.png for every pair plus <out>/manifest.json whose low
// paths point at the new files. Each image draws noise from its own stream
// derived from the run seed and the id.
int cmd_degrade(const DegradeOptions& opt, std::ostream& log);

struct RandomGammaRange {
  double lo = enhance::kAugmentGammaLo;
  double hi = enhance::kAugmentGammaHi;
};

struct NamedEnhancer {
  std::string name;
  enhance::EnhancerSpec spec;
  std::optional<RandomGammaRange> random_gamma;  // applied to inputs only
};

// Accepts either a bare list or {"enhancers": [...]}; each entry is
// {"name", "kind", "params"?, "random_gamma"?: {"lo", "hi"}}.
std::vector<NamedEnhancer> enhancers_from_json(const json& j);

struct EnhanceOptions {
  fs::path manifest;
  fs::path out_root;
  std::vector<NamedEnhancer> enhancers;
  std::uint64_t seed = 0;
  int bit_depth = 8;
};

// Writes <out>/<name>/<id>.png per enhancer and <out>/manifest.json with the
// methods added. Random-gamma draws are recorded in <out>/<name>/gamma.json.
int cmd_enhance(const EnhanceOptions& opt, std::ostream& log);

struct OptimizeOptions {
  fs::path manifest;
  std::optional<fs::path> out_dir;
  RunConfig config;
};

// Emits weights JSON (weights, diagnostics, method order, tuning ids) to
// stdout and <out>/weights.json; grid mode also writes <out>/surface.csv.
int cmd_optimize(const OptimizeOptions& opt, std::ostream& out, std::ostream& log);

struct FuseOptions {
  fs::path manifest;
  fs::path weights;
  fs::path out_dir;
  int bit_depth = 8;
};

int cmd_fuse(const FuseOptions& opt, std::ostream& log);

struct EvaluateOptions {
  fs::path manifest;
  fs::path candidate_dir;
  std::optional<fs::path> weights;  // adds pre-clamp fusion diagnostics
  std::optional<fs::path> out_dir;
};

// Report JSON to <out>/report.json (table to `out`) or, without an output
// directory, JSON to `out` and the table to `log`.
int cmd_evaluate(const EvaluateOptions& opt, std::ostream& out, std::ostream& log);

struct SweepOptions {
  fs::path manifest;
  std::optional<fs::path> out_dir;
  double grid_step = 0.02;
};

int cmd_sweep(const SweepOptions& opt, std::ostream& out, std::ostream& log);

struct RankOptions {
  fs::path input;
  bool json_output = false;
  std::optional<fs::path> out_dir;
};

int cmd_rank(const RankOptions& opt, std::ostream& out, std::ostream& log);

struct SynthOptions {
  fs::path out_dir;
  int count = 8;
  int size = 64;
  std::uint64_t seed = 0;
};

// Procedural ground-truth scenes plus a manifest whose low and gt paths
// both point at them (run `degrade` next).
int cmd_synth(const SynthOptions& opt, std::ostream& log);

}  // namespace fusekit::cli
