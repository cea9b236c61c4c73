#include <gtest/gtest.h>

#include <fstream>
#include <iterator>
#include <sstream>

#include "fusekit/commands.hpp"
#include "fusekit/error.hpp"
#include "fusekit/image_io.hpp"
#include "fusekit/manifest.hpp"
#include "fusekit/metrics.hpp"
#include "test_util.hpp"

namespace fusekit::cli {
namespace {

using testing::TempDir;

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<NamedEnhancer> three_enhancers(bool random_gamma) {
  std::vector<NamedEnhancer> e{
      {"gamma", {enhance::EnhancerKind::Gamma, {{"exponent", 0.5}}}, std::nullopt},
      {"hist_equalize", {enhance::EnhancerKind::HistEqualize, {}}, std::nullopt},
      {"log_retinex", {enhance::EnhancerKind::LogRetinex, {{"blur_sigma", 6.0}}}, std::nullopt},
  };
  if (random_gamma) {
    for (auto& x : e) x.random_gamma = RandomGammaRange{};
  }
  return e;
}

// synth -> degrade; returns the degraded manifest.
fs::path make_dataset(const TempDir& dir, int count, std::uint64_t seed = 7) {
  std::ostringstream log;
  EXPECT_EQ(cmd_synth({dir / "synth", count, 32, seed}, log), 0);
  DegradeOptions d;
  d.manifest = dir / "synth/manifest.json";
  d.out_dir = dir / "low";
  d.spec.gamma_d = 2.0;
  d.spec.scale = 0.5;
  d.spec.noise_sigma = 0.01;
  d.spec.seed = seed;
  EXPECT_EQ(cmd_degrade(d, log), 0);
  return dir / "low/manifest.json";
}

fs::path enhance_dataset(const TempDir& dir, const fs::path& manifest, const std::string& sub,
                         std::uint64_t seed = 3) {
  std::ostringstream log;
  EnhanceOptions e{manifest, dir / sub, three_enhancers(true), seed, 8};
  EXPECT_EQ(cmd_enhance(e, log), 0) << log.str();
  return dir / sub / "manifest.json";
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

TEST(Cli, DegradeIsDeterministic) {
  TempDir dir("cli_degrade");
  const fs::path m = make_dataset(dir, 4);
  const Manifest man = Manifest::load(m);
  ASSERT_EQ(man.pairs.size(), 4u);
  std::ostringstream log;
  DegradeOptions again{dir / "synth/manifest.json", dir / "low2", {}, 8};
  again.spec.noise_sigma = 0.01;
  again.spec.seed = 7;
  ASSERT_EQ(cmd_degrade(again, log), 0);
  for (const auto& id : man.ids()) {
    EXPECT_EQ(read_bytes(dir / "low" / (id + ".png")), read_bytes(dir / "low2" / (id + ".png")));
  }
  again.out_dir = dir / "low3";
  again.spec.seed = 8;
  ASSERT_EQ(cmd_degrade(again, log), 0);
  EXPECT_NE(read_bytes(dir / "low" / (man.ids()[0] + ".png")),
            read_bytes(dir / "low3" / (man.ids()[0] + ".png")));
}

TEST(Cli, IdentityDegradeReproducesGroundTruth) {
  TempDir dir("cli_identity");
  std::ostringstream log;
  ASSERT_EQ(cmd_synth({dir / "synth", 2, 16, 1}, log), 0);
  DegradeOptions d{dir / "synth/manifest.json", dir / "low", {}, 8};
  d.spec.gamma_d = 1.0;
  d.spec.scale = 1.0;
  ASSERT_EQ(cmd_degrade(d, log), 0);
  const Manifest man = Manifest::load(dir / "low/manifest.json");
  for (const auto& p : man.pairs) EXPECT_EQ(load_raster(p.low_path), load_raster(p.gt_path));
}

TEST(Cli, EnhanceWithRandomGammaIsDeterministic) {
  TempDir dir("cli_enhance");
  const fs::path m = make_dataset(dir, 5);
  enhance_dataset(dir, m, "run1");
  const fs::path m2 = enhance_dataset(dir, m, "run2");
  const Manifest man = Manifest::load(m2);
  ASSERT_EQ(man.methods.size(), 3u);
  int files = 0;
  for (const auto& [name, _] : man.methods) {
    for (const auto& id : man.ids()) {
      EXPECT_EQ(read_bytes(dir / "run1" / name / (id + ".png")),
                read_bytes(dir / "run2" / name / (id + ".png")));
      ++files;
    }
    const json g = read_json_file(dir / "run1" / name / "gamma.json");
    EXPECT_EQ(g, read_json_file(dir / "run2" / name / "gamma.json"));
    for (const auto& [id, v] : g["gamma"].items()) {
      EXPECT_GE(v.get<double>(), 0.6);
      EXPECT_LE(v.get<double>(), 1.2);
    }
  }
  EXPECT_EQ(files, 15);
}

TEST(Cli, EnhanceReportsPerItemFailures) {
  TempDir dir("cli_flat");
  save_raster(Raster(8, 8, 0.3), dir / "flat.png");
  save_raster(Raster(8, 8, 0.3), dir / "gt.png");
  write_file(dir / "manifest.json",
             R"({"version": 1, "pairs": [{"id": "a", "low": "flat.png", "gt": "gt.png"}]})");
  std::ostringstream log;
  EnhanceOptions e{dir / "manifest.json", dir / "out",
                   {{"stretch", {enhance::EnhancerKind::LinearStretch, {}}, std::nullopt}}, 0, 8};
  EXPECT_EQ(cmd_enhance(e, log), 1);
  EXPECT_NE(log.str().find("stretch/a"), std::string::npos);
}

TEST(Cli, OptimizeFuseEvaluate) {
  TempDir dir("cli_pipeline");
  const fs::path m = enhance_dataset(dir, make_dataset(dir, 4), "enh");
  std::ostringstream out, log;
  OptimizeOptions o{m, dir / "opt", {}};
  ASSERT_EQ(cmd_optimize(o, out, log), 0);
  const json w = read_json_file(dir / "opt/weights.json");
  EXPECT_EQ(w["method_ids"].size(), 3u);
  double sum = 0.0;
  for (double k : w["weights"].get<std::vector<double>>()) sum += k;
  EXPECT_NEAR(sum, 1.0, 1e-9);

  ASSERT_EQ(cmd_fuse({m, dir / "opt/weights.json", dir / "fused", 8}, log), 0);
  std::ostringstream eval_out;
  ASSERT_EQ(cmd_evaluate({m, dir / "fused", dir / "opt/weights.json", dir / "eval"}, eval_out, log), 0);
  const json report = read_json_file(dir / "eval/report.json");
  EXPECT_TRUE(report["pre_clamp"]["fused_not_worse_than_any_method"].get<bool>());
  EXPECT_TRUE(report["pre_clamp"]["tuned_on_evaluation_set"].get<bool>());
  EXPECT_EQ(report["count"].get<int>(), 4);
}

TEST(Cli, OneHotFuseReproducesMethod) {
  TempDir dir("cli_onehot");
  const fs::path m = enhance_dataset(dir, make_dataset(dir, 3), "enh");
  write_file(dir / "w.json",
             R"({"method_ids": ["gamma", "hist_equalize", "log_retinex"], "weights": [0, 1, 0]})");
  std::ostringstream log;
  ASSERT_EQ(cmd_fuse({m, dir / "w.json", dir / "fused", 8}, log), 0);
  const Manifest man = Manifest::load(m);
  for (const auto& id : man.ids()) {
    EXPECT_EQ(load_raster(dir / "fused" / (id + ".png")),
              load_raster(man.method_file("hist_equalize", id)));
  }
}

TEST(Cli, FuseRejectsBadWeightSumBeforeIo) {
  TempDir dir("cli_badsum");
  const fs::path m = enhance_dataset(dir, make_dataset(dir, 2), "enh");
  write_file(dir / "w.json",
             R"({"method_ids": ["gamma", "hist_equalize", "log_retinex"], "weights": [0.3, 0.3, 0.3]})");
  std::ostringstream log;
  EXPECT_THROW(cmd_fuse({m, dir / "w.json", dir / "fused", 8}, log), ConstraintError);
  EXPECT_FALSE(fs::exists(dir / "fused"));
}

TEST(Cli, SingleMethodGetsFullWeight) {
  TempDir dir("cli_single");
  const fs::path m = make_dataset(dir, 2);
  std::ostringstream out, log;
  EnhanceOptions e{m, dir / "enh", {three_enhancers(false)[0]}, 0, 8};
  ASSERT_EQ(cmd_enhance(e, log), 0);
  ASSERT_EQ(cmd_optimize({dir / "enh/manifest.json", std::nullopt, {}}, out, log), 0);
  const json w = json::parse(out.str());
  EXPECT_EQ(w["weights"], json::array({1.0}));
}

TEST(Cli, DuplicatedMethodSuggestsRidge) {
  TempDir dir("cli_dup");
  const fs::path m = make_dataset(dir, 2);
  std::ostringstream out, log;
  auto gamma = three_enhancers(false)[0];
  auto twin = gamma;
  twin.name = "gamma_twin";
  ASSERT_EQ(cmd_enhance({m, dir / "enh", {gamma, twin}, 0, 8}, log), 0);
  try {
    cmd_optimize({dir / "enh/manifest.json", std::nullopt, {}}, out, log);
    FAIL() << "expected a singular system";
  } catch (const SingularSystemError& e) {
    EXPECT_NE(std::string(e.what()).find("--ridge"), std::string::npos);
  }
  RunConfig ridged;
  ridged.ridge = 1e-4;
  std::ostringstream out2;
  ASSERT_EQ(cmd_optimize({dir / "enh/manifest.json", std::nullopt, ridged}, out2, log), 0);
  const auto k = json::parse(out2.str())["weights"].get<std::vector<double>>();
  EXPECT_NEAR(k[0], 0.5, 1e-9);
  EXPECT_NEAR(k[1], 0.5, 1e-9);
}

TEST(Cli, EvaluateGroundTruthAndCoverage) {
  TempDir dir("cli_eval");
  const fs::path m = make_dataset(dir, 3);
  std::ostringstream out, log;
  ASSERT_EQ(cmd_evaluate({m, dir / "synth/gt", std::nullopt, std::nullopt}, out, log), 0);
  const json r = json::parse(out.str());
  EXPECT_EQ(r["infinite_count"].get<int>(), 3);
  EXPECT_DOUBLE_EQ(r["mean_ssim"].get<double>(), 1.0);

  fs::create_directories(dir / "empty");
  try {
    cmd_evaluate({m, dir / "empty", std::nullopt, std::nullopt}, out, log);
    FAIL() << "expected a coverage error";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("covers 0 of 3"), std::string::npos);
  }
}

TEST(Cli, SweepWritesSurface) {
  TempDir dir("cli_sweep");
  const fs::path m = enhance_dataset(dir, make_dataset(dir, 2), "enh");
  std::ostringstream out, log;
  ASSERT_EQ(cmd_sweep({m, dir / "sweep", 0.25}, out, log), 0);
  const std::string csv = read_bytes(dir / "sweep/surface.csv");
  EXPECT_EQ(csv.rfind("k_1,k_2,k_3,mean_psnr,mean_ssim\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 16);
  EXPECT_THROW(cmd_sweep({m, dir / "sweep", 0.3}, out, log), InvalidArgument);
}

TEST(Cli, RankChallengeTable) {
  TempDir dir("cli_rank");
  std::ostringstream out, log;
  ASSERT_EQ(cmd_rank({FUSEKIT_DATA_DIR "/ntire2025_table1.json", true, dir.path()}, out, log), 0);
  const json t = json::parse(out.str());
  const std::vector<std::string> names{"NWPU-HVI", "Imagine", "pengpeng-yu", "DAVIS-K", "SoloMan"};
  const std::vector<double> totals{7.0, 10.2, 11.1, 11.7, 12.5};
  ASSERT_EQ(t["rows"].size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(t["rows"][i]["name"], names[i]);
    EXPECT_NEAR(t["rows"][i]["total"].get<double>(), totals[i], 1e-10);
  }
  EXPECT_TRUE(fs::exists(dir / "ranks.txt"));
}

}  // namespace
}  // namespace fusekit::cli
