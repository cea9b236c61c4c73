#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fusekit/error.hpp"
#include "fusekit/fusion.hpp"
#include "fusekit/metrics.hpp"
#include "fusekit/synthetic.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace fusekit::fusion {
namespace {

using testing::random_raster;

WeightVector weights(std::vector<double> k, double a = 1.0) {
  WeightVector w;
  w.weights = std::move(k);
  w.target_sum = a;
  return w;
}

// ------------------------------------------------------------------- fuse

TEST(Fuse, VertexReturnsThatOutput) {
  const std::vector<Raster> outs{random_raster(6, 4, 1), random_raster(6, 4, 2),
                                 random_raster(6, 4, 3)};
  EXPECT_EQ(fuse(outs, weights({1, 0, 0})), outs[0]);
  EXPECT_EQ(fuse(outs, weights({0, 0, 1})), outs[2]);
}

TEST(Fuse, ConstantLinearity) {
  const std::vector<Raster> two{Raster(3, 3, 0.2), Raster(3, 3, 0.6)};
  const Raster half = fuse(two, weights({0.5, 0.5}));
  for (double v : half.samples()) EXPECT_NEAR(v, 0.4, 1e-15);
  const std::vector<Raster> three{Raster(3, 3, 0.1), Raster(3, 3, 0.2), Raster(3, 3, 0.3)};
  const Raster fixture = fuse(three, weights({0.16, 0.40, 0.44}));
  for (double v : fixture.samples()) {
    EXPECT_NEAR(v, 0.228, 1e-15);
  }
}

TEST(Fuse, Errors) {
  const std::vector<Raster> outs{Raster(3, 3, 0.2), Raster(3, 3, 0.6)};
  EXPECT_THROW(fuse(outs, weights({1.0})), InvalidArgument);
  EXPECT_THROW(fuse(outs, weights({0.5, 0.4})), ConstraintError);
  EXPECT_THROW(fuse(outs, weights({0.5, 0.5 + 2e-6})), ConstraintError);
  EXPECT_NO_THROW(fuse(outs, weights({0.5, 0.5 + 5e-7})));
  EXPECT_THROW(fuse(outs, weights({})), ConstraintError);
  const std::vector<Raster> mixed{Raster(3, 3, 0.2), Raster(4, 3, 0.6)};
  EXPECT_THROW(fuse(mixed, weights({0.5, 0.5})), DimensionError);
  EXPECT_NO_THROW(fuse(outs, weights({1.5, 0.5}, 2.0)));
}

TEST(Fuse, MatchesPerSampleWeightedSum) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 5;
    std::vector<Raster> outs;
    std::vector<double> k;
    for (int i = 0; i < n; ++i) {
      outs.push_back(random_raster(7, 5, 100 * trial + i, -0.2, 1.2));
      k.push_back(rng.uniform(-1.0, 2.0));
    }
    const double s = std::accumulate(k.begin(), k.end(), 0.0);
    const Raster f = fuse(outs, weights(k, s));
    for (std::size_t j = 0; j < f.sample_count(); ++j) {
      double expected = 0.0;
      for (int i = 0; i < n; ++i) expected += k[i] * outs[i].samples()[j];
      ASSERT_NEAR(f.samples()[j], expected, 1e-9);
    }
    double lum = 0.0;
    for (int i = 0; i < n; ++i) lum += k[i] * mean_luminance(outs[i]);
    EXPECT_NEAR(mean_luminance(f), lum, 1e-9);
  }
}

TEST(Fuse, EqualMeansStayPut) {
  std::vector<Raster> outs;
  for (int i = 0; i < 3; ++i) {
    Raster r = random_raster(8, 8, 40 + i);
    const double shift = 0.5 - mean_luminance(r);
    for (double& v : r.samples()) v += shift;
    outs.push_back(r);
  }
  EXPECT_NEAR(mean_luminance(fuse(outs, weights({0.7, -0.2, 0.5}))), 0.5, 1e-12);
}

// ---------------------------------------------------------- build_problem

TEST(BuildProblem, SelfInnerProduct) {
  ImageSet gts{{"a", random_raster(4, 4, 1)}, {"b", random_raster(4, 4, 2)}};
  const FusionProblem p = build_problem({{"m", gts}}, gts);
  EXPECT_DOUBLE_EQ(p.cross(0), p.gram(0, 0));
  EXPECT_DOUBLE_EQ(p.gram(0, 0), p.target_norm_sq);
}

TEST(BuildProblem, OrthogonalConstants) {
  Raster a(1, 1), b(1, 1);
  a.at(0, 0, 0) = 1.0;
  b.at(0, 0, 1) = 1.0;
  ImageSet gts{{"x", Raster(1, 1, 0.5)}};
  const FusionProblem p = build_problem({{"A", {{"x", a}}}, {"B", {{"x", b}}}}, gts);
  EXPECT_EQ(p.gram(0, 1), 0.0);
  EXPECT_EQ(p.gram(1, 0), 0.0);
  EXPECT_EQ(p.gram(0, 0), 1.0);
}

TEST(BuildProblem, MatchesNaiveInnerProducts) {
  ImageSet gts;
  MethodOutputs outs;
  for (int i = 0; i < 3; ++i) {
    const std::string id = "id" + std::to_string(i);
    gts[id] = random_raster(5, 3, 10 + i);
    for (int m = 0; m < 3; ++m) outs["m" + std::to_string(m)][id] = random_raster(5, 3, 100 * m + i);
  }
  const FusionProblem p = build_problem(outs, gts);
  ASSERT_EQ(p.sample_count(), 3u * 5 * 3 * 3);
  // Columns flattened in sorted-id order.
  std::vector<std::vector<double>> cols(3);
  std::vector<double> y;
  for (const auto& [id, gt] : gts) {
    y.insert(y.end(), gt.samples().begin(), gt.samples().end());
    for (int m = 0; m < 3; ++m) {
      const auto s = outs["m" + std::to_string(m)][id].samples();
      cols[m].insert(cols[m].end(), s.begin(), s.end());
    }
  }
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(p.cross(i), testing::naive_dot(cols[i], y), 1e-9);
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(p.gram(i, j), testing::naive_dot(cols[i], cols[j]), 1e-9);
  }
  EXPECT_TRUE(p.gram.isApprox(p.gram.transpose()));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(p.gram);
  EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-9);
}

TEST(BuildProblem, CoverageErrors) {
  ImageSet gts{{"a", Raster(2, 2, 0.1)}, {"b", Raster(2, 2, 0.1)}};
  EXPECT_THROW(build_problem({{"m", {{"a", Raster(2, 2, 0.1)}}}}, gts), InvalidArgument);
  EXPECT_THROW(build_problem({{"m", {{"a", Raster(2, 2, 0.1)}, {"b", Raster(3, 2, 0.1)}}}}, gts),
               DimensionError);
  EXPECT_THROW(build_problem(MethodOutputs{}, gts), InvalidArgument);
}

// ------------------------------------------------------------ closed form

TEST(ClosedForm, ExactVertex) {
  ImageSet gts{{"a", random_raster(6, 6, 1)}, {"b", random_raster(6, 6, 2)}};
  ImageSet other{{"a", random_raster(6, 6, 3)}, {"b", random_raster(6, 6, 4)}};
  const auto r = solve_weights_closed_form(build_problem({"m1", "m2"}, {{"m1", gts}, {"m2", other}}, gts));
  EXPECT_NEAR(r.weights.weights[0], 1.0, 1e-9);
  EXPECT_NEAR(r.weights.weights[1], 0.0, 1e-9);
  EXPECT_NEAR(r.diagnostics.residual_norm, 0.0, 1e-7);
  EXPECT_NEAR(r.diagnostics.correlations[0], 1.0, 1e-12);
}

TEST(ClosedForm, ExactInteriorRepresentation) {
  ImageSet m1{{"a", random_raster(6, 6, 5)}}, m2{{"a", random_raster(6, 6, 6)}};
  Raster target(6, 6);
  for (std::size_t i = 0; i < target.sample_count(); ++i) {
    target.samples()[i] = 0.5 * m1["a"].samples()[i] + 0.5 * m2["a"].samples()[i];
  }
  const auto r = solve_weights_closed_form(build_problem({{"m1", m1}, {"m2", m2}}, {{"a", target}}));
  EXPECT_NEAR(r.weights.weights[0], 0.5, 1e-9);
  EXPECT_NEAR(r.weights.weights[1], 0.5, 1e-9);
  EXPECT_LE(r.diagnostics.residual_norm, 1e-9);
}

TEST(ClosedForm, SingleMethodAndTargetSum) {
  ImageSet gts{{"a", random_raster(4, 4, 1)}};
  const auto p = build_problem({{"only", {{"a", random_raster(4, 4, 2)}}}}, gts);
  EXPECT_DOUBLE_EQ(solve_weights_closed_form(p).weights.weights[0], 1.0);
  EXPECT_NEAR(solve_weights_closed_form(p, 2.5).weights.weights[0], 2.5, 1e-12);
}

TEST(ClosedForm, DuplicateMethodsAreSingularUnlessRidged) {
  ImageSet gts{{"a", random_raster(8, 8, 1)}};
  ImageSet dup{{"a", random_raster(8, 8, 2)}};
  ImageSet other{{"a", random_raster(8, 8, 3)}};
  const auto p = build_problem({"x", "y", "z"}, {{"x", dup}, {"y", dup}, {"z", other}}, gts);
  try {
    solve_weights_closed_form(p);
    FAIL() << "expected SingularSystemError";
  } catch (const SingularSystemError& e) {
    EXPECT_GT(e.condition(), kMaxKktCondition);
    EXPECT_NE(std::string(e.what()).find("condition number"), std::string::npos);
  }
  const auto r = solve_weights_closed_form(p, 1.0, 1e-3);
  EXPECT_NEAR(r.weights.weights[0], r.weights.weights[1], 1e-10);
  EXPECT_NEAR(r.weights.sum(), 1.0, 1e-12);
  EXPECT_THROW(solve_weights_closed_form(p, 1.0, -1.0), InvalidArgument);
}

TEST(ClosedForm, PermutationEquivariant) {
  const auto inst = synthetic::make_instance(3, 3, 24);
  const auto base = solve_weights_closed_form(build_problem(inst.method_ids, inst.outputs, inst.gts));
  const std::vector<std::string> perm{inst.method_ids[2], inst.method_ids[0], inst.method_ids[1]};
  const auto permuted = solve_weights_closed_form(build_problem(perm, inst.outputs, inst.gts));
  EXPECT_NEAR(permuted.weights.weights[0], base.weights.weights[2], 1e-9);
  EXPECT_NEAR(permuted.weights.weights[1], base.weights.weights[0], 1e-9);
  EXPECT_NEAR(permuted.weights.weights[2], base.weights.weights[1], 1e-9);
}

TEST(ClosedForm, ProjectionDominance) {
  for (std::uint64_t seed = 100; seed < 106; ++seed) {
    const auto inst = synthetic::make_instance(seed, 3, 32);
    const auto p = build_problem(inst.method_ids, inst.outputs, inst.gts);
    const auto r = solve_weights_closed_form(p);
    const double best = *std::min_element(r.diagnostics.per_method_mse.begin(),
                                          r.diagnostics.per_method_mse.end());
    EXPECT_LE(r.diagnostics.fused_mse, best);
    EXPECT_NEAR(r.diagnostics.fused_mse, quadratic_mse(p, r.weights.weights), 1e-10);
    for (double c : r.diagnostics.correlations) {
      EXPECT_LE(std::abs(c), 1.0);
    }
  }
}

// The grid oracle enumerates the simplex independently of the KKT path.
TEST(ClosedForm, AgreesWithFineGridWhenInsideSimplex) {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 12 && checked < 3; ++seed) {
    const auto inst = synthetic::make_instance(seed, 3, 32);
    const auto p = build_problem(inst.method_ids, inst.outputs, inst.gts);
    const auto r = solve_weights_closed_form(p);
    const auto& k = r.weights.weights;
    if (!std::all_of(k.begin(), k.end(), [](double v) { return v >= 0.0 && v <= 1.0; })) continue;
    const auto g = grid_search_weights(p, 0.001);
    for (std::size_t i = 0; i < k.size(); ++i) EXPECT_NEAR(g.weights.weights[i], k[i], 0.002);
    EXPECT_GE(g.mse, r.diagnostics.fused_mse - 1e-12);
    ++checked;
  }
  EXPECT_EQ(checked, 3);
}

// ------------------------------------------------------------ simplex grid

TEST(SimplexGrid, SmallEnumerations) {
  const auto two = simplex_grid(2, 0.5);
  ASSERT_EQ(two.size(), 3u);
  EXPECT_EQ(two[0].weights, (std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(two[1].weights, (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(two[2].weights, (std::vector<double>{1.0, 0.0}));
  EXPECT_EQ(simplex_grid(3, 0.5).size(), 6u);
  EXPECT_EQ(simplex_grid(1, 0.1).size(), 1u);
}

TEST(SimplexGrid, CountsMatchBinomial) {
  EXPECT_EQ(simplex_grid(3, 0.02).size(), 1326u);
  for (int n = 1; n <= 5; ++n) {
    for (double step : {0.5, 0.25, 0.1, 0.05}) {
      const int m = grid_divisions(step);
      EXPECT_EQ(simplex_grid(n, step).size(),
                static_cast<std::size_t>(testing::binomial(m + n - 1, n - 1)));
      EXPECT_EQ(simplex_grid_size(n, m), static_cast<std::size_t>(testing::binomial(m + n - 1, n - 1)));
    }
  }
}

TEST(SimplexGrid, ConstraintAndOrder) {
  const auto grid = simplex_grid(4, 0.05);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& w = grid[i];
    EXPECT_LE(std::abs(w.sum() - 1.0), 1e-12);
    EXPECT_TRUE(w.nonnegative);
    for (double k : w.weights) EXPECT_GE(k, 0.0);
    if (i > 0) {
      EXPECT_TRUE(grid[i - 1].weights < w.weights);
    }
  }
}

TEST(SimplexGrid, RejectsNonDividingStep) {
  EXPECT_THROW(simplex_grid(3, 0.3), InvalidArgument);
  EXPECT_THROW(simplex_grid(3, 0.0), InvalidArgument);
  EXPECT_THROW(simplex_grid(3, 1.5), InvalidArgument);
  EXPECT_THROW(simplex_grid(0, 0.5), InvalidArgument);
  EXPECT_EQ(grid_divisions(0.001), 1000);
}

TEST(GridSearch, MatchesExhaustiveEnumeration) {
  const auto inst = synthetic::make_instance(21, 2, 24);
  const auto p = build_problem(inst.method_ids, inst.outputs, inst.gts);
  const auto g = grid_search_weights(p, 0.05);
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> arg;
  for (const auto& w : simplex_grid(3, 0.05)) {
    const double v = quadratic_mse(p, w.weights);
    if (v < best) {
      best = v;
      arg = w.weights;
    }
  }
  EXPECT_EQ(g.evaluated, 231u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(g.weights.weights[i], arg[i], 1e-12);
  EXPECT_NEAR(g.mse, best, 1e-12);
}

// ------------------------------------------------------------------ sweep

TEST(Sweep, SingleMethodSingleRow) {
  ImageSet gts{{"a", random_raster(12, 12, 1)}};
  const auto t = sweep_surface({"m"}, {{"m", {{"a", random_raster(12, 12, 2)}}}}, gts, 0.1);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0].weights, std::vector<double>{1.0});
}

TEST(Sweep, PerfectMethodDominates) {
  ImageSet gts{{"a", random_raster(12, 12, 1)}, {"b", random_raster(12, 12, 2)}};
  ImageSet other{{"a", random_raster(12, 12, 3)}, {"b", random_raster(12, 12, 4)}};
  const auto t = sweep_surface({"good", "bad"}, {{"good", gts}, {"bad", other}}, gts, 0.25);
  ASSERT_EQ(t.rows.size(), 5u);
  EXPECT_EQ(t.rows[t.argmax_psnr].weights, (std::vector<double>{1.0, 0.0}));
  EXPECT_EQ(t.rows[t.argmax_ssim].weights, (std::vector<double>{1.0, 0.0}));
  EXPECT_TRUE(std::isinf(t.rows[t.argmax_psnr].mean_psnr));
}

TEST(Sweep, PsnrArgmaxNearClosedForm) {
  const auto inst = synthetic::make_instance(4, 3, 32);
  const auto p = build_problem(inst.method_ids, inst.outputs, inst.gts);
  const auto r = solve_weights_closed_form(p);
  ASSERT_TRUE(r.weights.nonnegative);
  const double step = 0.05;
  const auto t = sweep_surface(inst.method_ids, inst.outputs, inst.gts, step);
  const auto& best = t.rows[t.argmax_psnr].weights;
  for (std::size_t i = 0; i < best.size(); ++i) EXPECT_NEAR(best[i], r.weights.weights[i], step);
}

TEST(Sweep, CsvFormat) {
  SurfaceTable t;
  t.method_ids = {"a", "b"};
  t.rows = {{{0.0, 1.0}, 20.123456789, 0.5}, {{1.0, 0.0}, metrics::kInfinitePsnr, 1.0}};
  EXPECT_EQ(surface_to_csv(t),
            "k_1,k_2,mean_psnr,mean_ssim\n"
            "0.000000,1.000000,20.123457,0.500000\n"
            "1.000000,0.000000,inf,1.000000\n");
}

}  // namespace
}  // namespace fusekit::fusion
