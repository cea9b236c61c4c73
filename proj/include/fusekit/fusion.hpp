#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fusekit/raster.hpp"

namespace fusekit::fusion {

inline constexpr double kWeightSumTolerance = 1e-6;

// Fusion coefficients k_i with the linear constraint sum(k) == target_sum.
struct WeightVector {
  std::vector<double> weights;
  double target_sum = 1.0;
  bool nonnegative = true;

  double sum() const;
  // Throws ConstraintError when |sum - target_sum| > kWeightSumTolerance or
  // the vector is empty.
  void validate() const;
};

// Builds a WeightVector with the nonnegative flag filled in and validates it.
WeightVector make_weights(std::vector<double> weights, double target_sum = 1.0);

// Per-sample weighted sum of method outputs, unclamped.
Raster fuse(std::span<const Raster> outputs, const WeightVector& w);

using MethodOutputs = std::map<std::string, ImageSet>;

// Least-squares data for the fusion weights. Column i is method i's outputs
// over the tuning set flattened in sorted-id order; target is the matching
// ground truth. gram and cross hold raw (unnormalized) inner products.
struct FusionProblem {
  std::vector<std::string> method_ids;
  std::vector<std::string> image_ids;
  std::vector<std::vector<double>> columns;
  std::vector<double> target;
  Eigen::MatrixXd gram;   // gram(i,j) = <a_i, a_j>
  Eigen::VectorXd cross;  // cross(i)  = <a_i, y>
  double target_norm_sq = 0.0;

  std::size_t method_count() const { return method_ids.size(); }
  std::size_t sample_count() const { return target.size(); }
};

// Method order follows method_ids.
FusionProblem build_problem(const std::vector<std::string>& method_ids,
                            const MethodOutputs& outputs_by_method,
                            const ImageSet& gts);
// Methods in lexicographic name order.
FusionProblem build_problem(const MethodOutputs& outputs_by_method,
                            const ImageSet& gts);

struct GramDiagnostics {
  std::vector<double> correlations;  // <a_i,y> / (|a_i| |y|)
  double gram_condition = 0.0;
  double residual_norm = 0.0;  // |A k* - y|
  double fused_mse = 0.0;      // residual_norm^2 / samples
  std::vector<double> per_method_mse;
};

struct ClosedFormResult {
  WeightVector weights;
  GramDiagnostics diagnostics;
};

// KKT condition number above which the closed-form solve is refused.
inline constexpr double kMaxKktCondition = 1e12;

// Minimizes |A k - y|^2 subject to sum(k) == target_sum by solving
//   [2(G/N + ridge I)  1] [k     ]   [2 b/N     ]
//   [1^T               0] [lambda] = [target_sum]
// with N the sample count. Weights may be negative. Throws
// SingularSystemError when the KKT matrix is numerically singular.
ClosedFormResult solve_weights_closed_form(const FusionProblem& p,
                                           double target_sum = 1.0,
                                           double ridge = 0.0);

GramDiagnostics diagnose(const FusionProblem& p, std::span<const double> k);

// Pre-clamp mean squared error of A k against y through the Gram form.
double quadratic_mse(const FusionProblem& p, std::span<const double> k);

// Number of lattice divisions m with m * step == 1; throws InvalidArgument
// otherwise.
int grid_divisions(double step);

// All nonnegative vectors (c_1..c_n)/m with sum(c) == m, lexicographic in c.
std::vector<WeightVector> simplex_grid(int n, double step);
std::size_t simplex_grid_size(int n, int divisions);

// Visits every simplex lattice point in the same lexicographic order.
void for_each_simplex_point(int n, int divisions,
                            const std::function<void(std::span<const int>)>& fn);

struct GridSearchResult {
  WeightVector weights;
  double mse = 0.0;
  std::size_t evaluated = 0;
};

// Exhaustive minimum of quadratic_mse over the nonnegative simplex lattice,
// scaled to target_sum. Ties keep the lexicographically first point.
GridSearchResult grid_search_weights(const FusionProblem& p, double step,
                                     double target_sum = 1.0);

struct SurfaceRow {
  std::vector<double> weights;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
};

struct SurfaceTable {
  std::vector<std::string> method_ids;
  std::vector<SurfaceRow> rows;
  std::size_t argmax_psnr = 0;
  std::size_t argmax_ssim = 0;
};

// Fuses, clamps and scores every image at every simplex grid point.
SurfaceTable sweep_surface(const std::vector<std::string>& method_ids,
                           const MethodOutputs& outputs_by_method,
                           const ImageSet& gts, double step);

// Header "k_1,...,k_n,mean_psnr,mean_ssim", values with 6 decimals.
std::string surface_to_csv(const SurfaceTable& table);

}  // namespace fusekit::fusion
