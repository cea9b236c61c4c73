#include "fusekit/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "fusekit/error.hpp"
#include "fusekit/kernels.hpp"
#include "fusekit/metrics.hpp"

namespace fusekit::fusion {

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

// Checks that `images` covers exactly the ground-truth ids with matching shapes.
void check_coverage(const std::string& method, const ImageSet& images, const ImageSet& gts) {
  for (const auto& [id, gt] : gts) {
    const auto it = images.find(id);
    if (it == images.end()) {
      throw InvalidArgument("method '" + method + "' has no output for id '" + id + "'");
    }
    if (!it->second.same_shape(gt)) {
      throw DimensionError("method '" + method + "', id '" + id + "': output is " +
                           shape_string(it->second) + " but ground truth is " +
                           shape_string(gt));
    }
  }
  for (const auto& [id, _] : images) {
    if (!gts.contains(id)) {
      throw InvalidArgument("method '" + method + "' has output for unknown id '" + id + "'");
    }
  }
}

std::vector<double> flatten(const ImageSet& images, std::size_t total) {
  std::vector<double> column;
  column.reserve(total);
  for (const auto& [_, img] : images) {
    const auto s = img.samples();
    column.insert(column.end(), s.begin(), s.end());
  }
  return column;
}

double condition_number(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

std::vector<std::span<const double>> column_views(const FusionProblem& p) {
  std::vector<std::span<const double>> views;
  views.reserve(p.columns.size());
  for (const auto& c : p.columns) views.emplace_back(c);
  return views;
}

}  // namespace

double WeightVector::sum() const {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

void WeightVector::validate() const {
  if (weights.empty()) throw ConstraintError("weight vector is empty");
  for (double k : weights) {
    if (!std::isfinite(k)) throw ConstraintError("weight vector has a non-finite entry");
  }
  const double s = sum();
  if (!(std::abs(s - target_sum) <= kWeightSumTolerance)) {
    throw ConstraintError("weights sum to " + format_double(s) + " but must sum to " +
                          format_double(target_sum) + " (tolerance " +
                          format_double(kWeightSumTolerance) + ")");
  }
}

WeightVector make_weights(std::vector<double> weights, double target_sum) {
  WeightVector w;
  w.nonnegative = std::all_of(weights.begin(), weights.end(), [](double k) { return k >= 0.0; });
  w.weights = std::move(weights);
  w.target_sum = target_sum;
  w.validate();
  return w;
}

Raster fuse(std::span<const Raster> outputs, const WeightVector& w) {
  w.validate();
  if (outputs.size() != w.weights.size()) {
    throw InvalidArgument("fuse: " + std::to_string(outputs.size()) + " outputs but " +
                          std::to_string(w.weights.size()) + " weights");
  }
  const Raster& first = outputs.front();
  std::vector<std::span<const double>> views;
  views.reserve(outputs.size());
  for (const Raster& r : outputs) {
    if (!r.same_shape(first)) {
      throw DimensionError("fuse: output shapes differ (" + shape_string(first) + " vs " +
                           shape_string(r) + ")");
    }
    views.push_back(r.samples());
  }
  Raster out(first.width(), first.height());
  kernels::parallel::weighted_sum(views, w.weights, out.samples());
  return out;
}

FusionProblem build_problem(const std::vector<std::string>& method_ids,
                            const MethodOutputs& outputs_by_method, const ImageSet& gts) {
  if (method_ids.empty()) throw InvalidArgument("build_problem: no methods");
  if (gts.empty()) throw InvalidArgument("build_problem: no ground-truth images");
  for (const auto& id : method_ids) {
    const auto it = outputs_by_method.find(id);
    if (it == outputs_by_method.end()) {
      throw InvalidArgument("build_problem: unknown method '" + id + "'");
    }
    check_coverage(id, it->second, gts);
  }

  FusionProblem p;
  p.method_ids = method_ids;
  std::size_t total = 0;
  for (const auto& [id, img] : gts) {
    p.image_ids.push_back(id);
    total += img.sample_count();
  }
  p.target = flatten(gts, total);
  for (const auto& id : method_ids) p.columns.push_back(flatten(outputs_by_method.at(id), total));

  const auto n = static_cast<Eigen::Index>(method_ids.size());
  p.gram.resize(n, n);
  p.cross.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double g = kernels::parallel::dot(p.columns[i], p.columns[j]);
      p.gram(i, j) = g;
      p.gram(j, i) = g;
    }
    p.cross(i) = kernels::parallel::dot(p.columns[i], p.target);
  }
  p.target_norm_sq = kernels::parallel::dot(p.target, p.target);
  return p;
}

FusionProblem build_problem(const MethodOutputs& outputs_by_method, const ImageSet& gts) {
  std::vector<std::string> ids;
  for (const auto& [id, _] : outputs_by_method) ids.push_back(id);
  return build_problem(ids, outputs_by_method, gts);
}

GramDiagnostics diagnose(const FusionProblem& p, std::span<const double> k) {
  const std::size_t n = p.method_count();
  if (k.size() != n) throw InvalidArgument("diagnose: weight count mismatch");
  const double samples = static_cast<double>(p.sample_count());
  GramDiagnostics d;
  const double target_norm = std::sqrt(p.target_norm_sq);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double denom = std::sqrt(p.gram(ii, ii)) * target_norm;
    d.correlations.push_back(denom > 0.0 ? std::clamp(p.cross(ii) / denom, -1.0, 1.0) : 0.0);
    d.per_method_mse.push_back(
        kernels::parallel::sum_squared_diff(p.columns[i], p.target) / samples);
  }
  d.gram_condition = condition_number(p.gram);
  std::vector<double> fused(p.sample_count());
  kernels::parallel::weighted_sum(column_views(p), k, fused);
  const double sq = kernels::parallel::sum_squared_diff(fused, p.target);
  d.residual_norm = std::sqrt(sq);
  d.fused_mse = sq / samples;
  return d;
}

ClosedFormResult solve_weights_closed_form(const FusionProblem& p, double target_sum,
                                           double ridge) {
  const auto n = static_cast<Eigen::Index>(p.method_count());
  if (n < 1) throw InvalidArgument("closed-form solve needs at least one method");
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw InvalidArgument("ridge must be >= 0");
  if (!std::isfinite(target_sum)) throw InvalidArgument("target sum must be finite");

  // Normalizing by the sample count turns the inner products into empirical
  // expectations and keeps the KKT matrix well scaled.
  const double samples = static_cast<double>(p.sample_count());
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + 1, n + 1);
  kkt.topLeftCorner(n, n) =
      2.0 * (p.gram / samples + ridge * Eigen::MatrixXd::Identity(n, n));
  kkt.block(0, n, n, 1).setOnes();
  kkt.block(n, 0, 1, n).setOnes();
  Eigen::VectorXd rhs(n + 1);
  rhs.head(n) = 2.0 * p.cross / samples;
  rhs(n) = target_sum;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(kkt, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  const double cond = smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
  if (!(cond <= kMaxKktCondition)) {
    throw SingularSystemError(
        "KKT system is singular (condition number " + format_double(cond) +
            "); methods may be duplicated or linearly dependent, retry with --ridge",
        cond);
  }
  const Eigen::VectorXd solution = svd.solve(rhs);

  std::vector<double> k(solution.data(), solution.data() + n);
  ClosedFormResult result;
  result.weights.nonnegative = std::all_of(k.begin(), k.end(), [](double v) { return v >= 0.0; });
  result.weights.weights = std::move(k);
  result.weights.target_sum = target_sum;
  result.weights.validate();
  result.diagnostics = diagnose(p, result.weights.weights);
  return result;
}

double quadratic_mse(const FusionProblem& p, std::span<const double> k) {
  const auto n = static_cast<Eigen::Index>(p.method_count());
  if (static_cast<Eigen::Index>(k.size()) != n) {
    throw InvalidArgument("quadratic_mse: weight count mismatch");
  }
  const Eigen::Map<const Eigen::VectorXd> kv(k.data(), n);
  const double sq = kv.dot(p.gram * kv) - 2.0 * kv.dot(p.cross) + p.target_norm_sq;
  return std::max(sq, 0.0) / static_cast<double>(p.sample_count());
}

int grid_divisions(double step) {
  if (!(step > 0.0) || step > 1.0) {
    throw InvalidArgument("grid step must be in (0, 1], got " + format_double(step));
  }
  const double m = std::round(1.0 / step);
  if (std::abs(m * step - 1.0) > 1e-9 || m > 1e7) {
    throw InvalidArgument("grid step " + format_double(step) + " does not evenly divide 1");
  }
  return static_cast<int>(m);
}

std::size_t simplex_grid_size(int n, int divisions) {
  if (n < 1 || divisions < 1) return 0;
  // C(m + n - 1, n - 1), built incrementally so every step stays exact.
  std::size_t c = 1;
  for (int i = 1; i <= n - 1; ++i) {
    c = c * static_cast<std::size_t>(divisions + i) / static_cast<std::size_t>(i);
  }
  return c;
}

void for_each_simplex_point(int n, int divisions,
                            const std::function<void(std::span<const int>)>& fn) {
  if (n < 1) throw InvalidArgument("simplex grid needs n >= 1");
  std::vector<int> c(static_cast<std::size_t>(n), 0);
  // Depth-first over c_0..c_{n-2}; the last coordinate takes the remainder.
  auto recurse = [&](auto&& self, int pos, int remaining) -> void {
    if (pos == n - 1) {
      c[pos] = remaining;
      fn(c);
      return;
    }
    for (int v = 0; v <= remaining; ++v) {
      c[pos] = v;
      self(self, pos + 1, remaining - v);
    }
  };
  recurse(recurse, 0, divisions);
}

std::vector<WeightVector> simplex_grid(int n, double step) {
  const int m = grid_divisions(step);
  if (n < 1) throw InvalidArgument("simplex grid needs n >= 1");
  std::vector<WeightVector> grid;
  grid.reserve(simplex_grid_size(n, m));
  for_each_simplex_point(n, m, [&](std::span<const int> c) {
    WeightVector w;
    w.weights.reserve(c.size());
    for (int v : c) w.weights.push_back(static_cast<double>(v) / m);
    w.target_sum = 1.0;
    w.nonnegative = true;
    grid.push_back(std::move(w));
  });
  return grid;
}

GridSearchResult grid_search_weights(const FusionProblem& p, double step, double target_sum) {
  const int m = grid_divisions(step);
  const int n = static_cast<int>(p.method_count());
  if (n < 1) throw InvalidArgument("grid search needs at least one method");
  if (!(target_sum > 0.0)) throw InvalidArgument("grid search needs a positive target sum");

  const double samples = static_cast<double>(p.sample_count());
  const Eigen::MatrixXd g = p.gram / samples;
  const Eigen::VectorXd b = p.cross / samples;
  const double yy = p.target_norm_sq / samples;

  struct Best {
    double mse = std::numeric_limits<double>::infinity();
    std::vector<int> c;
    std::size_t evaluated = 0;
  };
  // One slot per value of the leading coordinate; slots are merged in
  // lexicographic order afterwards so ties resolve identically every run.
  std::vector<Best> best(static_cast<std::size_t>(m) + 1);

#pragma omp parallel for schedule(dynamic)
  for (int lead = 0; lead <= m; ++lead) {
    Best& slot = best[lead];
    Eigen::VectorXd k(n);
    auto evaluate = [&](std::span<const int> c) {
      for (int i = 0; i < n; ++i) k(i) = target_sum * static_cast<double>(c[i]) / m;
      const double value = k.dot(g * k) - 2.0 * k.dot(b) + yy;
      ++slot.evaluated;
      if (value < slot.mse) {
        slot.mse = value;
        slot.c.assign(c.begin(), c.end());
      }
    };
    if (n == 1) {
      if (lead == m) {
        const int c[1] = {m};
        evaluate(c);
      }
      continue;
    }
    std::vector<int> c(static_cast<std::size_t>(n));
    c[0] = lead;
    for_each_simplex_point(n - 1, m - lead, [&](std::span<const int> rest) {
      std::copy(rest.begin(), rest.end(), c.begin() + 1);
      evaluate(c);
    });
  }

  GridSearchResult result;
  const Best* winner = nullptr;
  for (const Best& slot : best) {
    result.evaluated += slot.evaluated;
    if (!slot.c.empty() && (winner == nullptr || slot.mse < winner->mse)) winner = &slot;
  }
  std::vector<double> k;
  for (int v : winner->c) k.push_back(target_sum * static_cast<double>(v) / m);
  result.weights.weights = std::move(k);
  result.weights.target_sum = target_sum;
  result.weights.nonnegative = true;
  result.mse = std::max(winner->mse, 0.0);
  return result;
}

SurfaceTable sweep_surface(const std::vector<std::string>& method_ids,
                           const MethodOutputs& outputs_by_method, const ImageSet& gts,
                           double step) {
  const int m = grid_divisions(step);
  if (method_ids.empty()) throw InvalidArgument("sweep_surface: no methods");
  if (gts.empty()) throw InvalidArgument("sweep_surface: no ground-truth images");
  std::vector<const ImageSet*> sets;
  for (const auto& id : method_ids) {
    const auto it = outputs_by_method.find(id);
    if (it == outputs_by_method.end()) {
      throw InvalidArgument("sweep_surface: unknown method '" + id + "'");
    }
    check_coverage(id, it->second, gts);
    sets.push_back(&it->second);
  }

  // Per image: the method outputs in method order and the clamped target.
  struct Item {
    std::vector<Raster> outputs;
    Raster target;
  };
  std::vector<Item> items;
  for (const auto& [id, gt] : gts) {
    Item item;
    for (const ImageSet* set : sets) item.outputs.push_back(set->at(id));
    item.target = clamped(gt);
    items.push_back(std::move(item));
  }

  SurfaceTable table;
  table.method_ids = method_ids;
  const int n = static_cast<int>(method_ids.size());
  for_each_simplex_point(n, m, [&](std::span<const int> c) {
    SurfaceRow row;
    for (int v : c) row.weights.push_back(static_cast<double>(v) / m);
    table.rows.push_back(std::move(row));
  });

  const auto rows = static_cast<std::ptrdiff_t>(table.rows.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    SurfaceRow& row = table.rows[r];
    WeightVector w;
    w.weights = row.weights;
    w.target_sum = 1.0;
    double psnr_total = 0.0;
    double ssim_total = 0.0;
    std::size_t finite = 0;
    for (const Item& item : items) {
      const Raster fused = clamped(fuse(item.outputs, w));
      const double p = metrics::psnr(fused, item.target);
      if (std::isfinite(p)) {
        psnr_total += p;
        ++finite;
      }
      ssim_total += metrics::ssim(fused, item.target);
    }
    row.mean_psnr = finite == 0 ? metrics::kInfinitePsnr : psnr_total / static_cast<double>(finite);
    row.mean_ssim = ssim_total / static_cast<double>(items.size());
  }

  for (std::size_t r = 1; r < table.rows.size(); ++r) {
    if (table.rows[r].mean_psnr > table.rows[table.argmax_psnr].mean_psnr) table.argmax_psnr = r;
    if (table.rows[r].mean_ssim > table.rows[table.argmax_ssim].mean_ssim) table.argmax_ssim = r;
  }
  return table;
}

std::string surface_to_csv(const SurfaceTable& table) {
  std::ostringstream out;
  const std::size_t n = table.method_ids.size();
  for (std::size_t i = 0; i < n; ++i) out << "k_" << (i + 1) << ',';
  out << "mean_psnr,mean_ssim\n";
  char buf[64];
  auto cell = [&](double v) {
    if (std::isinf(v)) return std::string(v > 0 ? "inf" : "-inf");
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf);
  };
  for (const SurfaceRow& row : table.rows) {
    for (double k : row.weights) out << cell(k) << ',';
    out << cell(row.mean_psnr) << ',' << cell(row.mean_ssim) << '\n';
  }
  return out.str();
}

}  // namespace fusekit::fusion
