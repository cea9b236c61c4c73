#pragma once

// JSON forms of the library's value types. Infinite PSNR values are written
// as null next to an "infinite": true flag.

#include <json.hpp>

#include "fusekit/enhancers.hpp"
#include "fusekit/fusion.hpp"
#include "fusekit/metrics.hpp"
#include "fusekit/ranking.hpp"

namespace fusekit {

using json = nlohmann::ordered_json;

enum class Optimizer { ClosedForm, Grid };

std::string to_string(Optimizer o);
Optimizer parse_optimizer(const std::string& s);

struct RunConfig {
  std::uint64_t seed = 0;
  double weight_sum = 1.0;
  double grid_step = 0.02;
  double ridge = 0.0;
  Optimizer optimizer = Optimizer::ClosedForm;
  int bit_depth = 8;

  // Throws InvalidArgument on a non-dividing grid step, a <= 0, negative
  // ridge or a bit depth other than 8/16.
  void validate() const;
};

RunConfig run_config_from_json(const json& j);
json to_json(const RunConfig& c);

enhance::EnhancerSpec enhancer_spec_from_json(const json& j);
json to_json(const enhance::EnhancerSpec& s);

enhance::DegradeSpec degrade_spec_from_json(const json& j);
json to_json(const enhance::DegradeSpec& s);

json to_json(const fusion::WeightVector& w);
json to_json(const fusion::GramDiagnostics& d);
json to_json(const metrics::MetricReport& r);
json to_json(const ranking::RankTable& t);

// {"metrics": [{name, direction, weight}], "entrants": [{name, values?, ranks?}]}
struct RankInput {
  std::vector<ranking::MetricSpec> metrics;
  std::vector<ranking::Entrant> entrants;
};
RankInput rank_input_from_json(const json& j);

// Finite doubles as numbers, infinities as null.
json number_or_null(double v);

json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace fusekit
