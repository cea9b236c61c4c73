#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fusekit::ranking {

enum class Direction { HigherBetter, LowerBetter };

Direction parse_direction(const std::string& s);
std::string to_string(Direction d);

// Competition ("min") ranking: tied values share the smallest rank of their
// group; the next value ranks 1 + number of strictly better entrants.
std::map<std::string, int> compute_ranks(const std::map<std::string, double>& values,
                                         Direction direction);

// sum over metrics of weight * rank. Every ranked metric needs a weight.
double total_score(const std::map<std::string, int>& ranks,
                   const std::map<std::string, double>& weights);

struct MetricSpec {
  std::string name;
  Direction direction = Direction::HigherBetter;
  double weight = 0.0;
};

// An entrant supplies, per metric, either a raw value or a precomputed rank.
struct Entrant {
  std::string name;
  std::map<std::string, double> values;
  std::map<std::string, int> ranks;
};

struct RankRow {
  std::string name;
  std::map<std::string, int> ranks;
  double total = 0.0;
};

struct RankTable {
  std::vector<MetricSpec> metrics;
  std::vector<RankRow> rows;  // ascending total, input order on ties
};

RankTable build_rank_table(const std::vector<Entrant>& entrants,
                           const std::vector<MetricSpec>& metrics);

std::string format_rank_table(const RankTable& table);

}  // namespace fusekit::ranking
