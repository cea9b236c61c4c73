#include "fusekit/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "fusekit/error.hpp"

namespace fusekit::ranking {

Direction parse_direction(const std::string& s) {
  if (s == "higher" || s == "higher-better" || s == "higher_better") {
    return Direction::HigherBetter;
  }
  if (s == "lower" || s == "lower-better" || s == "lower_better") return Direction::LowerBetter;
  throw InvalidArgument("unknown rank direction '" + s + "' (expected higher-better or lower-better)");
}

std::string to_string(Direction d) {
  return d == Direction::HigherBetter ? "higher-better" : "lower-better";
}

std::map<std::string, int> compute_ranks(const std::map<std::string, double>& values,
                                         Direction direction) {
  if (values.empty()) throw InvalidArgument("compute_ranks: no entrants");
  for (const auto& [name, v] : values) {
    if (!std::isfinite(v)) {
      throw InvalidArgument("compute_ranks: non-finite value for '" + name + "'");
    }
  }
  std::map<std::string, int> ranks;
  for (const auto& [name, v] : values) {
    int better = 0;
    for (const auto& [_, other] : values) {
      if (direction == Direction::HigherBetter ? other > v : other < v) ++better;
    }
    ranks[name] = better + 1;
  }
  return ranks;
}

double total_score(const std::map<std::string, int>& ranks,
                   const std::map<std::string, double>& weights) {
  double total = 0.0;
  for (const auto& [metric, rank] : ranks) {
    const auto it = weights.find(metric);
    if (it == weights.end()) throw InvalidArgument("no weight for metric '" + metric + "'");
    total += it->second * rank;
  }
  return total;
}

RankTable build_rank_table(const std::vector<Entrant>& entrants,
                           const std::vector<MetricSpec>& metrics) {
  if (entrants.empty()) throw InvalidArgument("rank table needs at least one entrant");
  if (metrics.empty()) throw InvalidArgument("rank table needs at least one metric");
  std::set<std::string> names;
  for (const auto& e : entrants) {
    if (!names.insert(e.name).second) {
      throw InvalidArgument("duplicate entrant '" + e.name + "'");
    }
  }

  RankTable table;
  table.metrics = metrics;
  std::map<std::string, std::map<std::string, int>> ranks_by_entrant;
  std::map<std::string, double> weights;
  for (const auto& spec : metrics) {
    if (!std::isfinite(spec.weight)) {
      throw InvalidArgument("metric '" + spec.name + "' has a non-finite weight");
    }
    if (!weights.emplace(spec.name, spec.weight).second) {
      throw InvalidArgument("duplicate metric '" + spec.name + "'");
    }
    std::size_t with_value = 0;
    std::size_t with_rank = 0;
    for (const auto& e : entrants) {
      const bool has_value = e.values.contains(spec.name);
      const bool has_rank = e.ranks.contains(spec.name);
      if (has_value && has_rank) {
        throw InvalidArgument("entrant '" + e.name + "' gives both a value and a rank for '" +
                              spec.name + "'");
      }
      with_value += has_value;
      with_rank += has_rank;
    }
    if (with_rank == entrants.size()) {
      for (const auto& e : entrants) {
        const int r = e.ranks.at(spec.name);
        if (r < 1) {
          throw InvalidArgument("entrant '" + e.name + "' has rank " + std::to_string(r) +
                                " for '" + spec.name + "'; ranks start at 1");
        }
        ranks_by_entrant[e.name][spec.name] = r;
      }
    } else if (with_value == entrants.size()) {
      std::map<std::string, double> values;
      for (const auto& e : entrants) values[e.name] = e.values.at(spec.name);
      for (const auto& [name, r] : compute_ranks(values, spec.direction)) {
        ranks_by_entrant[name][spec.name] = r;
      }
    } else {
      throw InvalidArgument("metric '" + spec.name +
                            "' must be supplied by every entrant, either all as values or all "
                            "as ranks");
    }
  }

  for (const auto& e : entrants) {
    RankRow row;
    row.name = e.name;
    row.ranks = ranks_by_entrant[e.name];
    row.total = total_score(row.ranks, weights);
    table.rows.push_back(std::move(row));
  }
  std::stable_sort(table.rows.begin(), table.rows.end(),
                   [](const RankRow& a, const RankRow& b) { return a.total < b.total; });
  return table;
}

std::string format_rank_table(const RankTable& table) {
  std::size_t name_width = 4;
  for (const auto& row : table.rows) name_width = std::max(name_width, row.name.size());
  std::vector<std::string> headers;
  for (const auto& m : table.metrics) headers.push_back("Rank " + m.name);

  std::ostringstream out;
  char buf[64];
  auto pad = [](const std::string& s, std::size_t w) {
    return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
  };
  out << "Team" << std::string(name_width - 4, ' ');
  for (const auto& h : headers) out << "  " << h;
  out << "  Total\n";
  for (const auto& row : table.rows) {
    out << row.name << std::string(name_width - row.name.size(), ' ');
    for (std::size_t i = 0; i < table.metrics.size(); ++i) {
      out << "  " << pad(std::to_string(row.ranks.at(table.metrics[i].name)), headers[i].size());
    }
    std::snprintf(buf, sizeof buf, "%.1f", row.total);
    out << "  " << pad(buf, 5) << '\n';
  }
  return out.str();
}

}  // namespace fusekit::ranking
