#pragma once

#include "dse/search.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dse {

enum class SurfaceMetric
{
  map,
  cpu_time_s,
  netscore,
  params_m,
};

std::string_view to_string(SurfaceMetric metric);
SurfaceMetric    parse_surface_metric(std::string_view text);

/// Metric values over the (alpha, resolution) plane. values[r][a] holds the
/// cell for resolutions[r] and alphas[a]; nullopt where there is no success.
struct SurfaceGrid
{
  std::vector<double>                             alphas;
  std::vector<int>                                resolutions;
  std::vector<std::vector<std::optional<double>>> values;
  SurfaceMetric                                   metric = SurfaceMetric::netscore;

  friend bool operator==(const SurfaceGrid &, const SurfaceGrid &) = default;
};

double metric_value(const ScoredRecord &record, SurfaceMetric metric);

/// Uses the latest success per theta in the ledger's search space.
SurfaceGrid build_surface(const RunLedger &ledger, SurfaceMetric metric);

/// Rows are alphas, columns are resolutions; top-left cell names the metric.
/// Numbers use the shortest round-trip representation; missing cells are empty.
std::string surface_to_csv(const SurfaceGrid &grid);
SurfaceGrid parse_surface_csv(std::string_view text);

/// Successes sorted best first by the select_best ordering, as CSV.
std::string ranking_csv(const RunLedger &ledger);

/// Human-readable notes that go with an exported report.
std::string report_notes(const RunLedger &ledger);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace dse
