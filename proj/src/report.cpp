#include "dse/report.hpp"

#include "dse/errors.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace dse {

std::string_view to_string(SurfaceMetric metric)
{
  switch (metric)
  {
  case SurfaceMetric::map:
    return "map";
  case SurfaceMetric::cpu_time_s:
    return "cpu_time_s";
  case SurfaceMetric::netscore:
    return "netscore";
  case SurfaceMetric::params_m:
    return "params_m";
  }
  return "?";
}

SurfaceMetric parse_surface_metric(std::string_view text)
{
  for (auto m : {SurfaceMetric::map, SurfaceMetric::cpu_time_s, SurfaceMetric::netscore, SurfaceMetric::params_m})
    if (to_string(m) == text)
      return m;
  throw InvalidArgument("unknown metric '" + std::string(text) + "'");
}

double metric_value(const ScoredRecord &r, SurfaceMetric metric)
{
  switch (metric)
  {
  case SurfaceMetric::map:
    return r.record.accuracy;
  case SurfaceMetric::cpu_time_s:
    return r.record.runtime_s;
  case SurfaceMetric::netscore:
    return r.score;
  case SurfaceMetric::params_m:
    return r.record.params_m;
  }
  return 0.0;
}

std::string format_double(double value)
{
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

SurfaceGrid build_surface(const RunLedger &ledger, SurfaceMetric metric)
{
  SurfaceGrid grid;
  grid.alphas      = ledger.space().alphas;
  grid.resolutions = ledger.space().resolutions;
  grid.metric      = metric;
  grid.values.assign(grid.resolutions.size(), std::vector<std::optional<double>>(grid.alphas.size()));

  const auto successes = ledger.successes();
  for (std::size_t r = 0; r < grid.resolutions.size(); ++r)
    for (std::size_t a = 0; a < grid.alphas.size(); ++a)
      if (auto it = successes.find(Theta{grid.alphas[a], grid.resolutions[r]}); it != successes.end())
        grid.values[r][a] = metric_value(it->second, metric);
  return grid;
}

std::string surface_to_csv(const SurfaceGrid &grid)
{
  std::ostringstream out;
  out << "alpha\\resolution:" << to_string(grid.metric);
  for (int res : grid.resolutions)
    out << ',' << res;
  out << '\n';
  for (std::size_t a = 0; a < grid.alphas.size(); ++a)
  {
    out << format_double(grid.alphas[a]);
    for (std::size_t r = 0; r < grid.resolutions.size(); ++r)
    {
      out << ',';
      if (const auto &v = grid.values[r][a])
        out << format_double(*v);
    }
    out << '\n';
  }
  return out.str();
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line)
{
  std::vector<std::string_view> out;
  std::size_t                   start = 0;
  while (true)
  {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos)
    {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

template <typename T>
T to_number(std::string_view s, std::size_t row)
{
  T    v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
    throw ParseError(row, "bad number '" + std::string(s) + "'");
  return v;
}

}  // namespace

SurfaceGrid parse_surface_csv(std::string_view text)
{
  std::vector<std::string_view> lines;
  std::size_t                   start = 0;
  while (start < text.size())
  {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos)
      nl = text.size();
    auto line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r')
      line.remove_suffix(1);
    if (!line.empty())
      lines.push_back(line);
    start = nl + 1;
  }
  if (lines.empty())
    throw ParseError(0, "empty surface CSV");

  SurfaceGrid grid;
  const auto  header = split_fields(lines[0]);
  const auto  colon  = header[0].rfind(':');
  if (colon == std::string_view::npos)
    throw ParseError(0, "header must start with alpha\\resolution:<metric>");
  grid.metric = parse_surface_metric(header[0].substr(colon + 1));
  for (std::size_t c = 1; c < header.size(); ++c)
    grid.resolutions.push_back(to_number<int>(header[c], 0));

  std::vector<std::vector<std::optional<double>>> rows;  // [alpha][res]
  for (std::size_t i = 1; i < lines.size(); ++i)
  {
    const auto fields = split_fields(lines[i]);
    if (fields.size() != header.size())
      throw ParseError(i, "expected " + std::to_string(header.size()) + " fields");
    grid.alphas.push_back(to_number<double>(fields[0], i));
    auto &row = rows.emplace_back();
    for (std::size_t c = 1; c < fields.size(); ++c)
      row.push_back(fields[c].empty() ? std::nullopt : std::optional(to_number<double>(fields[c], i)));
  }

  grid.values.assign(grid.resolutions.size(), std::vector<std::optional<double>>(grid.alphas.size()));
  for (std::size_t a = 0; a < grid.alphas.size(); ++a)
    for (std::size_t r = 0; r < grid.resolutions.size(); ++r)
      grid.values[r][a] = rows[a][r];
  return grid;
}

std::string ranking_csv(const RunLedger &ledger)
{
  std::vector<ScoredRecord> rows;
  for (const auto &[theta, rec] : ledger.successes())
    rows.push_back(rec);
  std::sort(rows.begin(), rows.end(), better_candidate);

  std::ostringstream out;
  out << "rank,alpha,resolution,netscore,map,cpu_time_s,params_m,source\n";
  for (std::size_t i = 0; i < rows.size(); ++i)
  {
    const auto &r = rows[i];
    out << i + 1 << ',' << format_double(r.record.theta.alpha) << ',' << r.record.theta.resolution << ','
        << format_double(r.score) << ',' << format_double(r.record.accuracy) << ','
        << format_double(r.record.runtime_s) << ',' << format_double(r.record.params_m) << ','
        << to_string(r.record.source) << '\n';
  }
  return out.str();
}

std::string report_notes(const RunLedger &ledger)
{
  std::size_t successes = 0, failures = 0, synthetic = 0;
  for (const auto &[theta, e] : ledger.latest())
  {
    if (const auto *s = std::get_if<ScoredRecord>(&e))
    {
      ++successes;
      if (s->record.source == RecordSource::surrogate)
        ++synthetic;
    }
    else
      ++failures;
  }

  const auto &w = ledger.weights();
  std::ostringstream out;
  out << "weights: kappa=" << format_double(w.kappa) << " beta=" << format_double(w.beta)
      << " gamma=" << format_double(w.gamma) << '\n';
  out << "candidates: " << successes << " scored, " << failures << " failed\n";
  if (synthetic > 0)
    out << "note: " << synthetic
        << " records come from the analytic surrogate and are synthetic, not measurements\n";
  out << "note: params_m counts the full detection network (backbone, extra layers and SSD head)\n";
  if (ledger.space() == default_search_space())
    out << "note: the default grid is a reconstruction; only its endpoints and the 1.15/220 points are "
           "documented exploration values\n";
  return out.str();
}

}  // namespace dse
