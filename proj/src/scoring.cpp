#include "dse/scoring.hpp"

#include "dse/errors.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

namespace dse {

void validate(const NetScoreWeights &w)
{
  for (double x : {w.kappa, w.beta, w.gamma})
    if (!std::isfinite(x) || x < 0.0)
      throw InvalidArgument("NetScore weights must be finite and >= 0");
}

std::string_view to_string(RecordSource source)
{
  switch (source)
  {
  case RecordSource::measured_file:
    return "measured_file";
  case RecordSource::external_process:
    return "external_process";
  case RecordSource::surrogate:
    return "surrogate";
  }
  return "?";
}

RecordSource parse_record_source(std::string_view text)
{
  if (text == "measured_file")
    return RecordSource::measured_file;
  if (text == "external_process")
    return RecordSource::external_process;
  if (text == "surrogate")
    return RecordSource::surrogate;
  throw InvalidArgument("unknown record source '" + std::string(text) + "'");
}

void check_positive(const EvaluationRecord &r)
{
  const auto check = [](const char *name, double v) {
    if (!std::isfinite(v) || v <= 0.0)
      throw NonPositiveInput(name, v);
  };
  check("accuracy", r.accuracy);
  check("params_m", r.params_m);
  check("runtime_s", r.runtime_s);
}

double modified_netscore(const EvaluationRecord &r, const NetScoreWeights &w)
{
  check_positive(r);
  return 20.0 * (w.kappa * std::log10(r.accuracy) - w.beta * std::log10(r.params_m) -
                 w.gamma * std::log10(r.runtime_s));
}

double netscore_ratio(const EvaluationRecord &r, const NetScoreWeights &w)
{
  check_positive(r);
  return std::pow(r.accuracy, w.kappa) / (std::pow(r.params_m, w.beta) * std::pow(r.runtime_s, w.gamma));
}

namespace {

[[noreturn]] void rethrow_at(std::size_t index, const NonPositiveInput &e)
{
  throw NonPositiveInput("record " + std::to_string(index) + ": " + e.field, e.value);
}

}  // namespace

std::vector<ScoredRecord> score_all_serial(std::span<const EvaluationRecord> records,
                                           const NetScoreWeights            &weights)
{
  std::vector<ScoredRecord> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i)
  {
    try
    {
      out.push_back({records[i], modified_netscore(records[i], weights)});
    }
    catch (const NonPositiveInput &e)
    {
      rethrow_at(i, e);
    }
  }
  return out;
}

std::vector<ScoredRecord> score_all(std::span<const EvaluationRecord> records,
                                    const NetScoreWeights            &weights)
{
  const auto n = static_cast<std::int64_t>(records.size());

  // Validate up front so no exception escapes the parallel region and the
  // reported index is the first offender, as in the serial path.
  for (std::int64_t i = 0; i < n; ++i)
  {
    try
    {
      check_positive(records[static_cast<std::size_t>(i)]);
    }
    catch (const NonPositiveInput &e)
    {
      rethrow_at(static_cast<std::size_t>(i), e);
    }
  }

  std::vector<ScoredRecord> out(records.size());
#pragma omp parallel for schedule(static) if (n > 256)
  for (std::int64_t i = 0; i < n; ++i)
  {
    const auto &r = records[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = {r, modified_netscore(r, weights)};
  }
  return out;
}

}  // namespace dse
