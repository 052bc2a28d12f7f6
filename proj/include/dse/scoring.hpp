#pragma once

#include "dse/archmodel.hpp"

#include "json.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace dse {

/// Exponents on accuracy, parameter count and runtime.
struct NetScoreWeights
{
  double kappa = 1.0;
  double beta  = 0.45;
  double gamma = 0.2;

  friend bool operator==(const NetScoreWeights &, const NetScoreWeights &) = default;
};

/// Throws InvalidArgument unless all three weights are finite and >= 0.
void validate(const NetScoreWeights &weights);

enum class RecordSource
{
  measured_file,
  external_process,
  surrogate,
};

std::string_view to_string(RecordSource source);
RecordSource     parse_record_source(std::string_view text);

struct EvaluationRecord
{
  Theta          theta;
  double         accuracy  = 0.0;  // mAP, percent
  double         params_m  = 0.0;  // millions of trainable parameters
  double         runtime_s = 0.0;  // CPU seconds per inference
  RecordSource   source    = RecordSource::surrogate;
  nlohmann::json metadata  = nlohmann::json::object();

  friend bool operator==(const EvaluationRecord &, const EvaluationRecord &) = default;
};

/// Throws NonPositiveInput naming the first of accuracy/params_m/runtime_s
/// that is not finite and > 0.
void check_positive(const EvaluationRecord &record);

struct ScoredRecord
{
  EvaluationRecord record;
  double           score = 0.0;  // dB

  friend bool operator==(const ScoredRecord &, const ScoredRecord &) = default;
};

/// 20 log10( a^kappa / (p^beta r^gamma) ), evaluated as a weighted sum of
/// logarithms so that extreme exponents do not overflow the ratio.
double modified_netscore(const EvaluationRecord &record, const NetScoreWeights &weights = {});

/// Same objective without the decibel mapping; argmax-equivalent.
double netscore_ratio(const EvaluationRecord &record, const NetScoreWeights &weights = {});

/// Order-preserving. On failure rethrows NonPositiveInput with the index of
/// the offending record prefixed to the message.
std::vector<ScoredRecord> score_all(std::span<const EvaluationRecord> records,
                                    const NetScoreWeights            &weights = {});

/// Single-threaded reference for score_all.
std::vector<ScoredRecord> score_all_serial(std::span<const EvaluationRecord> records,
                                           const NetScoreWeights            &weights = {});

}  // namespace dse
