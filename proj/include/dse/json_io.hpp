#pragma once

// JSON forms of the domain types: ledger lines, space files, graph dumps.

#include "dse/archmodel.hpp"
#include "dse/scoring.hpp"
#include "dse/search.hpp"

#include "json.hpp"

namespace dse {

void to_json(nlohmann::json &j, const Theta &theta);
void from_json(const nlohmann::json &j, Theta &theta);

void to_json(nlohmann::json &j, const NetScoreWeights &weights);
void from_json(const nlohmann::json &j, NetScoreWeights &weights);

void to_json(nlohmann::json &j, const SearchSpace &space);
void from_json(const nlohmann::json &j, SearchSpace &space);

void to_json(nlohmann::json &j, const EvaluationRecord &record);
void from_json(const nlohmann::json &j, EvaluationRecord &record);

void to_json(nlohmann::json &j, const LayerSpec &layer);
void to_json(nlohmann::json &j, const ArchitectureGraph &graph);

/// One ledger line: {"type":"success",...record...,"score":x} or
/// {"type":"failure","alpha":..,"resolution":..,"kind":..,"message":..}.
nlohmann::json entry_to_json(const LedgerEntry &entry);
LedgerEntry    entry_from_json(const nlohmann::json &j);

nlohmann::json ledger_header_json(const RunLedger &ledger);

/// Reads {"alphas":[...],"resolutions":[...]} and validates it.
SearchSpace load_search_space(const std::filesystem::path &path);

}  // namespace dse
