#pragma once

#include "dse/evaluation.hpp"
#include "dse/scoring.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace dse {

struct SearchSpace
{
  std::vector<double> alphas;
  std::vector<int>    resolutions;

  friend bool operator==(const SearchSpace &, const SearchSpace &) = default;
};

/// Six width multipliers by six resolutions; 1.15 and 220 are the interior
/// saturation points, the rest follow the usual MobileNetV2 grid.
SearchSpace default_search_space();

/// Non-empty, strictly increasing, alphas > 0, resolutions >= 1.
void validate(const SearchSpace &space);

/// Resolution-major: every alpha at resolutions[0], then resolutions[1], ...
std::vector<Theta> generate_grid(const SearchSpace &space);

enum class FailureKind
{
  timeout,
  protocol,
  process,
  evaluator,  // evaluator answered {"error": ...}
  missing,    // results file has no row for this theta
  invalid,    // record or theta failed validation
};

std::string_view to_string(FailureKind kind);
FailureKind      parse_failure_kind(std::string_view text);

struct FailureRecord
{
  Theta       theta;
  FailureKind kind = FailureKind::evaluator;
  std::string message;

  friend bool operator==(const FailureRecord &, const FailureRecord &) = default;
};

using LedgerEntry = std::variant<ScoredRecord, FailureRecord>;

const Theta &theta_of(const LedgerEntry &entry);

/// Append-only run history. When opened on a path, every append is written
/// through as one JSON line; the first line is a header carrying the schema
/// version, weights and space.
class RunLedger
{
public:
  static constexpr int kSchemaVersion = 1;

  RunLedger(NetScoreWeights weights, SearchSpace space);

  /// Loads an existing ledger file, or creates it with a fresh header.
  /// A trailing partial line (interrupted write) is dropped and truncated
  /// away before new entries are appended.
  static RunLedger open(const std::filesystem::path &path, const NetScoreWeights &weights,
                        const SearchSpace &space);

  /// Loads for reading; weights and space come from the header.
  static RunLedger load(const std::filesystem::path &path);

  RunLedger(RunLedger &&other) noexcept;
  RunLedger &operator=(RunLedger &&) = delete;

  void append(LedgerEntry entry);

  const NetScoreWeights          &weights() const { return weights_; }
  const SearchSpace              &space() const { return space_; }
  const std::vector<LedgerEntry> &entries() const { return entries_; }
  int                             schema_version() const { return kSchemaVersion; }
  const std::optional<std::filesystem::path> &path() const { return path_; }

  /// Latest successful record per theta.
  std::map<Theta, ScoredRecord> successes() const;

  /// Latest entry per theta, success or failure.
  std::map<Theta, LedgerEntry> latest() const;

  bool has_success(const Theta &theta) const;

private:
  NetScoreWeights                      weights_;
  SearchSpace                          space_;
  std::vector<LedgerEntry>             entries_;
  std::optional<std::filesystem::path> path_;
  std::ofstream                        out_;
  mutable std::mutex                   mutex_;
};

struct ExploreOptions
{
  /// Concurrent evaluations; only honored when the evaluator allows it.
  int workers = 1;

  /// Called after each entry is appended (serialized).
  std::function<void(const LedgerEntry &)> on_entry;
};

struct ExploreStats
{
  std::size_t evaluated = 0;  // evaluator calls made
  std::size_t succeeded = 0;
  std::size_t failed    = 0;
  std::size_t skipped   = 0;  // already successful in the ledger
};

/// Evaluates every grid theta that has no successful ledger entry, scores
/// each success on arrival and appends it. Evaluator errors become
/// FailureRecords; only ledger I/O errors propagate.
ExploreStats explore(const SearchSpace &space, const Evaluator &evaluator, RunLedger &ledger,
                     const ExploreOptions &options = {});

/// Strict "a is a better optimum than b": higher score, then smaller
/// params_m, runtime_s, alpha, resolution.
bool better_candidate(const ScoredRecord &a, const ScoredRecord &b);

/// Argmax over the latest success per theta. Throws EmptyLedger.
ScoredRecord select_best(const RunLedger &ledger);

/// Argmax over a record set, OpenMP reduction. Throws EmptyLedger on empty input.
ScoredRecord select_best(std::span<const ScoredRecord> records);

/// Single-threaded reference for the span overload.
ScoredRecord select_best_serial(std::span<const ScoredRecord> records);

}  // namespace dse
