#include "dse/search.hpp"

#include "dse/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <thread>

namespace dse {

SearchSpace default_search_space()
{
  return {{0.35, 0.5, 0.75, 1.0, 1.15, 1.3}, {96, 128, 160, 192, 220, 224}};
}

void validate(const SearchSpace &space)
{
  if (space.alphas.empty() || space.resolutions.empty())
    throw InvalidArgument("search space needs at least one alpha and one resolution");
  for (std::size_t i = 0; i < space.alphas.size(); ++i)
  {
    if (!std::isfinite(space.alphas[i]) || space.alphas[i] <= 0.0)
      throw InvalidArgument("alphas must be finite and > 0");
    if (i > 0 && !(space.alphas[i - 1] < space.alphas[i]))
      throw InvalidArgument("alphas must be strictly increasing");
  }
  for (std::size_t i = 0; i < space.resolutions.size(); ++i)
  {
    if (space.resolutions[i] < 1)
      throw InvalidArgument("resolutions must be >= 1");
    if (i > 0 && space.resolutions[i - 1] >= space.resolutions[i])
      throw InvalidArgument("resolutions must be strictly increasing");
  }
}

std::vector<Theta> generate_grid(const SearchSpace &space)
{
  validate(space);
  std::vector<Theta> grid;
  grid.reserve(space.alphas.size() * space.resolutions.size());
  for (int res : space.resolutions)
    for (double alpha : space.alphas)
      grid.push_back({alpha, res});
  return grid;
}

namespace {

LedgerEntry evaluate_and_score(const Theta &theta, const Evaluator &evaluator, const NetScoreWeights &weights)
{
  const auto fail = [&](FailureKind kind, const std::exception &e) {
    return FailureRecord{theta, kind, e.what()};
  };
  try
  {
    auto record = evaluator.evaluate(theta);
    record.theta = theta;
    const double score = modified_netscore(record, weights);
    return ScoredRecord{std::move(record), score};
  }
  catch (const Timeout &e)
  {
    return fail(FailureKind::timeout, e);
  }
  catch (const ProtocolError &e)
  {
    return fail(FailureKind::protocol, e);
  }
  catch (const ProcessError &e)
  {
    return fail(FailureKind::process, e);
  }
  catch (const MissingResult &e)
  {
    return fail(FailureKind::missing, e);
  }
  catch (const EvaluatorError &e)
  {
    return fail(FailureKind::evaluator, e);
  }
  catch (const LedgerError &)
  {
    throw;
  }
  catch (const Error &e)
  {
    return fail(FailureKind::invalid, e);
  }
}

}  // namespace

ExploreStats explore(const SearchSpace &space, const Evaluator &evaluator, RunLedger &ledger,
                     const ExploreOptions &options)
{
  validate(space);
  if (!ledger.entries().empty() && !(ledger.space() == space))
    throw LedgerError("ledger was recorded for a different search space");

  const auto grid = generate_grid(space);
  const auto done = ledger.successes();

  std::vector<Theta> todo;
  ExploreStats       stats;
  for (const auto &t : grid)
  {
    if (done.contains(t))
      ++stats.skipped;
    else
      todo.push_back(t);
  }

  std::mutex commit_mutex;
  const auto commit = [&](LedgerEntry entry) {
    std::lock_guard lock(commit_mutex);
    ledger.append(entry);
    ++stats.evaluated;
    if (std::holds_alternative<ScoredRecord>(entry))
      ++stats.succeeded;
    else
      ++stats.failed;
    if (options.on_entry)
      options.on_entry(entry);
  };

  const auto workers = static_cast<std::size_t>(
      evaluator.concurrent() ? std::clamp<std::size_t>(static_cast<std::size_t>(std::max(options.workers, 1)), 1,
                                                      std::max<std::size_t>(todo.size(), 1))
                             : 1);

  if (workers == 1)
  {
    for (const auto &t : todo)
      commit(evaluate_and_score(t, evaluator, ledger.weights()));
    return stats;
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool>        abort{false};
  std::exception_ptr       error;
  std::mutex               error_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        while (!abort.load())
        {
          const auto i = next.fetch_add(1);
          if (i >= todo.size())
            return;
          try
          {
            commit(evaluate_and_score(todo[i], evaluator, ledger.weights()));
          }
          catch (...)
          {
            std::lock_guard lock(error_mutex);
            if (!error)
              error = std::current_exception();
            abort.store(true);
          }
        }
      });
  }
  if (error)
    std::rethrow_exception(error);
  return stats;
}

bool better_candidate(const ScoredRecord &a, const ScoredRecord &b)
{
  if (a.score != b.score)
    return a.score > b.score;
  if (a.record.params_m != b.record.params_m)
    return a.record.params_m < b.record.params_m;
  if (a.record.runtime_s != b.record.runtime_s)
    return a.record.runtime_s < b.record.runtime_s;
  if (a.record.theta.alpha != b.record.theta.alpha)
    return a.record.theta.alpha < b.record.theta.alpha;
  return a.record.theta.resolution < b.record.theta.resolution;
}

ScoredRecord select_best_serial(std::span<const ScoredRecord> records)
{
  if (records.empty())
    throw EmptyLedger();
  std::size_t best = 0;
  for (std::size_t i = 1; i < records.size(); ++i)
    if (better_candidate(records[i], records[best]))
      best = i;
  return records[best];
}

ScoredRecord select_best(std::span<const ScoredRecord> records)
{
  if (records.empty())
    throw EmptyLedger();

  const auto n    = static_cast<std::int64_t>(records.size());
  std::int64_t best = 0;
  // Equal candidates resolve to the lower index, matching the serial scan.
  const auto prefer = [&](std::int64_t i, std::int64_t j) {
    const auto &a = records[static_cast<std::size_t>(i)];
    const auto &b = records[static_cast<std::size_t>(j)];
    if (better_candidate(a, b))
      return true;
    if (better_candidate(b, a))
      return false;
    return i < j;
  };

#pragma omp parallel if (n > 4096)
  {
    std::int64_t local = -1;
#pragma omp for nowait schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
      if (local < 0 || prefer(i, local))
        local = i;
#pragma omp critical(dse_select_best)
    if (local >= 0 && prefer(local, best))
      best = local;
  }
  return records[static_cast<std::size_t>(best)];
}

ScoredRecord select_best(const RunLedger &ledger)
{
  const auto successes = ledger.successes();
  std::vector<ScoredRecord> records;
  records.reserve(successes.size());
  for (const auto &[theta, rec] : successes)
    records.push_back(rec);
  return select_best(std::span<const ScoredRecord>(records));
}

}  // namespace dse
