// Acceptance suite: one line per criterion, non-zero exit if any fails.

#include "cli.hpp"

#include "dse/errors.hpp"
#include "dse/json_io.hpp"
#include "dse/report.hpp"
#include "dse/search.hpp"

#include "oracles.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace dse;
using dse::testing::read_text;
using dse::testing::TempDir;
using dse::testing::write_text;

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kScoreTolerance = 1e-9;

struct Failure
{
  std::string detail;
};

void expect(bool ok, const std::string &detail)
{
  if (!ok)
    throw Failure{detail};
}

std::string fmt(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double seconds_since(Clock::time_point t)
{
  return std::chrono::duration<double>(Clock::now() - t).count();
}

int run_cli(std::vector<std::string> args, std::string *out = nullptr)
{
  args.insert(args.begin(), "dse");
  std::ostringstream o, e;
  const int          status = cli::run(args, o, e);
  if (out)
    *out = o.str();
  return status;
}

// ---------------------------------------------------------------------------

void netscore_oracle_equivalence()
{
  std::mt19937_64                        rng(20240601);
  std::uniform_real_distribution<double> log_a(std::log(0.1), std::log(100.0));
  std::uniform_real_distribution<double> log_p(std::log(0.05), std::log(500.0));
  std::uniform_real_distribution<double> log_r(std::log(1e-3), std::log(10.0));
  std::uniform_real_distribution<double> weight(0.0, 2.0);

  const auto start    = Clock::now();
  double     max_diff = 0.0;
  for (int i = 0; i < 100; ++i)
  {
    EvaluationRecord r;
    r.accuracy  = std::exp(log_a(rng));
    r.params_m  = std::exp(log_p(rng));
    r.runtime_s = std::exp(log_r(rng));
    const NetScoreWeights w{weight(rng), weight(rng), weight(rng)};
    const double          got  = modified_netscore(r, w);
    const double          want = oracle::netscore(r.accuracy, r.params_m, r.runtime_s, w.kappa, w.beta, w.gamma);
    max_diff                   = std::max(max_diff, std::abs(got - want));
  }
  const double elapsed = seconds_since(start);
  expect(max_diff <= kScoreTolerance, "max |diff| " + fmt(max_diff) + " dB");
  expect(elapsed < 1.0, "took " + fmt(elapsed) + " s");
}

void exact_scaling_laws()
{
  std::mt19937_64                        rng(77);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int i = 0; i < 1000; ++i)
  {
    EvaluationRecord base;
    base.accuracy  = 100.0 * u(rng);
    base.params_m  = 10.0 * u(rng);
    base.runtime_s = u(rng);
    const double s = modified_netscore(base);

    auto p = base;
    p.params_m *= 10;
    auto r = base;
    r.runtime_s *= 10;
    auto a = base;
    a.accuracy *= 10;
    const double dp = modified_netscore(p) - s;
    const double dr = modified_netscore(r) - s;
    const double da = modified_netscore(a) - s;
    expect(std::abs(dp + 9.0) <= kScoreTolerance, "x10 params shifted by " + fmt(dp));
    expect(std::abs(dr + 4.0) <= kScoreTolerance, "x10 runtime shifted by " + fmt(dr));
    expect(std::abs(da - 20.0) <= kScoreTolerance, "x10 accuracy shifted by " + fmt(da));
  }
}

void param_count_oracle()
{
  const auto sheet10 = oracle::sheet_total(oracle::detection_sheet(oracle::kPlanAlpha10, 21));
  const auto sheet13 = oracle::sheet_total(oracle::detection_sheet(oracle::kPlanAlpha13, 21));
  expect(sheet10 == oracle::kDetectionParamsAlpha10 && sheet13 == oracle::kDetectionParamsAlpha13,
         "spreadsheet totals drifted from frozen values");

  const auto got10 = count_params(build_graph({1.0, 224}, 21, HeadStyle::ssdlite));
  const auto got13 = count_params(build_graph({1.3, 224}, 21, HeadStyle::ssdlite));
  expect(got10 == sheet10, "alpha=1.0: " + std::to_string(got10) + " != " + std::to_string(sheet10));
  expect(got13 == sheet13, "alpha=1.3: " + std::to_string(got13) + " != " + std::to_string(sheet13));

  const auto space = default_search_space();
  for (int res : space.resolutions)
  {
    std::int64_t prev = 0;
    for (double a : space.alphas)
    {
      const auto p = count_params(build_graph({a, res}));
      expect(p >= prev, "params decreased at alpha=" + fmt(a) + " res=" + std::to_string(res));
      prev = p;
    }
  }
}

void channel_rounding()
{
  std::mt19937_64                        rng(1234);
  std::uniform_int_distribution<int>     base(1, 4096);
  std::uniform_real_distribution<double> alpha(0.01, 4.0);
  for (int i = 0; i < 10000; ++i)
  {
    const int    c = base(rng);
    const double a = alpha(rng);
    const double v = c * a;
    const int    s = scale_channels(c, a, 8);
    const auto   where = "c=" + std::to_string(c) + " alpha=" + fmt(a) + " -> " + std::to_string(s);
    expect(s % 8 == 0, "not a multiple of 8: " + where);
    expect(s >= 8, "below 8: " + where);
    expect(s >= 0.9 * v, "lost more than 10%: " + where);
    expect(s <= std::max(8.0, v + 8.0), "overshoot: " + where);
  }
  for (int c = 8; c <= 8192; c += 8)
    expect(scale_channels(c, 1.0, 8) == c, "alpha=1 changed " + std::to_string(c));
}

ScoredRecord random_scored(std::mt19937_64 &rng, const Theta &t)
{
  std::uniform_int_distribution<int> coarse(0, 4);
  ScoredRecord                       s;
  s.record.theta     = t;
  s.record.accuracy  = 20.0;
  s.record.params_m  = 1.0 + coarse(rng);
  s.record.runtime_s = 0.1 * (1 + coarse(rng));
  s.score            = 30.0 + coarse(rng);  // few distinct values -> many exact ties
  return s;
}

void argmax_correctness()
{
  std::mt19937_64                    rng(99);
  std::uniform_int_distribution<int> count(1, 60);
  const auto                         space = default_search_space();
  auto                               grid  = generate_grid(space);
  const SearchSpace                  wide{{0.25, 0.35, 0.5, 0.75, 1.0, 1.15, 1.3, 1.4},
                                          {96, 128, 160, 192, 220, 224, 256, 288}};
  const auto                         wide_grid = generate_grid(wide);

  for (int trial = 0; trial < 1000; ++trial)
  {
    auto thetas = wide_grid;
    std::shuffle(thetas.begin(), thetas.end(), rng);
    thetas.resize(static_cast<std::size_t>(count(rng)));

    std::vector<ScoredRecord> records;
    for (const auto &t : thetas)
      records.push_back(random_scored(rng, t));
    if (trial % 4 == 0 && records.size() > 1)
    {
      // exact tie on score, params and runtime: alpha/resolution decide
      auto copy         = records[0];
      copy.record.theta = records[1].record.theta;
      records[1]        = copy;
    }

    RunLedger ledger({}, wide);
    for (const auto &r : records)
      ledger.append(r);

    const auto expected = records[oracle::linear_scan_best(records)];
    const auto got      = select_best(ledger);
    expect(got == expected, "trial " + std::to_string(trial) + ": disagreement with linear scan");

    std::shuffle(records.begin(), records.end(), rng);
    RunLedger permuted({}, wide);
    for (const auto &r : records)
      permuted.append(r);
    expect(select_best(permuted) == got, "trial " + std::to_string(trial) + ": not permutation invariant");
  }
}

void end_to_end_surrogate()
{
  TempDir    dir;
  const auto ledger_path = (dir / "run.jsonl").string();
  const auto start       = Clock::now();
  std::string out;
  expect(run_cli({"explore", "--ledger", ledger_path}, &out) == 0, "explore failed");
  const double elapsed = seconds_since(start);
  expect(elapsed < 10.0, "took " + fmt(elapsed) + " s");

  const auto ledger = RunLedger::load(ledger_path);
  expect(ledger.entries().size() == 36, std::to_string(ledger.entries().size()) + " entries");
  expect(ledger.successes().size() == 36, "not every candidate succeeded");
  expect(out.find("best: alpha=") != std::string::npos, "summary does not name the optimum");

  const auto   s   = ledger.successes();
  const double a1  = s.at({1.15, 224}).record.accuracy;
  const double a2  = s.at({1.3, 224}).record.accuracy;
  const double gain = (a2 - a1) / a1;
  expect(gain >= 0.0 && gain < 0.02, "relative mAP gain 1.15->1.3 at 224 is " + fmt(gain));

  const SurrogateParams p;
  const auto            space = default_search_space();
  for (int res : space.resolutions)
    for (std::size_t i = 1; i < space.alphas.size(); ++i)
    {
      const double d  = space.alphas[i] - space.alphas[i - 1];
      const double dr = s.at({space.alphas[i], res}).record.runtime_s - s.at({space.alphas[i - 1], res}).record.runtime_s;
      expect(std::abs(dr - p.k_alpha * d) < 1e-12, "runtime not linear in alpha at res " + std::to_string(res));
    }
  for (double a : space.alphas)
    for (std::size_t i = 1; i < space.resolutions.size(); ++i)
    {
      const double drho = (space.resolutions[i] - space.resolutions[i - 1]) / 224.0;
      const double dr =
          s.at({a, space.resolutions[i]}).record.runtime_s - s.at({a, space.resolutions[i - 1]}).record.runtime_s;
      expect(std::abs(dr - p.k_rho * drho) < 1e-12, "runtime not linear in rho at alpha " + fmt(a));
    }
}

void crash_resume()
{
  TempDir    dir;
  const auto space = default_search_space();

  const auto full_path = dir / "full.jsonl";
  {
    auto               ledger = RunLedger::open(full_path, {}, space);
    SurrogateEvaluator eval;
    explore(space, eval, ledger);
  }
  const auto reference = RunLedger::load(full_path).successes();
  const auto text      = read_text(full_path);

  std::vector<std::size_t> ends;
  for (std::size_t i = 0; i < text.size(); ++i)
    if (text[i] == '\n')
      ends.push_back(i + 1);

  for (std::size_t k = 0; k <= 36; ++k)
  {
    const auto path = dir / ("cut.jsonl");
    std::string cut = text.substr(0, ends[k]);
    if (k < 36)
      cut += text.substr(ends[k], 9);  // torn write
    write_text(path, cut);

    {
      auto               ledger = RunLedger::open(path, {}, space);
      SurrogateEvaluator eval;
      const auto         stats = explore(space, eval, ledger);
      expect(stats.evaluated == 36 - k, "k=" + std::to_string(k) + ": " + std::to_string(stats.evaluated) + " evaluations");
    }
    expect(RunLedger::load(path).successes() == reference, "k=" + std::to_string(k) + ": resumed ledger differs");
  }
}

void protocol_robustness()
{
  TempDir dir;
  write_text(dir / "table.csv", "alpha,resolution,map,cpu_time_s\n"
                                "0.5,192,20.5,0.11\n0.75,192,22.0,0.14\n1.0,192,24.0,0.16\n"
                                "0.5,224,21.0,0.12\n0.75,224,23.0,0.15\n1.0,224,26.0,0.18\n");
  const SearchSpace space{{0.5, 0.75, 1.0}, {192, 224}};

  EvaluatorConfig config;
  config.mode      = EvaluatorMode::process;
  config.timeout_s = 0.5;
  config.command   = std::vector<std::string>{MOCK_EVALUATOR, "--replay", (dir / "table.csv").string(),
                                              "--rule", "0.75:192=malformed",
                                              "--rule", "1.0:192=sleep:30",
                                              "--rule", "0.5:224=exit:9"};
  const ProcessEvaluator eval(config);

  // Direct calls: each failure mode raises its own error type.
  expect(eval.evaluate({0.5, 192}).accuracy == 20.5, "well-formed replay mismatch");
  try
  {
    eval.evaluate({0.75, 192});
    expect(false, "malformed JSON not rejected");
  }
  catch (const ProtocolError &)
  {
  }
  const auto t0 = Clock::now();
  try
  {
    eval.evaluate({1.0, 192});
    expect(false, "sleeping evaluator not timed out");
  }
  catch (const Timeout &)
  {
  }
  expect(seconds_since(t0) < config.timeout_s + 1.0, "timeout overran its grace interval");
  try
  {
    eval.evaluate({0.5, 224});
    expect(false, "nonzero exit not rejected");
  }
  catch (const ProcessError &)
  {
  }

  // Through the search loop: skip-and-log, the grid completes.
  RunLedger      ledger({}, space);
  std::size_t    logged = 0;
  ExploreOptions options;
  options.workers  = 3;
  options.on_entry = [&](const LedgerEntry &e) { logged += std::holds_alternative<FailureRecord>(e); };
  const auto stats = explore(space, eval, ledger, options);
  expect(stats.evaluated == 6, "grid aborted after " + std::to_string(stats.evaluated));
  expect(stats.succeeded == 3 && stats.failed == 3 && logged == 3, "unexpected success/failure split");

  const auto latest = ledger.latest();
  const auto kind   = [&](const Theta &t) { return std::get<FailureRecord>(latest.at(t)).kind; };
  expect(kind({0.75, 192}) == FailureKind::protocol, "malformed not logged as protocol");
  expect(kind({1.0, 192}) == FailureKind::timeout, "sleep not logged as timeout");
  expect(kind({0.5, 224}) == FailureKind::process, "exit not logged as process");
  for (const Theta &t : {Theta{0.5, 192}, Theta{0.75, 224}, Theta{1.0, 224}})
    expect(std::holds_alternative<ScoredRecord>(latest.at(t)), "replay row missing from ledger");
}

void surface_export()
{
  TempDir    dir;
  const auto ledger_path = (dir / "run.jsonl").string();
  expect(run_cli({"explore", "--ledger", ledger_path}) == 0, "explore failed");
  const auto out_dir = dir / "report";
  expect(run_cli({"report", "--ledger", ledger_path, "--out-dir", out_dir.string()}) == 0, "report failed");
  const auto ledger = RunLedger::load(ledger_path);
  expect(ledger.entries().size() == 36, "ledger does not hold 36 entries");

  for (auto metric : {SurfaceMetric::map, SurfaceMetric::cpu_time_s, SurfaceMetric::netscore})
  {
    const auto csv  = read_text(out_dir / ("surface_" + std::string(to_string(metric)) + ".csv"));
    const auto grid = parse_surface_csv(csv);
    expect(grid.alphas.size() == 6 && grid.resolutions.size() == 6, std::string(to_string(metric)) + " not 6x6");
    for (const auto &row : grid.values)
      for (const auto &v : row)
        expect(v.has_value(), std::string(to_string(metric)) + " has a blank cell");
    expect(surface_to_csv(grid) == csv, std::string(to_string(metric)) + " CSV round-trip not exact");
    expect(grid == build_surface(ledger, metric), std::string(to_string(metric)) + " re-import differs");

    if (metric != SurfaceMetric::netscore)
      continue;
    const auto successes = ledger.successes();
    for (std::size_t r = 0; r < 6; ++r)
      for (std::size_t a = 0; a < 6; ++a)
      {
        const auto &rec  = successes.at({grid.alphas[a], grid.resolutions[r]}).record;
        const double want = oracle::netscore(rec.accuracy, rec.params_m, rec.runtime_s);
        expect(std::abs(*grid.values[r][a] - want) <= kScoreTolerance,
               "netscore cell differs from independent scoring by " + fmt(*grid.values[r][a] - want));
      }
  }
}

}  // namespace

int main()
{
  const std::vector<std::pair<const char *, std::function<void()>>> criteria = {
      {"netscore matches 50-digit oracle on 100 random tuples (1e-9 dB, < 1 s)", netscore_oracle_equivalence},
      {"exact scaling laws: x10 p -9 dB, x10 r -4 dB, x10 a +20 dB (1e-9)", exact_scaling_laws},
      {"param count equals spreadsheet oracle at alpha 1.0/1.3, monotone in alpha", param_count_oracle},
      {"channel rounding over 10000 random (c, alpha); alpha=1 identity", channel_rounding},
      {"select_best agrees with linear scan on 1000 ledgers, ties, permutations", argmax_correctness},
      {"surrogate explore: 36 entries < 10 s, mAP gain < 2%, runtime linear", end_to_end_surrogate},
      {"crash-resume from truncated ledger equals uninterrupted run", crash_resume},
      {"protocol robustness: replay, malformed, timeout, exit code, skip-and-log", protocol_robustness},
      {"surface export: three complete 6x6 CSVs, netscore cells, exact round-trip", surface_export},
  };

  int failed = 0;
  for (const auto &[name, run] : criteria)
  {
    const auto start = Clock::now();
    try
    {
      run();
      std::printf("[PASS] %s (%.3f s)\n", name, seconds_since(start));
    }
    catch (const Failure &f)
    {
      ++failed;
      std::printf("[FAIL] %s: %s\n", name, f.detail.c_str());
    }
    catch (const std::exception &e)
    {
      ++failed;
      std::printf("[FAIL] %s: exception: %s\n", name, e.what());
    }
    std::fflush(stdout);
  }
  std::printf("%zu/%zu acceptance criteria passed\n", criteria.size() - static_cast<std::size_t>(failed),
              criteria.size());
  return failed == 0 ? 0 : 1;
}
