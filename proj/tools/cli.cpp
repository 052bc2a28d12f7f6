#include "cli.hpp"

#include "dse/archmodel.hpp"
#include "dse/errors.hpp"
#include "dse/evaluation.hpp"
#include "dse/json_io.hpp"
#include "dse/report.hpp"
#include "dse/scoring.hpp"
#include "dse/search.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace dse::cli {

namespace {

std::string fixed(double value, int decimals)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

std::vector<std::string> split_command(const std::string &text)
{
  std::istringstream       in(text);
  std::vector<std::string> argv;
  for (std::string word; in >> word;)
    argv.push_back(word);
  return argv;
}

void add_weight_flags(CLI::App *cmd, NetScoreWeights &w)
{
  cmd->add_option("--kappa", w.kappa, "accuracy exponent")->capture_default_str();
  cmd->add_option("--beta", w.beta, "parameter-count exponent")->capture_default_str();
  cmd->add_option("--gamma", w.gamma, "runtime exponent")->capture_default_str();
}

void add_model_flags(CLI::App *cmd, ModelConfig &model, std::string &head)
{
  cmd->add_option("--classes", model.num_classes, "foreground classes")->capture_default_str();
  cmd->add_option("--head", head, "detection head style")
      ->check(CLI::IsMember({"ssd", "ssdlite"}))
      ->capture_default_str();
}

std::string describe(const Theta &t)
{
  return "alpha=" + format_double(t.alpha) + " resolution=" + std::to_string(t.resolution);
}

// --- score ------------------------------------------------------------------

struct ScoreArgs
{
  double          accuracy = 0.0, params = 0.0, runtime = 0.0;
  NetScoreWeights weights;
};

int cmd_score(const ScoreArgs &a, std::ostream &out)
{
  validate(a.weights);
  EvaluationRecord r;
  r.accuracy  = a.accuracy;
  r.params_m  = a.params;
  r.runtime_s = a.runtime;
  out << fixed(modified_netscore(r, a.weights), 4) << '\n';
  return 0;
}

// --- count ------------------------------------------------------------------

struct CountArgs
{
  Theta       theta;
  ModelConfig model;
  std::string head = "ssdlite";
  bool        macs = false;
  bool        dump = false;
};

int cmd_count(CountArgs a, std::ostream &out)
{
  a.model.head_style = parse_head_style(a.head);
  const auto graph   = build_graph(a.theta, a.model);
  if (a.dump)
  {
    out << nlohmann::json(graph).dump(2) << '\n';
    return 0;
  }
  const auto params = count_params(graph);
  out << "params " << params << '\n';
  out << "params_m " << fixed(params_millions(params), 6) << '\n';
  if (a.macs)
    out << "macs " << count_macs(graph) << '\n';
  return 0;
}

// --- explore ----------------------------------------------------------------

struct ExploreArgs
{
  std::string     ledger;
  std::string     space_file;
  std::string     mode = "surrogate";
  std::string     results;
  std::string     command;
  std::string     evaluator_config;
  double          timeout_s = 3600.0;
  int             workers   = 1;
  std::string     runtime_model = "linear";
  ModelConfig     model;
  std::string     head = "ssdlite";
  NetScoreWeights weights;
};

SearchSpace space_from_thetas(const std::vector<Theta> &thetas)
{
  std::set<double> alphas;
  std::set<int>    resolutions;
  for (const auto &t : thetas)
  {
    alphas.insert(t.alpha);
    resolutions.insert(t.resolution);
  }
  return {{alphas.begin(), alphas.end()}, {resolutions.begin(), resolutions.end()}};
}

void apply_evaluator_config(const std::string &path, EvaluatorConfig &config, SurrogateParams &surrogate,
                            ExploreArgs &a)
{
  std::ifstream in(path);
  if (!in)
    throw InvalidArgument("cannot open evaluator config " + path);
  nlohmann::json j;
  try
  {
    j = nlohmann::json::parse(in);
    if (j.contains("mode"))
      config.mode = parse_evaluator_mode(j["mode"].get<std::string>());
    if (j.contains("file_path"))
      config.file_path = j["file_path"].get<std::string>();
    if (j.contains("command"))
      config.command = j["command"].get<std::vector<std::string>>();
    if (j.contains("timeout_s"))
      config.timeout_s = j["timeout_s"].get<double>();
    if (j.contains("request_metadata"))
      config.request_metadata = j["request_metadata"];
    if (j.contains("workers"))
      a.workers = j["workers"].get<int>();
    if (const auto s = j.value("surrogate", nlohmann::json::object()); !s.empty())
    {
      surrogate.a_max   = s.value("a_max", surrogate.a_max);
      surrogate.c_alpha = s.value("c_alpha", surrogate.c_alpha);
      surrogate.c_rho   = s.value("c_rho", surrogate.c_rho);
      surrogate.r0      = s.value("r0", surrogate.r0);
      surrogate.k_alpha = s.value("k_alpha", surrogate.k_alpha);
      surrogate.k_rho   = s.value("k_rho", surrogate.k_rho);
      if (s.contains("runtime_model"))
        surrogate.runtime_model = parse_runtime_model(s["runtime_model"].get<std::string>());
    }
  }
  catch (const nlohmann::json::exception &e)
  {
    throw InvalidArgument("evaluator config " + path + ": " + e.what());
  }
}

int cmd_explore(ExploreArgs a, std::ostream &out, std::ostream &err)
{
  a.model.head_style = parse_head_style(a.head);

  EvaluatorConfig config;
  SurrogateParams surrogate;
  config.mode             = parse_evaluator_mode(a.mode);
  config.timeout_s        = a.timeout_s;
  surrogate.runtime_model = parse_runtime_model(a.runtime_model);
  if (!a.results.empty())
    config.file_path = a.results;
  if (!a.command.empty())
    config.command = split_command(a.command);
  if (!a.evaluator_config.empty())
    apply_evaluator_config(a.evaluator_config, config, surrogate, a);

  const auto evaluator = make_evaluator(config, surrogate, a.model);

  SearchSpace space;
  if (!a.space_file.empty())
    space = load_search_space(a.space_file);
  else if (const auto *file = dynamic_cast<const FileEvaluator *>(evaluator.get()))
    space = space_from_thetas(file->thetas());
  else
    space = default_search_space();
  validate(space);

  auto ledger = RunLedger::open(a.ledger, a.weights, space);

  ExploreOptions options;
  options.workers  = a.workers;
  options.on_entry = [&err](const LedgerEntry &e) {
    if (const auto *f = std::get_if<FailureRecord>(&e))
      err << "skip: " << describe(f->theta) << ": " << to_string(f->kind) << ": " << f->message << '\n';
  };
  const auto stats = explore(space, *evaluator, ledger, options);

  out << stats.evaluated << " new evaluations (" << stats.succeeded << " succeeded, " << stats.failed
      << " failed, " << stats.skipped << " skipped)\n";
  try
  {
    const auto best = select_best(ledger);
    out << "best: " << describe(best.record.theta) << " score=" << fixed(best.score, 4) << '\n';
  }
  catch (const EmptyLedger &)
  {
    out << "best: none\n";
  }
  return 0;
}

// --- report -----------------------------------------------------------------

struct ReportArgs
{
  std::string ledger;
  std::string metric = "netscore";
  std::string out_dir;
  bool        ranking = false;
};

void write_file(const std::filesystem::path &path, const std::string &content)
{
  std::ofstream f(path, std::ios::binary);
  f << content;
  if (!f)
    throw Error("cannot write " + path.string());
}

int cmd_report(const ReportArgs &a, std::ostream &out)
{
  const auto ledger = RunLedger::load(a.ledger);
  if (a.out_dir.empty())
  {
    if (a.ranking)
      out << ranking_csv(ledger);
    else
      out << surface_to_csv(build_surface(ledger, parse_surface_metric(a.metric)));
    return 0;
  }

  const std::filesystem::path dir(a.out_dir);
  std::filesystem::create_directories(dir);
  for (auto m : {SurfaceMetric::map, SurfaceMetric::cpu_time_s, SurfaceMetric::netscore, SurfaceMetric::params_m})
  {
    const auto path = dir / ("surface_" + std::string(to_string(m)) + ".csv");
    write_file(path, surface_to_csv(build_surface(ledger, m)));
    out << path.string() << '\n';
  }
  write_file(dir / "ranking.csv", ranking_csv(ledger));
  out << (dir / "ranking.csv").string() << '\n';
  write_file(dir / "notes.txt", report_notes(ledger));
  out << (dir / "notes.txt").string() << '\n';
  return 0;
}

// --- best -------------------------------------------------------------------

int cmd_best(const std::string &ledger_path, std::ostream &out)
{
  const auto ledger = RunLedger::load(ledger_path);
  const auto best   = select_best(ledger);
  out << describe(best.record.theta) << " score=" << fixed(best.score, 4) << '\n';
  out << entry_to_json(best).dump() << '\n';
  return 0;
}

}  // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
  CLI::App app{"Design-space exploration for MobileNetV2-SSD width/resolution trade-offs", "dse"};
  app.require_subcommand(1);

  ScoreArgs score;
  auto     *score_cmd = app.add_subcommand("score", "modified NetScore of one (accuracy, params, runtime) triple");
  score_cmd->add_option("--accuracy", score.accuracy, "mAP in percent")->required();
  score_cmd->add_option("--params", score.params, "parameters in millions")->required();
  score_cmd->add_option("--runtime", score.runtime, "CPU seconds per inference")->required();
  add_weight_flags(score_cmd, score.weights);

  CountArgs count;
  auto     *count_cmd = app.add_subcommand("count", "analytic parameter and MAC count");
  count_cmd->add_option("--alpha", count.theta.alpha, "width multiplier")->required();
  count_cmd->add_option("--resolution", count.theta.resolution, "input side length in pixels")->required();
  add_model_flags(count_cmd, count.model, count.head);
  count_cmd->add_flag("--macs", count.macs, "also print multiply-accumulates");
  count_cmd->add_flag("--dump-graph", count.dump, "print the architecture graph as JSON");

  ExploreArgs explore_args;
  auto       *explore_cmd = app.add_subcommand("explore", "evaluate and score every grid candidate");
  explore_cmd->add_option("--ledger", explore_args.ledger, "run ledger (JSON lines)")->required();
  explore_cmd->add_option("--space", explore_args.space_file, "search space JSON file");
  explore_cmd->add_option("--mode", explore_args.mode, "evaluator mode")
      ->check(CLI::IsMember({"surrogate", "file", "process"}))
      ->capture_default_str();
  explore_cmd->add_option("--results", explore_args.results, "results CSV (file mode)");
  explore_cmd->add_option("--command", explore_args.command, "evaluator command line (process mode)");
  explore_cmd->add_option("--evaluator-config", explore_args.evaluator_config, "evaluator config JSON file");
  explore_cmd->add_option("--timeout", explore_args.timeout_s, "per-evaluation timeout in seconds")
      ->capture_default_str();
  explore_cmd->add_option("--workers", explore_args.workers, "concurrent evaluator processes")
      ->capture_default_str();
  explore_cmd->add_option("--runtime-model", explore_args.runtime_model, "surrogate runtime model")
      ->check(CLI::IsMember({"linear", "macs"}))
      ->capture_default_str();
  add_model_flags(explore_cmd, explore_args.model, explore_args.head);
  add_weight_flags(explore_cmd, explore_args.weights);

  ReportArgs report;
  auto      *report_cmd = app.add_subcommand("report", "export metric surfaces and the ranking table");
  report_cmd->add_option("--ledger", report.ledger, "run ledger")->required();
  report_cmd->add_option("--metric", report.metric, "surface metric printed to stdout")
      ->check(CLI::IsMember({"map", "cpu_time_s", "netscore", "params_m"}))
      ->capture_default_str();
  report_cmd->add_option("--out-dir", report.out_dir, "write all surfaces, ranking and notes here");
  report_cmd->add_flag("--ranking", report.ranking, "print the ranking table instead of a surface");

  std::string best_ledger;
  auto       *best_cmd = app.add_subcommand("best", "print the best candidate in a ledger");
  best_cmd->add_option("--ledger", best_ledger, "run ledger")->required();

  std::vector<const char *> argv;
  for (const auto &a : args)
    argv.push_back(a.c_str());

  try
  {
    app.parse(static_cast<int>(argv.size()), argv.data());
  }
  catch (const CLI::ParseError &e)
  {
    return app.exit(e, out, err);
  }

  try
  {
    if (score_cmd->parsed())
      return cmd_score(score, out);
    if (count_cmd->parsed())
      return cmd_count(count, out);
    if (explore_cmd->parsed())
      return cmd_explore(explore_args, out, err);
    if (report_cmd->parsed())
      return cmd_report(report, out);
    if (best_cmd->parsed())
      return cmd_best(best_ledger, out);
  }
  catch (const std::exception &e)
  {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace dse::cli
