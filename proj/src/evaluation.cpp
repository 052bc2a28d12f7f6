#include "dse/evaluation.hpp"

#include "dse/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace dse {

std::string_view to_string(EvaluatorMode mode)
{
  switch (mode)
  {
  case EvaluatorMode::file:
    return "file";
  case EvaluatorMode::process:
    return "process";
  case EvaluatorMode::surrogate:
    return "surrogate";
  }
  return "?";
}

EvaluatorMode parse_evaluator_mode(std::string_view text)
{
  if (text == "file")
    return EvaluatorMode::file;
  if (text == "process")
    return EvaluatorMode::process;
  if (text == "surrogate")
    return EvaluatorMode::surrogate;
  throw InvalidArgument("unknown evaluator mode '" + std::string(text) + "'");
}

RuntimeModel parse_runtime_model(std::string_view text)
{
  if (text == "linear")
    return RuntimeModel::linear;
  if (text == "macs")
    return RuntimeModel::macs;
  throw InvalidArgument("unknown runtime model '" + std::string(text) + "'");
}

nlohmann::json default_request_metadata()
{
  return {
      {"train_steps", 800000},
      {"initial_learning_rate", 0.004},
      {"lr_decay_factor", 0.95},
      {"lr_decay_steps", 200000},
  };
}

void validate(const EvaluatorConfig &c)
{
  if (c.file_path.has_value() != (c.mode == EvaluatorMode::file))
    throw InvalidArgument("file_path must be set exactly when mode is file");
  if (c.command.has_value() != (c.mode == EvaluatorMode::process))
    throw InvalidArgument("command must be set exactly when mode is process");
  if (c.command && c.command->empty())
    throw InvalidArgument("command must not be empty");
  if (!std::isfinite(c.timeout_s) || c.timeout_s <= 0.0)
    throw InvalidArgument("timeout_s must be > 0");
  if (!c.request_metadata.is_object())
    throw InvalidArgument("request_metadata must be a JSON object");
}

void validate(const SurrogateParams &p)
{
  for (double x : {p.a_max, p.c_alpha, p.c_rho, p.r0, p.k_alpha, p.k_rho})
    if (!std::isfinite(x) || x <= 0.0)
      throw InvalidArgument("surrogate parameters must be finite and > 0");
}

// ---------------------------------------------------------------------------
// Surrogate

double surrogate_accuracy(const Theta &theta, const SurrogateParams &p)
{
  return p.a_max * (1.0 - std::exp(-p.c_alpha * theta.alpha)) * (1.0 - std::exp(-p.c_rho * theta.rho()));
}

double surrogate_runtime(const Theta &theta, const SurrogateParams &p, const ModelConfig &model)
{
  if (p.runtime_model == RuntimeModel::linear)
    return p.r0 + p.k_alpha * theta.alpha + p.k_rho * theta.rho();

  const auto reference = count_macs(build_graph(Theta{1.0, Theta::kReferenceResolution}, model));
  const auto macs      = count_macs(build_graph(theta, model));
  return p.r0 + (p.k_alpha + p.k_rho) * static_cast<double>(macs) / static_cast<double>(reference);
}

EvaluationRecord surrogate_evaluate(const Theta &theta, const SurrogateParams &params, const ModelConfig &model)
{
  EvaluationRecord r;
  r.theta     = theta;
  r.params_m  = params_millions(count_params(build_graph(theta, model)));
  r.accuracy  = surrogate_accuracy(theta, params);
  r.runtime_s = surrogate_runtime(theta, params, model);
  r.source    = RecordSource::surrogate;
  r.metadata  = {{"synthetic", true}};
  return r;
}

std::vector<EvaluationRecord> surrogate_sweep_serial(std::span<const Theta> thetas, const SurrogateParams &params,
                                                     const ModelConfig &model)
{
  std::vector<EvaluationRecord> out;
  out.reserve(thetas.size());
  for (const auto &t : thetas)
    out.push_back(surrogate_evaluate(t, params, model));
  return out;
}

std::vector<EvaluationRecord> surrogate_sweep(std::span<const Theta> thetas, const SurrogateParams &params,
                                              const ModelConfig &model)
{
  // build_graph throws on bad thetas; check first so the parallel loop cannot.
  for (const auto &t : thetas)
  {
    validate(t);
    if (t.resolution < Theta::kMinResolution)
      throw ResolutionTooSmall(t.resolution);
  }

  const auto                    n = static_cast<std::int64_t>(thetas.size());
  std::vector<EvaluationRecord> out(thetas.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = surrogate_evaluate(thetas[static_cast<std::size_t>(i)], params, model);
  return out;
}

// ---------------------------------------------------------------------------
// Results CSV

namespace {

std::vector<std::string_view> split(std::string_view line, char sep)
{
  std::vector<std::string_view> out;
  std::size_t                   start = 0;
  while (true)
  {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos)
      break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view field, std::size_t row, const char *name)
{
  T value{};
  const auto *first = field.data();
  const auto *last  = field.data() + field.size();
  if (!field.empty() && *first == '+')
    ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (field.empty() || ec != std::errc{} || ptr != last)
    throw ParseError(row, std::string("cannot parse ") + name + " from '" + std::string(field) + "'");
  return value;
}

}  // namespace

std::vector<EvaluationRecord> parse_results_csv(std::string_view text, const ModelConfig &model)
{
  std::vector<std::string_view> lines = split(text, '\n');
  for (auto &l : lines)
    if (!l.empty() && l.back() == '\r')
      l.remove_suffix(1);
  while (!lines.empty() && lines.back().empty())
    lines.pop_back();

  if (lines.empty())
    throw ParseError(0, "missing header");
  const bool with_params = lines.front() == kResultsHeader;
  if (!with_params && lines.front() != kResultsHeaderShort)
    throw ParseError(0, "header must be '" + std::string(kResultsHeader) + "' (params_m column optional)");

  std::vector<EvaluationRecord> out;
  for (std::size_t i = 1; i < lines.size(); ++i)
  {
    const std::size_t row    = i;
    const auto        fields = split(lines[i], ',');
    if (fields.size() != (with_params ? 5u : 4u))
      throw ParseError(row, "expected " + std::to_string(with_params ? 5 : 4) + " fields, got " +
                                std::to_string(fields.size()));

    EvaluationRecord r;
    r.source           = RecordSource::measured_file;
    r.theta.alpha      = parse_number<double>(fields[0], row, "alpha");
    r.theta.resolution = parse_number<int>(fields[1], row, "resolution");
    r.accuracy         = parse_number<double>(fields[2], row, "map");
    r.runtime_s        = parse_number<double>(fields[3], row, "cpu_time_s");
    const bool have_params = with_params && !fields[4].empty();
    if (have_params)
      r.params_m = parse_number<double>(fields[4], row, "params_m");

    if (!std::isfinite(r.theta.alpha) || r.theta.alpha <= 0.0)
      throw ValidationError(row, "alpha must be > 0");
    if (r.theta.resolution < Theta::kMinResolution)
      throw ValidationError(row, "resolution must be >= " + std::to_string(Theta::kMinResolution));
    if (!have_params)
      r.params_m = params_millions(count_params(build_graph(r.theta, model)));
    try
    {
      check_positive(r);
    }
    catch (const NonPositiveInput &e)
    {
      throw ValidationError(row, e.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<EvaluationRecord> ingest_results_file(const std::filesystem::path &path, const ModelConfig &model)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw InvalidArgument("cannot open results file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_results_csv(buf.str(), model);
}

// ---------------------------------------------------------------------------
// Wire protocol

nlohmann::json make_request(const Theta &theta, const ModelConfig &model, const nlohmann::json &metadata)
{
  return {
      {"v", kProtocolVersion},
      {"alpha", theta.alpha},
      {"resolution", theta.resolution},
      {"num_classes", model.num_classes},
      {"metadata", metadata},
  };
}

EvaluationRecord parse_response(std::string_view line, const Theta &theta, const ModelConfig &model)
{
  nlohmann::json j;
  try
  {
    j = nlohmann::json::parse(line);
  }
  catch (const nlohmann::json::parse_error &e)
  {
    throw ProtocolError(std::string("response is not valid JSON: ") + e.what());
  }
  if (!j.is_object())
    throw ProtocolError("response is not a JSON object");
  if (auto it = j.find("error"); it != j.end())
    throw EvaluatorReported("evaluator reported error: " + (it->is_string() ? it->get<std::string>() : it->dump()));
  if (auto it = j.find("v"); it != j.end() && *it != kProtocolVersion)
    throw ProtocolError("unsupported protocol version " + it->dump());

  const auto number = [&](const char *key) -> double {
    auto it = j.find(key);
    if (it == j.end() || !it->is_number())
      throw ProtocolError(std::string("response field '") + key + "' missing or not a number");
    return it->get<double>();
  };

  EvaluationRecord r;
  r.theta     = theta;
  r.source    = RecordSource::external_process;
  r.accuracy  = number("map");
  r.runtime_s = number("cpu_time_s");
  if (j.contains("params_m") && !j["params_m"].is_null())
    r.params_m = number("params_m");
  else
    r.params_m = params_millions(count_params(build_graph(theta, model)));
  if (auto it = j.find("metadata"); it != j.end() && it->is_object())
    r.metadata = *it;
  check_positive(r);
  return r;
}

// ---------------------------------------------------------------------------
// Evaluators

SurrogateEvaluator::SurrogateEvaluator(SurrogateParams params, ModelConfig model)
    : params_(params), model_(std::move(model))
{
  validate(params_);
}

EvaluationRecord SurrogateEvaluator::evaluate(const Theta &theta) const
{
  return surrogate_evaluate(theta, params_, model_);
}

FileEvaluator::FileEvaluator(std::span<const EvaluationRecord> records)
{
  for (const auto &r : records)
  {
    if (!table_.contains(r.theta))
      order_.push_back(r.theta);
    table_.insert_or_assign(r.theta, r);
  }
}

FileEvaluator::FileEvaluator(const std::filesystem::path &path, const ModelConfig &model)
    : FileEvaluator(ingest_results_file(path, model))
{}

EvaluationRecord FileEvaluator::evaluate(const Theta &theta) const
{
  auto it = table_.find(theta);
  if (it == table_.end())
    throw MissingResult("no row for alpha=" + std::to_string(theta.alpha) +
                        " resolution=" + std::to_string(theta.resolution) + " in results file");
  return it->second;
}

std::vector<Theta> FileEvaluator::thetas() const
{
  return order_;
}

ProcessEvaluator::ProcessEvaluator(EvaluatorConfig config, ModelConfig model)
    : config_(std::move(config)), model_(std::move(model))
{
  validate(config_);
}

EvaluationRecord ProcessEvaluator::evaluate(const Theta &theta) const
{
  return evaluate_external(theta, config_, model_);
}

std::unique_ptr<Evaluator> make_evaluator(const EvaluatorConfig &config, const SurrogateParams &surrogate,
                                          const ModelConfig &model)
{
  validate(config);
  switch (config.mode)
  {
  case EvaluatorMode::file:
    return std::make_unique<FileEvaluator>(*config.file_path, model);
  case EvaluatorMode::process:
    return std::make_unique<ProcessEvaluator>(config, model);
  case EvaluatorMode::surrogate:
    return std::make_unique<SurrogateEvaluator>(surrogate, model);
  }
  throw InvalidArgument("unknown evaluator mode");
}

}  // namespace dse
