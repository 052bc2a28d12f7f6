#pragma once

#include "dse/archmodel.hpp"
#include "dse/scoring.hpp"

#include "json.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dse {

enum class EvaluatorMode
{
  file,
  process,
  surrogate,
};

std::string_view to_string(EvaluatorMode mode);
EvaluatorMode    parse_evaluator_mode(std::string_view text);

/// Training-protocol descriptors forwarded verbatim to external evaluators.
nlohmann::json default_request_metadata();

struct EvaluatorConfig
{
  EvaluatorMode                        mode = EvaluatorMode::surrogate;
  std::optional<std::filesystem::path> file_path;
  std::optional<std::vector<std::string>> command;  // argv; argv[0] resolved via PATH
  double                               timeout_s        = 3600.0;
  nlohmann::json                       request_metadata = default_request_metadata();
};

/// Throws InvalidArgument if the mode-dependent fields are inconsistent.
void validate(const EvaluatorConfig &config);

enum class RuntimeModel
{
  linear,  // r0 + k_alpha * alpha + k_rho * rho
  macs,    // r0 + (k_alpha + k_rho) * macs(theta) / macs(1.0, 224)
};

RuntimeModel parse_runtime_model(std::string_view text);

/// Analytic stand-in for train-and-measure: saturating accuracy, runtime
/// linear in alpha and rho. Output is labeled synthetic.
struct SurrogateParams
{
  double a_max   = 28.0;
  double c_alpha = 3.0;
  double c_rho   = 4.0;
  double r0      = 0.02;
  double k_alpha = 0.08;
  double k_rho   = 0.10;

  RuntimeModel runtime_model = RuntimeModel::linear;
};

void validate(const SurrogateParams &params);

double surrogate_accuracy(const Theta &theta, const SurrogateParams &params);
double surrogate_runtime(const Theta &theta, const SurrogateParams &params,
                         const ModelConfig &model = {});

EvaluationRecord surrogate_evaluate(const Theta &theta, const SurrogateParams &params = {},
                                    const ModelConfig &model = {});

/// Surrogate records for a batch of candidates, OpenMP-parallel over thetas.
std::vector<EvaluationRecord> surrogate_sweep(std::span<const Theta> thetas,
                                              const SurrogateParams &params = {},
                                              const ModelConfig     &model  = {});

/// Single-threaded reference for surrogate_sweep.
std::vector<EvaluationRecord> surrogate_sweep_serial(std::span<const Theta> thetas,
                                                     const SurrogateParams &params = {},
                                                     const ModelConfig     &model  = {});

inline constexpr std::string_view kResultsHeader      = "alpha,resolution,map,cpu_time_s,params_m";
inline constexpr std::string_view kResultsHeaderShort = "alpha,resolution,map,cpu_time_s";

/// Parses a results CSV. Missing params_m is filled from the analytic count.
std::vector<EvaluationRecord> parse_results_csv(std::string_view text, const ModelConfig &model = {});
std::vector<EvaluationRecord> ingest_results_file(const std::filesystem::path &path,
                                                  const ModelConfig           &model = {});

/// Current wire-protocol version carried in every request as "v".
inline constexpr int kProtocolVersion = 1;

nlohmann::json make_request(const Theta &theta, const ModelConfig &model, const nlohmann::json &metadata);

/// Decodes one response line. Throws ProtocolError on malformed content and
/// EvaluatorReported for {"error": ...}.
EvaluationRecord parse_response(std::string_view line, const Theta &theta, const ModelConfig &model);

/// Launches config.command, sends one request line, reads one response line.
/// Throws Timeout, ProtocolError, ProcessError or EvaluatorReported.
EvaluationRecord evaluate_external(const Theta &theta, const EvaluatorConfig &config,
                                   const ModelConfig &model = {});

/// Polymorphic evaluation source used by the search loop. Implementations
/// must be safe to call concurrently.
class Evaluator
{
public:
  virtual ~Evaluator() = default;

  virtual EvaluationRecord evaluate(const Theta &theta) const = 0;
  virtual EvaluatorMode    mode() const                       = 0;

  /// Whether explore may dispatch evaluate() from several threads at once.
  virtual bool concurrent() const { return true; }
};

class SurrogateEvaluator final : public Evaluator
{
public:
  explicit SurrogateEvaluator(SurrogateParams params = {}, ModelConfig model = {});

  EvaluationRecord evaluate(const Theta &theta) const override;
  EvaluatorMode    mode() const override { return EvaluatorMode::surrogate; }

  const SurrogateParams &params() const { return params_; }
  const ModelConfig     &model() const { return model_; }

private:
  SurrogateParams params_;
  ModelConfig     model_;
};

/// Serves records ingested from a results CSV; unknown thetas raise MissingResult.
class FileEvaluator final : public Evaluator
{
public:
  explicit FileEvaluator(std::span<const EvaluationRecord> records);
  FileEvaluator(const std::filesystem::path &path, const ModelConfig &model = {});

  EvaluationRecord evaluate(const Theta &theta) const override;
  EvaluatorMode    mode() const override { return EvaluatorMode::file; }

  /// Distinct thetas in file order (latest row wins on duplicates).
  std::vector<Theta> thetas() const;

private:
  std::map<Theta, EvaluationRecord> table_;
  std::vector<Theta>                order_;
};

class ProcessEvaluator final : public Evaluator
{
public:
  ProcessEvaluator(EvaluatorConfig config, ModelConfig model = {});

  EvaluationRecord evaluate(const Theta &theta) const override;
  EvaluatorMode    mode() const override { return EvaluatorMode::process; }

private:
  EvaluatorConfig config_;
  ModelConfig     model_;
};

std::unique_ptr<Evaluator> make_evaluator(const EvaluatorConfig &config, const SurrogateParams &surrogate = {},
                                          const ModelConfig &model = {});

}  // namespace dse
