#include "dse/json_io.hpp"

#include "dse/errors.hpp"

#include <fstream>

namespace dse {

void to_json(nlohmann::json &j, const Theta &t)
{
  j = {{"alpha", t.alpha}, {"resolution", t.resolution}};
}

void from_json(const nlohmann::json &j, Theta &t)
{
  j.at("alpha").get_to(t.alpha);
  j.at("resolution").get_to(t.resolution);
}

void to_json(nlohmann::json &j, const NetScoreWeights &w)
{
  j = {{"kappa", w.kappa}, {"beta", w.beta}, {"gamma", w.gamma}};
}

void from_json(const nlohmann::json &j, NetScoreWeights &w)
{
  j.at("kappa").get_to(w.kappa);
  j.at("beta").get_to(w.beta);
  j.at("gamma").get_to(w.gamma);
}

void to_json(nlohmann::json &j, const SearchSpace &s)
{
  j = {{"alphas", s.alphas}, {"resolutions", s.resolutions}};
}

void from_json(const nlohmann::json &j, SearchSpace &s)
{
  j.at("alphas").get_to(s.alphas);
  j.at("resolutions").get_to(s.resolutions);
}

void to_json(nlohmann::json &j, const EvaluationRecord &r)
{
  j = {
      {"alpha", r.theta.alpha},
      {"resolution", r.theta.resolution},
      {"map", r.accuracy},
      {"cpu_time_s", r.runtime_s},
      {"params_m", r.params_m},
      {"source", std::string(to_string(r.source))},
      {"metadata", r.metadata},
  };
}

void from_json(const nlohmann::json &j, EvaluationRecord &r)
{
  j.at("alpha").get_to(r.theta.alpha);
  j.at("resolution").get_to(r.theta.resolution);
  j.at("map").get_to(r.accuracy);
  j.at("cpu_time_s").get_to(r.runtime_s);
  j.at("params_m").get_to(r.params_m);
  r.source   = parse_record_source(j.at("source").get<std::string>());
  r.metadata = j.value("metadata", nlohmann::json::object());
}

void to_json(nlohmann::json &j, const LayerSpec &l)
{
  j = {
      {"kind", std::string(to_string(l.kind))},
      {"kernel", l.kernel},
      {"in_channels", l.in_channels},
      {"out_channels", l.out_channels},
      {"stride", l.stride},
      {"expansion", l.expansion},
      {"batchnorm", l.has_batchnorm},
      {"bias", l.has_bias},
  };
}

void to_json(nlohmann::json &j, const ArchitectureGraph &g)
{
  nlohmann::json sources = nlohmann::json::array();
  for (std::size_t i = 0; i < g.head.feature_sources.size(); ++i)
  {
    const auto &s = g.head.feature_sources[i];
    sources.push_back({{"layer", s.layer_index}, {"side", s.side}, {"anchors", g.head.anchors_per_location[i]}});
  }
  nlohmann::json predictors = nlohmann::json::array();
  for (const auto &p : g.head.predictors)
    predictors.push_back({{"source", p.source},
                          {"kernel", p.kernel},
                          {"in_channels", p.in_channels},
                          {"out_channels", p.out_channels}});

  j = {
      {"alpha", g.theta.alpha},
      {"resolution", g.theta.resolution},
      {"num_classes", g.num_classes},
      {"layers", g.layers},
      {"head",
       {
           {"style", std::string(to_string(g.head.head_style))},
           {"feature_sources", std::move(sources)},
           {"predictors", std::move(predictors)},
       }},
      {"params", count_params(g)},
      {"macs", count_macs(g)},
  };
}

nlohmann::json entry_to_json(const LedgerEntry &entry)
{
  if (const auto *s = std::get_if<ScoredRecord>(&entry))
  {
    nlohmann::json j = s->record;
    j["type"]        = "success";
    j["score"]       = s->score;
    return j;
  }
  const auto &f = std::get<FailureRecord>(entry);
  return {
      {"type", "failure"},
      {"alpha", f.theta.alpha},
      {"resolution", f.theta.resolution},
      {"kind", std::string(to_string(f.kind))},
      {"message", f.message},
  };
}

LedgerEntry entry_from_json(const nlohmann::json &j)
{
  const auto type = j.at("type").get<std::string>();
  if (type == "success")
  {
    ScoredRecord s;
    s.record = j.get<EvaluationRecord>();
    s.score  = j.at("score").get<double>();
    return s;
  }
  if (type == "failure")
  {
    FailureRecord f;
    f.theta   = j.get<Theta>();
    f.kind    = parse_failure_kind(j.at("kind").get<std::string>());
    f.message = j.value("message", "");
    return f;
  }
  throw LedgerError("unknown ledger entry type '" + type + "'");
}

nlohmann::json ledger_header_json(const RunLedger &ledger)
{
  return {
      {"schema_version", ledger.schema_version()},
      {"weights", ledger.weights()},
      {"space", ledger.space()},
  };
}

SearchSpace load_search_space(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in)
    throw InvalidArgument("cannot open space file " + path.string());
  SearchSpace space;
  try
  {
    space = nlohmann::json::parse(in).get<SearchSpace>();
  }
  catch (const nlohmann::json::exception &e)
  {
    throw InvalidArgument("space file " + path.string() + ": " + e.what());
  }
  validate(space);
  return space;
}

}  // namespace dse
