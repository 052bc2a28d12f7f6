#include "dse/errors.hpp"
#include "dse/json_io.hpp"
#include "dse/search.hpp"

#include <fstream>
#include <sstream>

namespace dse {

const Theta &theta_of(const LedgerEntry &entry)
{
  return std::visit(
      [](const auto &e) -> const Theta & {
        if constexpr (std::is_same_v<std::decay_t<decltype(e)>, ScoredRecord>)
          return e.record.theta;
        else
          return e.theta;
      },
      entry);
}

std::string_view to_string(FailureKind kind)
{
  switch (kind)
  {
  case FailureKind::timeout:
    return "timeout";
  case FailureKind::protocol:
    return "protocol";
  case FailureKind::process:
    return "process";
  case FailureKind::evaluator:
    return "evaluator";
  case FailureKind::missing:
    return "missing";
  case FailureKind::invalid:
    return "invalid";
  }
  return "?";
}

FailureKind parse_failure_kind(std::string_view text)
{
  for (auto k : {FailureKind::timeout, FailureKind::protocol, FailureKind::process, FailureKind::evaluator,
                 FailureKind::missing, FailureKind::invalid})
    if (to_string(k) == text)
      return k;
  throw LedgerError("unknown failure kind '" + std::string(text) + "'");
}

RunLedger::RunLedger(NetScoreWeights weights, SearchSpace space) : weights_(weights), space_(std::move(space))
{
  validate(weights_);
}

RunLedger::RunLedger(RunLedger &&other) noexcept
    : weights_(other.weights_),
      space_(std::move(other.space_)),
      entries_(std::move(other.entries_)),
      path_(std::move(other.path_)),
      out_(std::move(other.out_))
{}

namespace {

struct ParsedFile
{
  std::optional<nlohmann::json> header;
  std::vector<LedgerEntry>      entries;
  std::uintmax_t                complete_bytes = 0;  // up to and including the last '\n'
};

ParsedFile parse_ledger_file(const std::filesystem::path &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw LedgerError("cannot read ledger " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  ParsedFile  out;
  std::size_t start  = 0;
  std::size_t lineno = 0;
  while (start < text.size())
  {
    const auto nl = text.find('\n', start);
    if (nl == std::string::npos)
      break;  // partial trailing line
    const std::string_view line(text.data() + start, nl - start);
    ++lineno;
    try
    {
      auto j = nlohmann::json::parse(line);
      if (!out.header)
        out.header = std::move(j);
      else
        out.entries.push_back(entry_from_json(j));
    }
    catch (const nlohmann::json::exception &e)
    {
      throw LedgerError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    catch (const Error &e)
    {
      throw LedgerError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    start              = nl + 1;
    out.complete_bytes = start;
  }
  return out;
}

void check_header(const nlohmann::json &header, const std::filesystem::path &path)
{
  const int version = header.value("schema_version", -1);
  if (version != RunLedger::kSchemaVersion)
    throw LedgerError(path.string() + ": unsupported schema_version " + std::to_string(version));
}

}  // namespace

RunLedger RunLedger::load(const std::filesystem::path &path)
{
  auto parsed = parse_ledger_file(path);
  if (!parsed.header)
    throw LedgerError(path.string() + ": missing header line");
  check_header(*parsed.header, path);

  try
  {
    RunLedger ledger(parsed.header->at("weights").get<NetScoreWeights>(),
                     parsed.header->at("space").get<SearchSpace>());
    ledger.entries_ = std::move(parsed.entries);
    return ledger;
  }
  catch (const nlohmann::json::exception &e)
  {
    throw LedgerError(path.string() + ": bad header: " + e.what());
  }
}

RunLedger RunLedger::open(const std::filesystem::path &path, const NetScoreWeights &weights,
                          const SearchSpace &space)
{
  RunLedger ledger(weights, space);
  ledger.path_ = path;

  bool write_header = true;
  if (std::filesystem::exists(path))
  {
    auto parsed = parse_ledger_file(path);
    if (parsed.header)
    {
      check_header(*parsed.header, path);
      NetScoreWeights file_weights;
      SearchSpace     file_space;
      try
      {
        file_weights = parsed.header->at("weights").get<NetScoreWeights>();
        file_space   = parsed.header->at("space").get<SearchSpace>();
      }
      catch (const nlohmann::json::exception &e)
      {
        throw LedgerError(path.string() + ": bad header: " + e.what());
      }

      const bool matches = file_weights == weights && file_space == space;
      if (!matches && !parsed.entries.empty())
        throw LedgerError(path.string() + ": existing ledger was recorded with different weights or search space");
      if (matches)
      {
        write_header    = false;
        ledger.entries_ = std::move(parsed.entries);
        if (std::filesystem::file_size(path) != parsed.complete_bytes)
          std::filesystem::resize_file(path, parsed.complete_bytes);
      }
    }
  }

  if (write_header)
  {
    ledger.out_.open(path, std::ios::binary | std::ios::trunc);
    if (!ledger.out_)
      throw LedgerError("cannot create ledger " + path.string());
    ledger.out_ << ledger_header_json(ledger).dump() << '\n';
    ledger.out_.flush();
  }
  else
  {
    ledger.out_.open(path, std::ios::binary | std::ios::app);
  }
  if (!ledger.out_)
    throw LedgerError("cannot write ledger " + path.string());
  return ledger;
}

void RunLedger::append(LedgerEntry entry)
{
  std::lock_guard lock(mutex_);
  if (path_)
  {
    out_ << entry_to_json(entry).dump() << '\n';
    out_.flush();
    if (!out_)
      throw LedgerError("write to ledger " + path_->string() + " failed");
  }
  entries_.push_back(std::move(entry));
}

std::map<Theta, ScoredRecord> RunLedger::successes() const
{
  std::lock_guard               lock(mutex_);
  std::map<Theta, ScoredRecord> out;
  for (const auto &e : entries_)
    if (const auto *s = std::get_if<ScoredRecord>(&e))
      out.insert_or_assign(s->record.theta, *s);
  return out;
}

std::map<Theta, LedgerEntry> RunLedger::latest() const
{
  std::lock_guard              lock(mutex_);
  std::map<Theta, LedgerEntry> out;
  for (const auto &e : entries_)
    out.insert_or_assign(theta_of(e), e);
  return out;
}

bool RunLedger::has_success(const Theta &theta) const
{
  std::lock_guard lock(mutex_);
  for (const auto &e : entries_)
    if (const auto *s = std::get_if<ScoredRecord>(&e); s && s->record.theta == theta)
      return true;
  return false;
}

}  // namespace dse
