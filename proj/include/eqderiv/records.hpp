#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "eqderiv/ops.hpp"
#include "eqderiv/prompt.hpp"
#include "eqderiv/symbols.hpp"

namespace eqderiv {

inline constexpr int kSchemaVersion = 1;

using Json = nlohmann::ordered_json;

struct DerivationRecord {
  std::string id;
  std::uint64_t seed = 0;
  Derivation derivation;
  std::optional<Perturbation> perturbation;
  std::string static_id;  // empty for static records
};

class RecordError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json to_json(const DerivationRecord& r);
Json to_json(const PromptRecord& r);

/// Throws RecordError on a missing field, a schema mismatch, or LaTeX that
/// does not parse under `table`.
DerivationRecord derivation_record_from_json(const Json& j,
                                             const SymbolTable& table = SymbolTable::parsing_default());
PromptRecord prompt_record_from_json(const Json& j);

void write_jsonl(std::ostream& os, const std::vector<DerivationRecord>& records);
void write_jsonl(std::ostream& os, const std::vector<PromptRecord>& records);

/// One parsed record per non-empty line. Lines that fail are reported
/// through `errors` (line number and message) instead of aborting.
struct LineError {
  std::size_t line;
  std::string message;
};
std::vector<DerivationRecord> read_derivation_jsonl(std::istream& is, std::vector<LineError>* errors = nullptr,
                                                    const SymbolTable& table = SymbolTable::parsing_default());
std::vector<PromptRecord> read_prompt_jsonl(std::istream& is, std::vector<LineError>* errors = nullptr);

}  // namespace eqderiv
