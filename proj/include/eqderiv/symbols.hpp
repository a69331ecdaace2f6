#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace eqderiv {

enum class SymbolKind { Variable, FunctionName, Constant };

std::string_view symbol_kind_name(SymbolKind kind);

// Symbol names are their LaTeX spelling ("P_{e}", "\hat{X}", "x^\prime").
struct SymbolEntry {
  std::string name;
  std::string latex;
  SymbolKind kind{SymbolKind::Variable};
};

class VocabularyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SymbolTable {
 public:
  SymbolTable() = default;

  /// The vocabulary shipped in data/vocabulary.tsv (compiled in).
  static const SymbolTable& builtin();
  /// Builtin vocabulary plus the default renaming pool. Used by the parser.
  static const SymbolTable& parsing_default();

  /// Tab-separated "latex<TAB>kind" lines; '#' starts a comment.
  static SymbolTable parse_tsv(std::string_view text);
  static SymbolTable load(const std::string& path);

  /// Throws VocabularyError on a duplicate or reserved name.
  void add(SymbolEntry entry);
  void add(std::string name, SymbolKind kind);

  bool contains(const std::string& name) const;
  const SymbolEntry* find(const std::string& name) const;
  const std::vector<SymbolEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  /// Names usable in the given role, in file order. Variable entries can
  /// serve as any role; FunctionName and Constant entries only as their own.
  std::vector<std::string> pool(SymbolKind role) const;

  SymbolTable merged(const SymbolTable& other) const;

 private:
  std::vector<SymbolEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// The default 11-letter renaming pool (alpha beta gamma zeta iota kappa nu
/// xi tau upsilon chi). Disjoint from the builtin vocabulary.
const std::vector<std::string>& default_renaming_pool();

/// LaTeX for a name used as a function head: multi-character plain names
/// such as "t_{1}" get \operatorname{..}; commands like \phi stay as-is.
std::string function_latex(const std::string& name);

/// True for names the grammar reserves ("e", "d" and anything starting with
/// those letters followed by a non-letter, plus structural commands).
bool is_reserved_name(std::string_view name);

}  // namespace eqderiv
