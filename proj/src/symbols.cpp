#include "eqderiv/symbols.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include "eqderiv/vocabulary_data.hpp"

namespace eqderiv {

std::string_view symbol_kind_name(SymbolKind kind) {
  switch (kind) {
    case SymbolKind::Variable: return "variable";
    case SymbolKind::FunctionName: return "function";
    case SymbolKind::Constant: return "constant";
  }
  return "variable";
}

namespace {

SymbolKind parse_kind(std::string_view s, std::size_t line) {
  if (s == "variable") return SymbolKind::Variable;
  if (s == "function") return SymbolKind::FunctionName;
  if (s == "constant") return SymbolKind::Constant;
  throw VocabularyError("line " + std::to_string(line) + ": unknown kind '" + std::string(s) + "'");
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool is_letter(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

}  // namespace

bool is_reserved_name(std::string_view name) {
  static constexpr std::array<std::string_view, 13> kCommands = {
      "\\frac", "\\int",  "\\sin",  "\\cos",          "\\log",  "\\partial", "\\left",
      "\\right", "\\cdot", "\\times", "\\operatorname", "\\sqrt", "\\exp"};
  if (name.empty()) return true;
  if (name.find_first_of(" \t\n=+,()") != std::string_view::npos) return true;
  if (name.front() == 'e' || name.front() == 'd') {
    return name.size() == 1 || !is_letter(name[1]);
  }
  for (auto c : kCommands) {
    if (name.substr(0, c.size()) == c && (name.size() == c.size() || !is_letter(name[c.size()]))) {
      return true;
    }
  }
  return false;
}

std::string function_latex(const std::string& name) {
  if (name.size() == 1 || name.front() == '\\') return name;
  return "\\operatorname{" + name + "}";
}

const std::vector<std::string>& default_renaming_pool() {
  static const std::vector<std::string> pool = {"\\alpha", "\\beta", "\\gamma",   "\\zeta",
                                                "\\iota",  "\\kappa", "\\nu",     "\\xi",
                                                "\\tau",   "\\upsilon", "\\chi"};
  return pool;
}

void SymbolTable::add(SymbolEntry entry) {
  if (is_reserved_name(entry.name)) throw VocabularyError("reserved symbol name: " + entry.name);
  if (index_.count(entry.name)) throw VocabularyError("duplicate symbol name: " + entry.name);
  index_.emplace(entry.name, entries_.size());
  entries_.push_back(std::move(entry));
}

void SymbolTable::add(std::string name, SymbolKind kind) {
  std::string latex = name;
  add(SymbolEntry{std::move(name), std::move(latex), kind});
}

bool SymbolTable::contains(const std::string& name) const { return index_.count(name) != 0; }

const SymbolEntry* SymbolTable::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

std::vector<std::string> SymbolTable::pool(SymbolKind role) const {
  std::vector<std::string> out;
  for (const auto& e : entries_) {
    if (e.kind == role || e.kind == SymbolKind::Variable) out.push_back(e.name);
  }
  return out;
}

SymbolTable SymbolTable::merged(const SymbolTable& other) const {
  SymbolTable out = *this;
  for (const auto& e : other.entries_) {
    if (!out.contains(e.name)) out.add(e);
  }
  return out;
}

SymbolTable SymbolTable::parse_tsv(std::string_view text) {
  SymbolTable table;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    std::string_view latex = trim(line.substr(0, tab));
    SymbolKind kind = SymbolKind::Variable;
    if (tab != std::string_view::npos) kind = parse_kind(trim(line.substr(tab + 1)), line_no);
    try {
      table.add(std::string(latex), kind);
    } catch (const VocabularyError& e) {
      throw VocabularyError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return table;
}

SymbolTable SymbolTable::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw VocabularyError("cannot open vocabulary file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_tsv(ss.str());
}

const SymbolTable& SymbolTable::builtin() {
  static const SymbolTable table = parse_tsv(detail::kBuiltinVocabulary);
  return table;
}

const SymbolTable& SymbolTable::parsing_default() {
  static const SymbolTable table = [] {
    SymbolTable t = builtin();
    for (const auto& g : default_renaming_pool()) {
      if (!t.contains(g)) t.add(g, SymbolKind::Variable);
    }
    return t;
  }();
  return table;
}

}  // namespace eqderiv
