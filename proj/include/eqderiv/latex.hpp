#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "eqderiv/expr.hpp"
#include "eqderiv/symbols.hpp"

namespace eqderiv {

class LatexError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A Symbol, function or variable name that the table cannot resolve.
class RenderError : public LatexError {
 public:
  using LatexError::LatexError;
};

class ParseError : public LatexError {
 public:
  ParseError(const std::string& message, std::size_t position)
      : LatexError(message + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class UnknownCommand : public ParseError {
 public:
  UnknownCommand(std::string command, std::size_t position)
      : ParseError("unknown command " + command, position), command_(std::move(command)) {}
  const std::string& command() const { return command_; }

 private:
  std::string command_;
};

// Rendering follows the grammar in docs/latex-grammar.md. The overloads
// without a table skip name resolution.
std::string to_latex(const Expr& e);
std::string to_latex(const Expr& e, const SymbolTable& table);
std::string to_latex(const Equation& eq);
std::string to_latex(const Equation& eq, const SymbolTable& table);

Expr parse_latex(std::string_view s, const SymbolTable& table = SymbolTable::parsing_default());
Equation parse_equation(std::string_view s,
                        const SymbolTable& table = SymbolTable::parsing_default());

}  // namespace eqderiv
