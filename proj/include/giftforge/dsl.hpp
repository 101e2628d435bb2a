#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace gf::dsl {

// Minimal sketch-extrude language. A program is a stack machine: RECT, CIRCLE
// and POLY push a sketch, EXTRUDE pops a sketch and pushes a solid, the
// booleans pop two solids and push one, PLANE and TRANSLATE only adjust the
// builder state. A valid program leaves exactly one solid on the stack.

enum class Opcode { Plane, Rect, Circle, Poly, Extrude, Union, Cut, Intersect, Translate };

// Plane selector values stored in args[0] of a PLANE statement.
inline constexpr int kPlaneXY = 0;
inline constexpr int kPlaneYZ = 1;
inline constexpr int kPlaneXZ = 2;

struct Statement {
  Opcode op;
  std::vector<double> args;  // lengths in mm; PLANE args[0] is a selector
};

struct CadProgram {
  std::vector<Statement> statements;
  std::string source_text;
};

struct ParseError {
  int line = 0;    // 1-based
  int column = 0;  // 1-based
  std::string message;
};

using ParseResult = std::variant<CadProgram, ParseError>;

ParseResult parse(std::string_view text);

// Canonical text: one statement per line, single spaces, shortest fixed-point
// numerals. parse(serialize(p)) is structurally identical to p.
std::string serialize(const CadProgram& p);

struct ComplexityProfile {
  int token_count = 0;
  int op_count = 0;  // solid-producing statements: EXTRUDE + booleans
};

ComplexityProfile complexity(const CadProgram& p);

bool structurally_equal(const CadProgram& a, const CadProgram& b);

const char* opcode_name(Opcode op);
bool is_boolean(Opcode op);

// nullopt when the statement sequence is stack-safe; otherwise a description
// of the first violation.
std::optional<std::string> check_stack(std::span<const Statement> statements);

// Shortest decimal string that parses back to exactly the same double, fixed
// notation only (the grammar has no exponents).
std::string format_number(double value);

// Decimal literal, optional sign and fraction, no exponent. nullopt on any
// other shape.
std::optional<double> parse_number(std::string_view token);

// Whitespace-delimited tokens with '#' comments stripped; the basis for
// token_count.
std::vector<std::string> lex_tokens(std::string_view text);

}  // namespace gf::dsl
