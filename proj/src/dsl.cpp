#include "giftforge/dsl.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstring>
#include <sstream>

namespace gf::dsl {
namespace {

struct OpcodeInfo {
  const char* name;
  Opcode op;
};

constexpr std::array<OpcodeInfo, 9> kOpcodes = {{
    {"plane", Opcode::Plane},
    {"rect", Opcode::Rect},
    {"circle", Opcode::Circle},
    {"poly", Opcode::Poly},
    {"extrude", Opcode::Extrude},
    {"union", Opcode::Union},
    {"cut", Opcode::Cut},
    {"intersect", Opcode::Intersect},
    {"translate", Opcode::Translate},
}};

std::optional<Opcode> lookup_opcode(std::string_view word) {
  for (const auto& info : kOpcodes)
    if (word == info.name) return info.op;
  return std::nullopt;
}

const char* kSelectorNames[3] = {"XY", "YZ", "XZ"};

std::optional<int> lookup_selector(std::string_view word) {
  for (int i = 0; i < 3; ++i)
    if (word == kSelectorNames[i]) return i;
  return std::nullopt;
}

struct Token {
  std::string_view text;
  int line;
  int column;
};

// Tokens per physical line, '#' starts a comment.
std::vector<std::vector<Token>> tokenize_lines(std::string_view text) {
  std::vector<std::vector<Token>> lines;
  int line_no = 1;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    std::vector<Token> toks;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i >= line.size()) break;
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      toks.push_back({line.substr(i, j - i), line_no, static_cast<int>(i) + 1});
      i = j;
    }
    if (!toks.empty()) lines.push_back(std::move(toks));
    if (eol == std::string_view::npos) break;
    pos = eol + 1;
    ++line_no;
  }
  return lines;
}

bool is_decimal_literal(std::string_view s) {
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
  std::size_t digits = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
    ++i;
    ++digits;
  }
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
      ++i;
      ++digits;
    }
  }
  return i == s.size() && digits > 0;
}

ParseError err(const Token& t, std::string message) {
  return ParseError{t.line, t.column, std::move(message)};
}

}  // namespace

std::optional<double> parse_number(std::string_view token) {
  if (!is_decimal_literal(token)) return std::nullopt;
  std::string_view body = token;
  bool negate = false;
  if (body.front() == '+') {
    body.remove_prefix(1);
  } else if (body.front() == '-') {
    negate = true;
    body.remove_prefix(1);
  }
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(body.data(), body.data() + body.size(), value, std::chars_format::fixed);
  if (ec != std::errc{} || ptr != body.data() + body.size()) return std::nullopt;
  return negate ? -value : value;
}

std::string format_number(double value) {
  char buf[512];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed);
  if (ec != std::errc{}) return "0";
  return std::string(buf, ptr);
}

std::vector<std::string> lex_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& line : tokenize_lines(text))
    for (const auto& tok : line) out.emplace_back(tok.text);
  return out;
}

const char* opcode_name(Opcode op) {
  for (const auto& info : kOpcodes)
    if (info.op == op) return info.name;
  return "?";
}

bool is_boolean(Opcode op) {
  return op == Opcode::Union || op == Opcode::Cut || op == Opcode::Intersect;
}

std::optional<std::string> check_stack(std::span<const Statement> statements) {
  // Sketches and solids live on separate stacks: EXTRUDE pops the top sketch,
  // booleans pop two solids.
  int sketches = 0;
  int solids = 0;
  for (std::size_t i = 0; i < statements.size(); ++i) {
    switch (statements[i].op) {
      case Opcode::Plane:
      case Opcode::Translate:
        break;
      case Opcode::Rect:
      case Opcode::Circle:
      case Opcode::Poly:
        ++sketches;
        break;
      case Opcode::Extrude:
        if (sketches < 1)
          return "extrude at statement " + std::to_string(i + 1) + " has no sketch on the stack";
        --sketches;
        ++solids;
        break;
      case Opcode::Union:
      case Opcode::Cut:
      case Opcode::Intersect:
        if (solids < 2)
          return std::string(opcode_name(statements[i].op)) + " at statement " +
                 std::to_string(i + 1) + " needs two solids on the stack";
        --solids;
        break;
    }
  }
  if (sketches != 0)
    return "program leaves " + std::to_string(sketches) + " unconsumed sketch(es)";
  if (solids != 1)
    return "program must end with exactly one solid on the stack";
  return std::nullopt;
}

ParseResult parse(std::string_view text) {
  const auto lines = tokenize_lines(text);
  CadProgram program;
  program.source_text.assign(text);

  for (const auto& toks : lines) {
    const Token& head = toks.front();
    const auto op = lookup_opcode(head.text);
    if (!op) return err(head, "unknown opcode '" + std::string(head.text) + "'");

    Statement st;
    st.op = *op;
    std::size_t arg_begin = 1;

    if (st.op == Opcode::Plane) {
      if (toks.size() != 3) return err(head, "plane takes a selector and an offset");
      const auto sel = lookup_selector(toks[1].text);
      if (!sel) return err(toks[1], "plane selector must be XY, YZ or XZ");
      st.args.push_back(static_cast<double>(*sel));
      arg_begin = 2;
    }

    for (std::size_t i = arg_begin; i < toks.size(); ++i) {
      const auto value = parse_number(toks[i].text);
      if (!value)
        return err(toks[i], "expected a decimal literal, got '" + std::string(toks[i].text) + "'");
      if (!std::isfinite(*value)) return err(toks[i], "literal is not finite");
      st.args.push_back(*value);
    }

    const std::size_t n = st.args.size();
    switch (st.op) {
      case Opcode::Plane:
        break;  // checked above
      case Opcode::Rect:
        if (n != 2) return err(head, "rect takes width and height");
        break;
      case Opcode::Circle:
        if (n != 1) return err(head, "circle takes a radius");
        if (st.args[0] <= 0.0) return err(head, "circle radius must be positive");
        break;
      case Opcode::Poly:
        if (n < 6 || n % 2 != 0)
          return err(head, "poly takes an even number of coordinates, at least 3 vertices");
        break;
      case Opcode::Extrude:
        if (n != 1) return err(head, "extrude takes a distance");
        if (st.args[0] <= 0.0) return err(head, "extrude distance must be positive");
        break;
      case Opcode::Translate:
        if (n != 3) return err(head, "translate takes dx dy dz");
        break;
      case Opcode::Union:
      case Opcode::Cut:
      case Opcode::Intersect:
        if (n != 0)
          return err(head, std::string(opcode_name(st.op)) + " takes no arguments");
        break;
    }
    program.statements.push_back(std::move(st));
  }

  if (program.statements.empty()) return ParseError{1, 1, "program is empty"};
  if (const auto bad = check_stack(program.statements)) {
    return ParseError{1, 1, *bad};
  }
  return program;
}

std::string serialize(const CadProgram& p) {
  std::string out;
  for (const Statement& st : p.statements) {
    out += opcode_name(st.op);
    std::size_t arg_begin = 0;
    if (st.op == Opcode::Plane) {
      const int sel = static_cast<int>(st.args[0]);
      out += ' ';
      out += kSelectorNames[sel >= 0 && sel < 3 ? sel : 0];
      arg_begin = 1;
    }
    for (std::size_t i = arg_begin; i < st.args.size(); ++i) {
      out += ' ';
      out += format_number(st.args[i]);
    }
    out += '\n';
  }
  return out;
}

ComplexityProfile complexity(const CadProgram& p) {
  ComplexityProfile profile;
  profile.token_count = static_cast<int>(lex_tokens(p.source_text).size());
  for (const Statement& st : p.statements)
    if (st.op == Opcode::Extrude || is_boolean(st.op)) ++profile.op_count;
  return profile;
}

bool structurally_equal(const CadProgram& a, const CadProgram& b) {
  if (a.statements.size() != b.statements.size()) return false;
  for (std::size_t i = 0; i < a.statements.size(); ++i) {
    const Statement& sa = a.statements[i];
    const Statement& sb = b.statements[i];
    if (sa.op != sb.op || sa.args.size() != sb.args.size()) return false;
    for (std::size_t j = 0; j < sa.args.size(); ++j)
      if (std::memcmp(&sa.args[j], &sb.args[j], sizeof(double)) != 0) return false;
  }
  return true;
}

}  // namespace gf::dsl
