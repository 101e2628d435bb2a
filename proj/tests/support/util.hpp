#pragma once

#include <unistd.h>

#include <filesystem>
#include <string>
#include <vector>

#include "giftforge/dsl.hpp"
#include "giftforge/executor.hpp"
#include "giftforge/rng.hpp"
#include "giftforge/voxel.hpp"

namespace testutil {

// Parses and executes or aborts; for fixtures known to be valid.
inline gf::VoxelSolid solid_of(const std::string& text, int resolution = 64) {
  const auto parsed = gf::dsl::parse(text);
  if (std::holds_alternative<gf::dsl::ParseError>(parsed)) {
    const auto& e = std::get<gf::dsl::ParseError>(parsed);
    throw std::runtime_error("fixture parse error at " + std::to_string(e.line) + ":" +
                             std::to_string(e.column) + ": " + e.message);
  }
  auto result = gf::exec::execute(std::get<gf::dsl::CadProgram>(parsed), resolution);
  if (!std::holds_alternative<gf::VoxelSolid>(result))
    throw std::runtime_error("fixture does not execute to a solid");
  return std::get<gf::VoxelSolid>(result);
}

inline gf::dsl::CadProgram program_of(const std::string& text) {
  const auto parsed = gf::dsl::parse(text);
  if (std::holds_alternative<gf::dsl::ParseError>(parsed))
    throw std::runtime_error("fixture parse error");
  return std::get<gf::dsl::CadProgram>(parsed);
}

// Random statement sequences for fuzzing; roughly half are stack-safe.
inline std::vector<std::string> random_opcode_sequence(gf::Prng& rng) {
  static const char* kOps[] = {"plane",   "rect", "circle", "poly",     "extrude",
                               "union",   "cut",  "intersect", "translate"};
  std::vector<std::string> out;
  const int len = 1 + static_cast<int>(rng.next_below(12));
  for (int i = 0; i < len; ++i) out.push_back(kOps[rng.next_below(9)]);
  return out;
}

// Renders a random opcode list into program text with plausible arguments.
inline std::string sequence_to_text(const std::vector<std::string>& ops, gf::Prng& rng) {
  std::string text;
  for (const std::string& op : ops) {
    text += op;
    auto num = [&](double lo, double hi) {
      return gf::dsl::format_number(lo + rng.next_unit() * (hi - lo));
    };
    if (op == "plane") {
      static const char* kSel[] = {"XY", "YZ", "XZ"};
      text += " ";
      text += kSel[rng.next_below(3)];
      text += " " + num(-1, 1);
    } else if (op == "rect") {
      text += " " + num(0.5, 3) + " " + num(0.5, 3);
    } else if (op == "circle") {
      text += " " + num(0.2, 2);
    } else if (op == "poly") {
      text += " 0 0 " + num(1, 3) + " 0 " + num(0.5, 2) + " " + num(1, 2);
    } else if (op == "extrude") {
      text += " " + num(0.2, 2);
    } else if (op == "translate") {
      text += " " + num(-2, 2) + " " + num(-2, 2) + " " + num(-2, 2);
    }
    text += "\n";
  }
  return text;
}

// Constructively valid program: solids built as {plane? translate? sketch
// extrude}, then folded with booleans.
inline std::string random_valid_program(gf::Prng& rng) {
  auto num = [&](double lo, double hi) {
    return gf::dsl::format_number(lo + rng.next_unit() * (hi - lo));
  };
  std::string text;
  const int solids = 1 + static_cast<int>(rng.next_below(3));
  for (int s = 0; s < solids; ++s) {
    if (rng.next_unit() < 0.5) {
      static const char* kSel[] = {"XY", "YZ", "XZ"};
      text += std::string("plane ") + kSel[rng.next_below(3)] + " " + num(-1, 1) + "\n";
    }
    if (rng.next_unit() < 0.3)
      text += "translate " + num(-2, 2) + " " + num(-2, 2) + " " + num(-2, 2) + "\n";
    switch (rng.next_below(3)) {
      case 0:
        text += "rect " + num(0.5, 3) + " " + num(0.5, 3) + "\n";
        break;
      case 1:
        text += "circle " + num(0.2, 2) + "\n";
        break;
      default:
        text += "poly 0 0 " + num(1, 3) + " 0 " + num(0.5, 2) + " " + num(1, 2) + "\n";
        break;
    }
    text += "extrude " + num(0.2, 2) + "\n";
  }
  static const char* kBool[] = {"union", "cut", "intersect"};
  for (int s = 1; s < solids; ++s) text += std::string(kBool[rng.next_below(3)]) + "\n";
  return text;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("giftforge_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace testutil
