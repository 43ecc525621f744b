#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace pixie {

/// PE operation. The numeric values are the bitstream encoding.
enum class Opcode : std::uint8_t {
  None = 0,
  Add = 1,
  Sub = 2,
  Mul = 3,
  Div = 4,
  Gt = 5,
  Eq = 6,
  Buf = 7,
};

inline constexpr unsigned kOpcodeBits = 4;
inline constexpr unsigned kOpcodeCount = 8;

constexpr std::string_view opcode_name(Opcode op) {
  switch (op) {
    case Opcode::None: return "none";
    case Opcode::Add: return "add";
    case Opcode::Sub: return "sub";
    case Opcode::Mul: return "mul";
    case Opcode::Div: return "div";
    case Opcode::Gt: return "gt";
    case Opcode::Eq: return "eq";
    case Opcode::Buf: return "buf";
  }
  return "?";
}

inline std::optional<Opcode> opcode_from_name(std::string_view name) {
  for (unsigned v = 0; v < kOpcodeCount; ++v) {
    auto op = static_cast<Opcode>(v);
    if (opcode_name(op) == name) return op;
  }
  return std::nullopt;
}

inline std::optional<Opcode> opcode_from_value(std::uint64_t value) {
  if (value >= kOpcodeCount) return std::nullopt;
  return static_cast<Opcode>(value);
}

/// True for the operations a task graph may request from a PE.
constexpr bool is_arithmetic(Opcode op) {
  return op != Opcode::None && op != Opcode::Buf;
}

}  // namespace pixie
