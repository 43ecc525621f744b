#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pixie/bits.hpp"
#include "pixie/error.hpp"
#include "pixie/grid.hpp"
#include "pixie/mapper.hpp"
#include "pixie/opcode.hpp"

namespace pixie {

// Timing model
//
// Every register in the grid updates on the same clock edge from the state of
// the previous cycle:
//   * a channel latches its predecessors' outputs and valid bits and routes
//     them to its output registers in one cycle;
//   * a PE samples its two inputs while in AWAIT_DATA (a port stops sampling
//     once it has seen a valid datum), moves to PROCESS_DATA on the cycle
//     after both ports are enabled, computes its result in PROCESS_DATA and
//     asserts `valid` for the single cycle it spends in VALID_DATA. Leaving
//     VALID_DATA clears the enables and samples the inputs again.
//
// With the frame presented at cycle 0 the first result sits in the output
// interface at cycle 1 + 3L + (L - 1) + 1, and a new frame can enter every
// three cycles.

inline constexpr std::uint64_t kInitiationInterval = 3;

constexpr std::uint64_t first_output_latency(std::size_t levels) {
  return 1 + 3 * static_cast<std::uint64_t>(levels) + (levels - 1) + 1;
}

struct AluResult {
  Word value = 0;
  bool div_by_zero = false;
};

/// One PE operation on sign-extended operands; the result is wrapped to
/// `out_bits`. Division truncates toward zero and yields 0 for a zero divisor.
inline AluResult pe_alu(Opcode op, Word a, Word b, unsigned out_bits) {
  const auto ua = static_cast<std::uint64_t>(a);
  const auto ub = static_cast<std::uint64_t>(b);
  Word r = 0;
  switch (op) {
    case Opcode::None: throw ValidationError("pe_alu: NONE has no result");
    case Opcode::Add: r = static_cast<Word>(ua + ub); break;
    case Opcode::Sub: r = static_cast<Word>(ua - ub); break;
    case Opcode::Mul: r = static_cast<Word>(ua * ub); break;
    case Opcode::Div:
      if (b == 0) return {0, true};
      r = b == -1 ? static_cast<Word>(0 - ua) : a / b;
      break;
    case Opcode::Gt: r = a > b ? 1 : 0; break;
    case Opcode::Eq: r = a == b ? 1 : 0; break;
    case Opcode::Buf: r = a; break;
  }
  return {wrap_to_width(r, out_bits), false};
}

enum class PeFsm : std::uint8_t { AwaitData, ProcessData, ValidData };

constexpr std::string_view fsm_name(PeFsm s) {
  switch (s) {
    case PeFsm::AwaitData: return "AWAIT_DATA";
    case PeFsm::ProcessData: return "PROCESS_DATA";
    case PeFsm::ValidData: return "VALID_DATA";
  }
  return "?";
}

struct InputLatch {
  Word value = 0;
  bool enabled = false;

  friend bool operator==(const InputLatch&, const InputLatch&) = default;
};

struct PeState {
  PeFsm fsm = PeFsm::AwaitData;
  std::array<InputLatch, 2> in_buf{};
  Word out_buf = 0;
  bool valid = false;

  friend bool operator==(const PeState&, const PeState&) = default;
};

struct Register {
  Word value = 0;
  bool valid = false;

  friend bool operator==(const Register&, const Register&) = default;
};

struct ChannelState {
  std::vector<Word> data_regs;
  std::vector<bool> valid_regs;
  std::vector<Register> out_regs;

  friend bool operator==(const ChannelState&, const ChannelState&) = default;
};

using Frame = std::vector<Word>;

/// Complete dynamic state of a configured grid. Advances only through step().
class SimGrid {
 public:
  SimGrid(GridSpec spec, GridConfig config)
      : spec_(std::move(spec)), config_(std::move(config)), channels_(derive_channels(spec_)) {
    check_config(config_, spec_);
    for (const auto& level : spec_.levels) pes_.emplace_back(level.pe_count);
    for (const auto& ch : channels_) {
      ChannelState s;
      s.data_regs.assign(ch.predecessor_count, 0);
      s.valid_regs.assign(ch.predecessor_count, false);
      s.out_regs.assign(ch.output_count, Register{});
      chans_.push_back(std::move(s));
    }
    memory_bus_.assign(spec_.memory_input_count, 0);
  }

  /// Drives `frame` onto the memory interface with start asserted; the
  /// memory-interface channel latches it on the next step.
  void present(std::span<const Word> frame) {
    if (frame.size() != spec_.memory_input_count)
      throw ValidationError("frame has " + std::to_string(frame.size()) + " words, memory interface expects " +
                            std::to_string(spec_.memory_input_count));
    for (std::size_t i = 0; i < frame.size(); ++i) memory_bus_[i] = wrap_to_width(frame[i], spec_.memory_input_bitwidth);
    start_ = true;
  }

  void step() {
    std::vector<ChannelState> next_chans = chans_;
    for (const auto& ch : channels_) {
      auto& s = next_chans[ch.position];
      for (std::size_t i = 0; i < ch.predecessor_count; ++i) {
        if (ch.position == 0) {
          s.data_regs[i] = wrap_to_width(memory_bus_[i], ch.internal_bitwidth);
          s.valid_regs[i] = start_;
        } else {
          const auto& pe = pes_[ch.position - 1][i];
          s.data_regs[i] = wrap_to_width(pe.out_buf, ch.internal_bitwidth);
          s.valid_regs[i] = pe.valid;
        }
      }
      const auto& sel = config_.channel(ch.position).selects;
      for (std::size_t o = 0; o < ch.output_count; ++o) s.out_regs[o] = {s.data_regs[sel[o]], s.valid_regs[sel[o]]};
    }

    auto next_pes = pes_;
    for (std::size_t l = 0; l < spec_.levels.size(); ++l) {
      const auto& input = chans_[l].out_regs;
      const unsigned in_bits = spec_.levels[l].pe_input_bitwidth;
      const unsigned out_bits = spec_.levels[l].pe_output_bitwidth;
      for (std::size_t s = 0; s < spec_.levels[l].pe_count; ++s) {
        const Opcode op = config_.pe_configs[l][s];
        if (op == Opcode::None) continue;
        PeState& pe = next_pes[l][s];
        auto sample = [&] {
          for (std::size_t p = 0; p < 2; ++p) {
            if (pe.in_buf[p].enabled) continue;
            const auto& reg = input[2 * s + p];
            pe.in_buf[p] = {wrap_to_width(reg.value, in_bits), reg.valid};
          }
        };
        switch (pe.fsm) {
          case PeFsm::AwaitData:
            if (pe.in_buf[0].enabled && pe.in_buf[1].enabled) {
              pe.fsm = PeFsm::ProcessData;
            } else {
              sample();
            }
            break;
          case PeFsm::ProcessData: {
            const auto r = pe_alu(op, pe.in_buf[0].value, pe.in_buf[1].value, out_bits);
            pe.out_buf = r.value;
            div_by_zero_ = div_by_zero_ || r.div_by_zero;
            pe.valid = true;
            pe.fsm = PeFsm::ValidData;
            break;
          }
          case PeFsm::ValidData:
            pe.valid = false;
            pe.in_buf[0].enabled = pe.in_buf[1].enabled = false;
            sample();
            pe.fsm = PeFsm::AwaitData;
            break;
        }
      }
    }

    chans_ = std::move(next_chans);
    pes_ = std::move(next_pes);
    start_ = false;
    ++cycle_;
  }

  std::uint64_t cycle() const { return cycle_; }
  bool start() const { return start_; }
  bool div_by_zero() const { return div_by_zero_; }
  const GridSpec& spec() const { return spec_; }
  const GridConfig& config() const { return config_; }
  const std::vector<ChannelSpec>& channel_specs() const { return channels_; }

  /// `level` is 1-based.
  const PeState& pe(std::size_t level, std::size_t slot) const { return pes_.at(level - 1).at(slot); }
  const ChannelState& channel(std::size_t position) const { return chans_.at(position); }
  const ChannelState& output_interface() const { return chans_.back(); }

  friend bool operator==(const SimGrid&, const SimGrid&) = default;

 private:
  GridSpec spec_;
  GridConfig config_;
  std::vector<ChannelSpec> channels_;
  std::vector<std::vector<PeState>> pes_;
  std::vector<ChannelState> chans_;
  std::vector<Word> memory_bus_;
  bool start_ = false;
  bool div_by_zero_ = false;
  std::uint64_t cycle_ = 0;
};

/// Value-returning form of SimGrid::step.
inline SimGrid step(SimGrid g) {
  g.step();
  return g;
}

// ---------------------------------------------------------------------------
// Tracing

struct TraceRow {
  std::uint64_t cycle = 0;
  std::vector<PeState> pes;                   // level-major
  std::vector<std::vector<Register>> channels;  // by position

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

inline TraceRow trace(const SimGrid& g) {
  TraceRow row;
  row.cycle = g.cycle();
  const auto& spec = g.spec();
  for (std::size_t l = 0; l < spec.levels.size(); ++l)
    for (std::size_t s = 0; s < spec.levels[l].pe_count; ++s) row.pes.push_back(g.pe(l + 1, s));
  for (std::size_t k = 0; k < g.channel_specs().size(); ++k) row.channels.push_back(g.channel(k).out_regs);
  return row;
}

/// Columns: cycle, then `<pe>.fsm,<pe>.valid,<pe>.out` for every PE (level
/// major), then `<channel>.out[i].value,<channel>.out[i].valid` for every
/// channel output, channels in position order.
inline std::string trace_csv_header(const GridSpec& spec) {
  std::string h = "cycle";
  for (std::size_t l = 0; l < spec.levels.size(); ++l) {
    for (std::size_t s = 0; s < spec.levels[l].pe_count; ++s) {
      const auto name = pe_instance_name(l + 1, s);
      h += "," + name + ".fsm," + name + ".valid," + name + ".out";
    }
  }
  for (const auto& ch : derive_channels(spec)) {
    const auto name = channel_instance_name(ch);
    for (std::size_t o = 0; o < ch.output_count; ++o) {
      const auto port = name + ".out[" + std::to_string(o) + "]";
      h += "," + port + ".value," + port + ".valid";
    }
  }
  return h;
}

inline std::string trace_csv_row(const TraceRow& row) {
  std::string r = std::to_string(row.cycle);
  for (const auto& pe : row.pes) {
    r += ',';
    r += fsm_name(pe.fsm);
    r += pe.valid ? ",1," : ",0,";
    r += std::to_string(pe.out_buf);
  }
  for (const auto& ch : row.channels) {
    for (const auto& reg : ch) {
      r += ',' + std::to_string(reg.value);
      r += reg.valid ? ",1" : ",0";
    }
  }
  return r;
}

inline void write_trace_csv(std::ostream& os, const GridSpec& spec, std::span<const TraceRow> rows) {
  os << trace_csv_header(spec) << '\n';
  for (const auto& row : rows) os << trace_csv_row(row) << '\n';
}

// ---------------------------------------------------------------------------
// Frame streaming

/// Output-interface registers captured in the cycle they became valid.
struct FrameOutput {
  std::vector<Word> values;
  std::vector<bool> valid;

  friend bool operator==(const FrameOutput&, const FrameOutput&) = default;
};

struct RunResult {
  std::vector<FrameOutput> outputs;
  std::uint64_t cycles = 0;
  bool div_by_zero = false;

  friend bool operator==(const RunResult&, const RunResult&) = default;
};

/// Streams `frames` through the grid, one every kInitiationInterval cycles,
/// and collects one output record per frame. `on_step` sees the grid after
/// every clock.
inline RunResult run(const GridSpec& spec, const GridConfig& config, std::span<const Frame> frames,
                     const std::function<void(const SimGrid&)>& on_step = {}) {
  for (std::size_t f = 0; f < frames.size(); ++f) {
    if (frames[f].size() != spec.memory_input_count)
      throw ValidationError("frame " + std::to_string(f) + " has " + std::to_string(frames[f].size()) +
                            " words, memory interface expects " + std::to_string(spec.memory_input_count));
  }
  SimGrid g(spec, config);
  RunResult result;
  if (frames.empty()) return result;

  const std::uint64_t deadline =
      kInitiationInterval * (frames.size() - 1) + first_output_latency(spec.levels.size()) + kInitiationInterval;
  std::size_t next = 0;
  while (result.outputs.size() < frames.size()) {
    if (g.cycle() >= deadline)
      throw SimulationError("output interface produced " + std::to_string(result.outputs.size()) + " of " +
                            std::to_string(frames.size()) + " results by cycle " + std::to_string(g.cycle()));
    if (next < frames.size() && g.cycle() == kInitiationInterval * next) g.present(frames[next++]);
    g.step();
    if (on_step) on_step(g);
    const auto& regs = g.output_interface().out_regs;
    bool any = false;
    for (const auto& r : regs) any = any || r.valid;
    if (any) {
      FrameOutput out;
      for (const auto& r : regs) {
        out.values.push_back(r.valid ? r.value : 0);
        out.valid.push_back(r.valid);
      }
      result.outputs.push_back(std::move(out));
    }
  }
  result.cycles = g.cycle();
  result.div_by_zero = g.div_by_zero();
  return result;
}

}  // namespace pixie
