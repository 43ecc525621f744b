#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <string>
#include <vector>

#include "pixie/bits.hpp"
#include "pixie/error.hpp"
#include "pixie/grid.hpp"
#include "pixie/image.hpp"
#include "pixie/json_util.hpp"
#include "pixie/mapper.hpp"
#include "pixie/simulator.hpp"
#include "pixie/taskgraph.hpp"

namespace pixie {

/// 3x3 mask, row-major, setpoint at the center.
struct Kernel3x3 {
  std::array<Word, 9> coeffs{};

  /// dj, di in [-1, 1].
  Word at(int dj, int di) const { return coeffs[static_cast<std::size_t>((dj + 1) * 3 + (di + 1))]; }

  friend bool operator==(const Kernel3x3&, const Kernel3x3&) = default;
};

inline constexpr Kernel3x3 kSobelGx{{-1, 0, 1, -2, 0, 2, -1, 0, 1}};
inline constexpr Kernel3x3 kSobelGy{{-1, -2, -1, 0, 0, 0, 1, 2, 1}};

inline Kernel3x3 kernel_from_json(const Json& doc) {
  const auto& arr = detail::as_array(doc, "kernel");
  if (arr.size() != 9) throw ParseError("kernel: expected 9 coefficients, found " + std::to_string(arr.size()));
  Kernel3x3 k;
  for (std::size_t i = 0; i < 9; ++i) k.coeffs[i] = detail::as_signed(arr[i], "kernel/" + std::to_string(i));
  return k;
}

inline Kernel3x3 parse_kernel(std::string_view text) { return kernel_from_json(detail::parse_json(text, "kernel")); }

/// Task graph of one mask evaluation.
///
/// Product t (t = 3 * (j + 1) + (i + 1) for the mask offsets j, i in [-1, 1])
/// is mul<t> = p<t> * c<t>, where c<t> is mask coefficient t and p<t> the
/// pixel under it. The products are reduced by a pairwise adder tree:
///   add0..add3 = (mul0+mul1), (mul2+mul3), (mul4+mul5), (mul6+mul7)
///   add4 = add0+add1, add5 = add2+add3, add6 = add4+add5
///   add7 = add6+mul8  -> out
inline TaskGraph build_sobel_graph() {
  TaskGraph g;
  for (int t = 0; t < 9; ++t) g.nodes.push_back({"p" + std::to_string(t), NodeKind::Input, Opcode::None});
  for (int t = 0; t < 9; ++t) g.nodes.push_back({"c" + std::to_string(t), NodeKind::Input, Opcode::None});
  for (int t = 0; t < 9; ++t) {
    const auto id = "mul" + std::to_string(t);
    g.nodes.push_back({id, NodeKind::Op, Opcode::Mul});
    g.edges.push_back({"p" + std::to_string(t), id, 0});
    g.edges.push_back({"c" + std::to_string(t), id, 1});
  }
  auto add = [&](int n, const std::string& a, const std::string& b) {
    const auto id = "add" + std::to_string(n);
    g.nodes.push_back({id, NodeKind::Op, Opcode::Add});
    g.edges.push_back({a, id, 0});
    g.edges.push_back({b, id, 1});
  };
  for (int n = 0; n < 4; ++n) add(n, "mul" + std::to_string(2 * n), "mul" + std::to_string(2 * n + 1));
  add(4, "add0", "add1");
  add(5, "add2", "add3");
  add(6, "add4", "add5");
  add(7, "add6", "mul8");
  g.nodes.push_back({"out", NodeKind::Output, Opcode::None});
  g.edges.push_back({"add7", "out", 0});
  return g;
}

namespace detail {
constexpr std::size_t offset(std::size_t pos, int delta) {
  return static_cast<std::size_t>(static_cast<std::ptrdiff_t>(pos) + delta);
}
}  // namespace detail

inline void require_sobel_size(const Image& img) {
  if (img.width < 3 || img.height < 3)
    throw ValidationError("image is " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                          ", the mask needs at least 3x3");
  if (img.pixels.size() != img.width * img.height) throw ValidationError("image pixel count does not match its size");
}

/// Mask sums at interior pixels, border entries 0. The pixel under mask
/// offset (j, i) of position (y, x) is img[y - j][x - i].
inline std::vector<Word> convolve_interior(const Image& img, const Kernel3x3& k) {
  require_sobel_size(img);
  std::vector<Word> sums(img.width * img.height, 0);
  for (std::size_t y = 1; y + 1 < img.height; ++y) {
    for (std::size_t x = 1; x + 1 < img.width; ++x) {
      Word sum = 0;
      for (int j = -1; j <= 1; ++j)
        for (int i = -1; i <= 1; ++i) sum += k.at(j, i) * img.at(detail::offset(y, -j), detail::offset(x, -i));
      sums[y * img.width + x] = sum;
    }
  }
  return sums;
}

/// clamp(|sum|, 0, 255)
constexpr std::uint8_t to_pixel(Word sum) {
  const Word mag = sum < 0 ? -sum : sum;
  return static_cast<std::uint8_t>(std::min<Word>(mag, 255));
}

/// Software reference: interior pixels get clamp(|sum|, 0, 255), borders 0.
inline Image sobel_reference(const Image& img, const Kernel3x3& k) {
  const auto sums = convolve_interior(img, k);
  Image out(img.width, img.height);
  for (std::size_t i = 0; i < sums.size(); ++i) out.pixels[i] = to_pixel(sums[i]);
  return out;
}

/// Bits a grid needs on every data path to evaluate `k` over 8-bit pixels
/// without wrapping.
inline unsigned sobel_required_bitwidth(const Kernel3x3& k) {
  std::uint64_t abs_sum = 0, abs_max = 255;
  for (auto c : k.coeffs) {
    const auto a = c < 0 ? 0 - static_cast<std::uint64_t>(c) : static_cast<std::uint64_t>(c);
    if (a > (std::uint64_t{1} << 48)) return kMaxBitwidth + 1;
    abs_sum += a;
    abs_max = std::max(abs_max, a);
  }
  return signed_width_for(std::max(abs_sum * 255, abs_max));
}

/// Memory-interface frame for the mask centered on (y, x), in the graph's
/// canonical input order.
inline Frame sobel_frame(const Image& img, const Kernel3x3& k, std::size_t y, std::size_t x,
                         const std::vector<std::string>& order, std::size_t frame_width) {
  std::map<std::string, Word> value;
  for (int j = -1; j <= 1; ++j) {
    for (int i = -1; i <= 1; ++i) {
      const auto t = std::to_string((j + 1) * 3 + (i + 1));
      value["p" + t] = img.at(detail::offset(y, -j), detail::offset(x, -i));
      value["c" + t] = k.at(j, i);
    }
  }
  Frame f(frame_width, 0);
  for (std::size_t n = 0; n < order.size(); ++n) f[n] = value.at(order[n]);
  return f;
}

/// Maps the mask graph onto `spec` and streams one frame per interior pixel
/// through the simulated grid. Same clamp and border policy as
/// sobel_reference.
inline Image run_sobel_on_grid(const Image& img, const Kernel3x3& k, const GridSpec& spec) {
  require_sobel_size(img);
  require_valid(spec);
  const auto g = build_sobel_graph();
  const auto order = input_order(g);
  if (spec.memory_input_count < order.size())
    throw InfeasibleError("memory interface accepts " + std::to_string(spec.memory_input_count) +
                          " words, the mask needs " + std::to_string(order.size()));
  const unsigned need = sobel_required_bitwidth(k);
  unsigned narrowest = spec.memory_input_bitwidth;
  for (const auto& level : spec.levels)
    narrowest = std::min({narrowest, level.pe_input_bitwidth, level.pe_output_bitwidth});
  if (narrowest < need)
    throw ValidationError("kernel needs " + std::to_string(need) + "-bit data paths, grid's narrowest is " +
                          std::to_string(narrowest) + " bits");

  const auto cfg = map_to_grid(g, spec);
  std::vector<Frame> frames;
  frames.reserve((img.width - 2) * (img.height - 2));
  for (std::size_t y = 1; y + 1 < img.height; ++y)
    for (std::size_t x = 1; x + 1 < img.width; ++x)
      frames.push_back(sobel_frame(img, k, y, x, order, spec.memory_input_count));

  const auto result = run(spec, cfg, frames);
  Image out(img.width, img.height);
  std::size_t f = 0;
  for (std::size_t y = 1; y + 1 < img.height; ++y)
    for (std::size_t x = 1; x + 1 < img.width; ++x) out.at(y, x) = to_pixel(result.outputs[f++].values.at(0));
  return out;
}

/// Combines two single-mask results as min(255, round(sqrt(a^2 + b^2))).
inline Image gradient_magnitude(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height) throw ValidationError("gradient images differ in size");
  Image out(a.width, a.height);
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double m = std::hypot(double(a.pixels[i]), double(b.pixels[i]));
    out.pixels[i] = static_cast<std::uint8_t>(std::min(255.0, std::round(m)));
  }
  return out;
}

}  // namespace pixie
