#pragma once

#include <cctype>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pixie/error.hpp"

namespace pixie {

/// 8-bit grayscale image, row-major.
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(std::size_t w, std::size_t h, std::uint8_t fill = 0) : width(w), height(h), pixels(w * h, fill) {}

  std::uint8_t at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }
  std::uint8_t& at(std::size_t row, std::size_t col) { return pixels[row * width + col]; }

  friend bool operator==(const Image&, const Image&) = default;
};

namespace detail {

class PgmReader {
 public:
  explicit PgmReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::uint64_t number(const char* what) {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_]))
      throw ParseError(std::string("PGM: expected ") + what + " at byte " + std::to_string(pos_));
    std::uint64_t v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > (1ULL << 32)) throw ParseError(std::string("PGM: ") + what + " too large");
    }
    return v;
  }

  std::size_t pos_ = 0;
  std::span<const std::uint8_t> bytes_;
};

}  // namespace detail

/// Reads a binary (P5) or ASCII (P2) PGM with maxval <= 255.
inline Image load_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '2'))
    throw ParseError("PGM: missing P5/P2 magic");
  const bool binary = bytes[1] == '5';
  detail::PgmReader in(bytes);
  in.pos_ = 2;
  const auto width = in.number("width");
  const auto height = in.number("height");
  const auto maxval = in.number("maxval");
  if (width == 0 || height == 0) throw ParseError("PGM: zero image dimension");
  if (maxval == 0 || maxval > 255) throw ParseError("PGM: maxval " + std::to_string(maxval) + " not in [1, 255]");

  Image img(width, height);
  if (binary) {
    // Exactly one whitespace byte separates the header from the raster.
    if (in.pos_ >= bytes.size() || !std::isspace(bytes[in.pos_])) throw ParseError("PGM: truncated header");
    ++in.pos_;
    if (bytes.size() - in.pos_ < img.pixels.size())
      throw ParseError("PGM: expected " + std::to_string(img.pixels.size()) + " pixel bytes, found " +
                       std::to_string(bytes.size() - in.pos_));
    for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = bytes[in.pos_ + i];
  } else {
    for (auto& p : img.pixels) {
      const auto v = in.number("pixel value");
      if (v > maxval) throw ParseError("PGM: pixel value " + std::to_string(v) + " exceeds maxval");
      p = static_cast<std::uint8_t>(v);
    }
  }
  for (auto p : img.pixels)
    if (p > maxval) throw ParseError("PGM: pixel value " + std::to_string(p) + " exceeds maxval");
  return img;
}

inline Image load_pgm(const std::string& text) {
  return load_pgm(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

/// Binary P5 with maxval 255.
inline std::vector<std::uint8_t> save_pgm(const Image& img) {
  const std::string header = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  return out;
}

}  // namespace pixie
