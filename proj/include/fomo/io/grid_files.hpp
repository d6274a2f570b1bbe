// Copyright 2026 The fomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fomo/error.hpp"
#include "fomo/image.hpp"

namespace fomo::io {

/// Multi-channel float grid as stored on disk, pixel-interleaved, top row first.
struct ChannelGrid {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> values;

  double at(int i, int j, int c) const {
    return values[(static_cast<std::size_t>(j) * static_cast<std::size_t>(width) +
                   static_cast<std::size_t>(i)) *
                      static_cast<std::size_t>(channels) +
                  static_cast<std::size_t>(c)];
  }
};

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::FileNotFound, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoFailure, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoFailure, "short write to " + path.string());
}

inline std::uint32_t byteswap32(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0xff00u) | ((v << 8) & 0xff0000u) | (v << 24);
}

}  // namespace detail

/// Portable float map. Header tags: "Pf" one channel, "PF" three channels and
/// "PF<n>" any other channel count (for instance "PF2" for flow fields).
/// Rows are stored bottom-to-top as in classic PFM; a negative scale marks
/// little-endian float32 data. Writing always produces little-endian.
inline std::string encode_pfm(const ChannelGrid& grid) {
  std::string tag = grid.channels == 1   ? "Pf"
                    : grid.channels == 3 ? "PF"
                                         : "PF" + std::to_string(grid.channels);
  std::string out = tag + "\n" + std::to_string(grid.width) + " " +
                    std::to_string(grid.height) + "\n-1.0\n";
  const std::size_t row = static_cast<std::size_t>(grid.width) * grid.channels;
  std::string body(row * grid.height * sizeof(float), '\0');
  char* dst = body.data();
  for (int j = grid.height - 1; j >= 0; --j) {
    for (std::size_t n = 0; n < row; ++n) {
      std::uint32_t bits = std::bit_cast<std::uint32_t>(
          static_cast<float>(grid.values[static_cast<std::size_t>(j) * row + n]));
      if constexpr (std::endian::native == std::endian::big) bits = detail::byteswap32(bits);
      std::memcpy(dst, &bits, sizeof bits);
      dst += sizeof bits;
    }
  }
  return out + body;
}

/// `error` is the code reported for structural problems in the file.
inline ChannelGrid decode_pfm(const std::string& bytes, Errc error = Errc::IoFailure) {
  std::size_t pos = 0;
  const auto token = [&]() {
    while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return bytes.substr(start, pos - start);
  };
  ChannelGrid grid;
  const std::string tag = token();
  try {
    if (tag == "Pf") {
      grid.channels = 1;
    } else if (tag == "PF") {
      grid.channels = 3;
    } else if (tag.size() > 2 && tag.starts_with("PF")) {
      grid.channels = std::stoi(tag.substr(2));
    } else {
      throw Error(error, "not a PFM file (tag '" + tag + "')");
    }
    grid.width = std::stoi(token());
    grid.height = std::stoi(token());
    const double scale = std::stod(token());
    if (grid.channels <= 0 || grid.width <= 0 || grid.height <= 0 || scale == 0.0) {
      throw Error(error, "bad PFM header");
    }
    ++pos;  // single whitespace byte before the raster
    const bool little = scale < 0.0;
    const std::size_t row = static_cast<std::size_t>(grid.width) * grid.channels;
    const std::size_t count = row * grid.height;
    if (bytes.size() < pos + count * sizeof(float)) throw Error(error, "truncated PFM data");
    grid.values.resize(count);
    const bool swap = little != (std::endian::native == std::endian::little);
    const char* src = bytes.data() + pos;
    for (int j = grid.height - 1; j >= 0; --j) {
      for (std::size_t n = 0; n < row; ++n) {
        std::uint32_t bits;
        std::memcpy(&bits, src, sizeof bits);
        src += sizeof bits;
        if (swap) bits = detail::byteswap32(bits);
        grid.values[static_cast<std::size_t>(j) * row + n] = std::bit_cast<float>(bits);
      }
    }
  } catch (const std::logic_error&) {
    throw Error(error, "bad PFM header");
  }
  return grid;
}

/// CSV grid: a "width,height,channels" header line, then one line per row
/// holding width*channels pixel-interleaved values.
inline std::string encode_csv(const ChannelGrid& grid) {
  std::ostringstream out;
  out.precision(17);
  out << grid.width << ',' << grid.height << ',' << grid.channels << '\n';
  const std::size_t row = static_cast<std::size_t>(grid.width) * grid.channels;
  for (int j = 0; j < grid.height; ++j) {
    for (std::size_t n = 0; n < row; ++n) {
      if (n) out << ',';
      out << grid.values[static_cast<std::size_t>(j) * row + n];
    }
    out << '\n';
  }
  return out.str();
}

inline ChannelGrid decode_csv(const std::string& text, Errc error = Errc::IoFailure) {
  std::istringstream in(text);
  std::string line;
  const auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  ChannelGrid grid;
  try {
    if (!std::getline(in, line)) throw Error(error, "empty CSV grid");
    const auto header = split(line);
    if (header.size() != 3) throw Error(error, "CSV header must be width,height,channels");
    grid.width = std::stoi(header[0]);
    grid.height = std::stoi(header[1]);
    grid.channels = std::stoi(header[2]);
    if (grid.width <= 0 || grid.height <= 0 || grid.channels <= 0) {
      throw Error(error, "bad CSV header");
    }
    const std::size_t row = static_cast<std::size_t>(grid.width) * grid.channels;
    for (int j = 0; j < grid.height; ++j) {
      if (!std::getline(in, line)) throw Error(error, "CSV grid has too few rows");
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto cells = split(line);
      if (cells.size() != row) {
        throw Error(error, "CSV row " + std::to_string(j) + " has " +
                               std::to_string(cells.size()) + " values, expected " +
                               std::to_string(row));
      }
      for (const auto& c : cells) grid.values.push_back(std::stod(c));
    }
  } catch (const std::logic_error&) {
    throw Error(error, "unparseable CSV value");
  }
  return grid;
}

inline bool has_extension(const std::filesystem::path& path, const char* ext) {
  std::string e = path.extension().string();
  for (char& ch : e) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return e == ext;
}

namespace detail {

inline void require_grid_extension(const std::filesystem::path& path, Errc error) {
  if (!has_extension(path, ".csv") && !has_extension(path, ".pfm")) {
    throw Error(error, path.string() + ": grid files must end in .pfm or .csv");
  }
}

}  // namespace detail

/// Reads a .pfm or .csv grid, chosen by extension.
inline ChannelGrid read_grid(const std::filesystem::path& path, Errc error = Errc::IoFailure) {
  if (!std::filesystem::exists(path)) {
    throw Error(Errc::FileNotFound, "no such file: " + path.string());
  }
  detail::require_grid_extension(path, error);
  const std::string bytes = detail::read_file(path);
  if (has_extension(path, ".csv")) return decode_csv(bytes, error);
  return decode_pfm(bytes, error);
}

inline void write_grid(const std::filesystem::path& path, const ChannelGrid& grid) {
  detail::require_grid_extension(path, Errc::IoFailure);
  detail::write_file(path, has_extension(path, ".csv") ? encode_csv(grid) : encode_pfm(grid));
}

inline ChannelGrid to_channel_grid(const DenseFlow& flow) {
  ChannelGrid g{flow.width(), flow.height(), 2, {}};
  g.values.reserve(flow.size() * 2);
  for (const Point2& p : flow.data()) {
    g.values.push_back(p.x);
    g.values.push_back(p.y);
  }
  return g;
}

inline ChannelGrid to_channel_grid(const std::vector<Grid<double>>& stack) {
  if (stack.empty()) throw Error(Errc::DimensionMismatch, "empty channel stack");
  ChannelGrid g{stack.front().width(), stack.front().height(),
                static_cast<int>(stack.size()), {}};
  g.values.reserve(stack.front().size() * stack.size());
  for (std::size_t n = 0; n < stack.front().size(); ++n) {
    for (const auto& ch : stack) g.values.push_back(ch.data()[n]);
  }
  return g;
}

inline ChannelGrid to_channel_grid(const Grid<double>& single) {
  return to_channel_grid(std::vector<Grid<double>>{single});
}

inline std::vector<Grid<double>> to_channel_stack(const ChannelGrid& g) {
  std::vector<Grid<double>> stack(static_cast<std::size_t>(g.channels),
                                  Grid<double>(g.width, g.height));
  for (int j = 0; j < g.height; ++j) {
    for (int i = 0; i < g.width; ++i) {
      for (int c = 0; c < g.channels; ++c) stack[static_cast<std::size_t>(c)](i, j) = g.at(i, j, c);
    }
  }
  return stack;
}

inline DenseFlow to_flow(const ChannelGrid& g) {
  if (g.channels != 2) throw Error(Errc::DimensionMismatch, "flow grid needs 2 channels");
  DenseFlow flow(g.width, g.height);
  for (int j = 0; j < g.height; ++j) {
    for (int i = 0; i < g.width; ++i) flow(i, j) = {g.at(i, j, 0), g.at(i, j, 1)};
  }
  return flow;
}

}  // namespace fomo::io
