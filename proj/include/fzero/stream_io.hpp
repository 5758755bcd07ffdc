#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "fzero/errors.hpp"

// Stream files hold one update per record, either as text (one decimal id
// per line) or as raw little-endian 64-bit ids.

namespace fzero {

inline std::vector<std::uint64_t> load_stream_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open for reading: " + path);
  std::vector<std::uint64_t> stream;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty())
      throw ParseError("line " + std::to_string(line_no) + ": empty record");
    if (line.find_first_not_of("0123456789") != std::string::npos)
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected decimal id, got '" + line + "'");
    try {
      stream.push_back(std::stoull(line));
    } catch (const std::exception&) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": id out of range: '" + line + "'");
    }
  }
  if (stream.empty()) throw EmptyFile("stream file has no records: " + path);
  return stream;
}

inline std::vector<std::uint64_t> load_stream_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw Error("cannot open for reading: " + path);
  const auto size = static_cast<std::uint64_t>(in.tellg());
  if (size % 8 != 0)
    throw ParseError("binary stream length " + std::to_string(size) +
                     " is not a multiple of 8 bytes");
  in.seekg(0);
  std::vector<std::uint64_t> stream(size / 8);
  if (size > 0) {
    std::vector<unsigned char> raw(size);
    in.read(reinterpret_cast<char*>(raw.data()),
            static_cast<std::streamsize>(size));
    if (!in) throw Error("short read: " + path);
    for (std::size_t k = 0; k < stream.size(); ++k) {
      std::uint64_t v = 0;
      for (int byte = 7; byte >= 0; --byte)
        v = (v << 8) | raw[k * 8 + static_cast<std::size_t>(byte)];
      stream[k] = v;
    }
  }
  if (stream.empty()) throw EmptyFile("stream file has no records: " + path);
  return stream;
}

inline void save_stream_lines(const std::vector<std::uint64_t>& stream,
                              const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  for (std::uint64_t x : stream) out << x << '\n';
}

inline void save_stream_binary(const std::vector<std::uint64_t>& stream,
                               const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  for (std::uint64_t x : stream) {
    unsigned char raw[8];
    for (int byte = 0; byte < 8; ++byte)
      raw[byte] = static_cast<unsigned char>((x >> (8 * byte)) & 0xff);
    out.write(reinterpret_cast<const char*>(raw), 8);
  }
}

}  // namespace fzero
