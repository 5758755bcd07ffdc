#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fzero/dataset.hpp"
#include "fzero/errors.hpp"

// Text serialization of datasets.  The format is normative and golden-
// tested byte for byte:
//
//   n=<int> alpha=<int>\n
//   <id> <id> ... <id>\n        (one line per shard, ids ascending;
//   ...                          an empty shard is an empty line)

namespace fzero {

inline std::string dataset_to_string(const Dataset& ds) {
  std::string out = "n=" + std::to_string(ds.n) +
                    " alpha=" + std::to_string(ds.shards.size()) + "\n";
  for (const auto& shard : ds.shards) {
    for (std::size_t k = 0; k < shard.size(); ++k) {
      if (k > 0) out += ' ';
      out += std::to_string(shard[k]);
    }
    out += '\n';
  }
  return out;
}

namespace detail {

inline std::uint64_t parse_u64(const std::string& tok, std::size_t line_no) {
  if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
    throw ParseError("line " + std::to_string(line_no) +
                     ": expected unsigned integer, got '" + tok + "'");
  try {
    return std::stoull(tok);
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line_no) +
                     ": integer out of range: '" + tok + "'");
  }
}

}  // namespace detail

inline Dataset dataset_from_string(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw ParseError("line 1: missing header");
  std::uint64_t n = 0, alpha = 0;
  {
    std::istringstream hdr(line);
    std::string ntok, atok;
    hdr >> ntok >> atok;
    if (ntok.rfind("n=", 0) != 0 || atok.rfind("alpha=", 0) != 0)
      throw ParseError("line 1: header must be 'n=<int> alpha=<int>'");
    n = detail::parse_u64(ntok.substr(2), 1);
    alpha = detail::parse_u64(atok.substr(6), 1);
    std::string extra;
    if (hdr >> extra)
      throw ParseError("line 1: trailing content after header");
  }
  std::vector<std::vector<std::uint64_t>> shards;
  shards.reserve(alpha);
  std::size_t line_no = 1;
  while (shards.size() < alpha) {
    if (!std::getline(in, line))
      throw ParseError("line " + std::to_string(line_no + 1) +
                       ": expected " + std::to_string(alpha) +
                       " shard lines, found " + std::to_string(shards.size()));
    ++line_no;
    std::vector<std::uint64_t> shard;
    std::istringstream row(line);
    std::string tok;
    while (row >> tok) shard.push_back(detail::parse_u64(tok, line_no));
    shards.push_back(std::move(shard));
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty())
      throw ParseError("line " + std::to_string(line_no) +
                       ": content after the last shard line");
  }
  Dataset ds{n, std::move(shards)};
  validate_dataset(ds);
  return ds;
}

inline void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  out << dataset_to_string(ds);
}

inline Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open for reading: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return dataset_from_string(buf.str());
}

}  // namespace fzero
