#pragma once

// Configuration file format (version 1):
//
//   format manhattan-config 1
//   extent <M>
//   p <double|none>
//   seed <u64|none>
//   stream <u64|none>
//   generator <id>
//   provenance <sampled|enhanced|hybrid|explicit>
//   rows <2M+1>
//   <run lengths for row b = -M ...>
//   ...
//   end
//
// Each row lists alternating run lengths over a = -M..M, starting with a run
// of open sites (possibly 0). Runs must sum to exactly 2M+1.

#include <algorithm>
#include <filesystem>
#include <istream>
#include <sstream>
#include <string>

#include "manhattan/configuration.hpp"
#include "manhattan/text_io.hpp"

namespace manhattan {

inline constexpr int kConfigFormatVersion = 1;

inline void write_configuration(std::ostream& out, const Configuration& c) {
  const int m = c.extent();
  out << "format manhattan-config " << kConfigFormatVersion << "\n";
  out << "extent " << m << "\n";
  out << "p " << (c.p ? format_double(*c.p) : "none") << "\n";
  out << "seed " << (c.seed ? std::to_string(*c.seed) : "none") << "\n";
  out << "stream " << (c.stream_index ? std::to_string(*c.stream_index) : "none") << "\n";
  out << "generator " << c.generator << "\n";
  out << "provenance " << provenance_name(c.provenance) << "\n";
  out << "rows " << (2 * m + 1) << "\n";
  for (int b = -m; b <= m; ++b) {
    bool state = false;
    int run = 0;
    bool first = true;
    for (int a = -m; a <= m; ++a) {
      if (c.closed({a, b}) == state) {
        ++run;
        continue;
      }
      out << (first ? "" : " ") << run;
      first = false;
      state = !state;
      run = 1;
    }
    out << (first ? "" : " ") << run << "\n";
  }
  out << "end\n";
}

inline std::string configuration_to_string(const Configuration& c) {
  std::ostringstream ss;
  write_configuration(ss, c);
  return ss.str();
}

inline void save(const Configuration& c, const std::filesystem::path& path) {
  write_file_atomic(path, configuration_to_string(c));
}

inline Configuration read_configuration(std::istream& in) {
  LineReader reader(in);
  std::vector<std::string_view> tok;
  auto expect = [&](std::string_view key, std::size_t arity) {
    if (!reader.next(tok)) throw ParseError(reader.line(), "unexpected end of file, expected '" + std::string(key) + "'");
    if (tok[0] != key || tok.size() != arity + 1)
      throw ParseError(reader.line(), "expected '" + std::string(key) + "' with " + std::to_string(arity) + " value(s)");
  };
  auto optional_u64 = [&](std::string_view v) -> std::optional<std::uint64_t> {
    if (v == "none") return std::nullopt;
    std::uint64_t x = 0;
    if (!parse_number(v, x)) throw ParseError(reader.line(), "bad integer '" + std::string(v) + "'");
    return x;
  };

  expect("format", 2);
  if (tok[1] != "manhattan-config") throw ParseError(reader.line(), "not a configuration file");
  int version = 0;
  if (!parse_number(tok[2], version) || version != kConfigFormatVersion)
    throw ParseError(reader.line(), "unsupported format version '" + std::string(tok[2]) + "'");

  expect("extent", 1);
  int m = 0;
  if (!parse_number(tok[1], m) || m < 1) throw ParseError(reader.line(), "bad extent '" + std::string(tok[1]) + "'");
  Configuration c;
  try {
    c = Configuration(m);
  } catch (const std::exception& e) {
    throw ParseError(reader.line(), e.what());
  }

  expect("p", 1);
  if (tok[1] != "none") {
    double p = 0;
    if (!parse_number(tok[1], p) || !(p >= 0 && p <= 1)) throw ParseError(reader.line(), "bad p '" + std::string(tok[1]) + "'");
    c.p = p;
  }
  expect("seed", 1);
  c.seed = optional_u64(tok[1]);
  expect("stream", 1);
  c.stream_index = optional_u64(tok[1]);
  expect("generator", 1);
  c.generator = std::string(tok[1]);
  expect("provenance", 1);
  try {
    c.provenance = parse_provenance(std::string(tok[1]));
  } catch (const std::exception& e) {
    throw ParseError(reader.line(), e.what());
  }
  expect("rows", 1);
  int rows = 0;
  if (!parse_number(tok[1], rows) || rows != 2 * m + 1)
    throw ParseError(reader.line(), "rows must equal 2*extent+1 = " + std::to_string(2 * m + 1));

  for (int b = -m; b <= m; ++b) {
    if (!reader.next(tok)) throw ParseError(reader.line(), "truncated: missing row b=" + std::to_string(b));
    if (tok[0] == "end") throw ParseError(reader.line(), "truncated: 'end' before row b=" + std::to_string(b));
    int a = -m;
    bool state = false;
    for (auto t : tok) {
      int run = 0;
      if (!parse_number(t, run) || run < 0) throw ParseError(reader.line(), "bad run length '" + std::string(t) + "'");
      if (a + run - 1 > m)
        throw ParseError(reader.line(), "site (" + std::to_string(m + 1) + "," + std::to_string(b) +
                                            ") outside extent " + std::to_string(m));
      if (state)
        for (int k = 0; k < run; ++k) c.set_closed({a + k, b}, true);
      a += run;
      state = !state;
    }
    if (a != m + 1)
      throw ParseError(reader.line(), "row b=" + std::to_string(b) + " covers " + std::to_string(a + m) +
                                          " sites, expected " + std::to_string(2 * m + 1));
  }
  if (!reader.next(tok)) throw ParseError(reader.line(), "truncated: missing 'end'");
  if (tok[0] != "end") {
    if (std::all_of(tok[0].begin(), tok[0].end(), [](char ch) { return ch >= '0' && ch <= '9'; }))
      throw ParseError(reader.line(), "site (" + std::to_string(-m) + "," + std::to_string(m + 1) +
                                          ") outside extent " + std::to_string(m));
    throw ParseError(reader.line(), "expected 'end'");
  }
  return c;
}

inline Configuration load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_configuration(in);
}

}  // namespace manhattan
