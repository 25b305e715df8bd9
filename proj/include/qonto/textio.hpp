#pragma once

// Line-oriented helpers shared by every reader in the library: CRLF/BOM
// handling, trimming, splitting, and the `[section]` document layout used
// by the configuration and lexicon files.

#include <cstddef>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qonto/error.hpp"

namespace qonto::text {

inline std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto p = s.find(sep, start);
    out.emplace_back(s.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start));
    if (p == std::string_view::npos) break;
    start = p + 1;
  }
  return out;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

/// Reads one line, dropping a trailing CR and (on the first line) a UTF-8 BOM.
inline bool getline(std::istream& in, std::string& line, std::size_t& line_no) {
  if (!std::getline(in, line)) return false;
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  return true;
}

inline std::string read_file(const std::string& path, const std::string& module) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(module, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct SectionLine {
  std::string section;  // empty before the first header
  std::size_t line_no;
  std::string content;  // trimmed
};

/// Splits a `[section]`-style document into its entries. Blank lines and
/// lines starting with `#` are skipped.
inline std::vector<SectionLine> read_sections(std::istream& in, const std::string& module) {
  std::vector<SectionLine> out;
  std::string line;
  std::size_t line_no = 0;
  std::string section;
  while (getline(in, line, line_no)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3) throw ParseError(module, line_no, "malformed section header");
      section = std::string(trim(t.substr(1, t.size() - 2)));
      continue;
    }
    out.push_back({section, line_no, std::string(t)});
  }
  return out;
}

}  // namespace qonto::text
