// Copyright 2026 The Stratus Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Small tokenizing helpers shared by the line-oriented file parsers.

#include <charconv>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "stratus/error.hpp"

namespace stratus::text {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) {
      ++i;
    }
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') {
      ++j;
    }
    if (j > i) {
      out.push_back(s.substr(i, j - i));
    }
    i = j;
  }
  return out;
}

template <class T>
std::optional<T> parse_number(std::string_view s) {
  T value{};
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc{} || ptr != end || s.empty()) {
    return std::nullopt;
  }
  return value;
}

template <class T>
T require_number(std::string_view s, std::size_t line, std::string_view what) {
  auto v = parse_number<T>(s);
  if (!v) {
    throw ParseError(line, "invalid " + std::string(what) + " '" + std::string(s) + "'");
  }
  return *v;
}

inline std::optional<bool> parse_bool(std::string_view s) {
  if (s == "true" || s == "yes" || s == "1") {
    return true;
  }
  if (s == "false" || s == "no" || s == "0") {
    return false;
  }
  return std::nullopt;
}

using KeyValues = std::map<std::string, std::string, std::less<>>;

/// Parses `key=value` tokens; a repeated key is an error.
inline KeyValues parse_key_values(const std::vector<std::string_view>& tokens, std::size_t first,
                                  std::size_t line) {
  KeyValues out;
  for (std::size_t i = first; i < tokens.size(); ++i) {
    const auto eq = tokens[i].find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw ParseError(line, "expected key=value, got '" + std::string(tokens[i]) + "'");
    }
    std::string key(tokens[i].substr(0, eq));
    if (out.count(key) != 0) {
      throw ParseError(line, "repeated key '" + key + "'");
    }
    out.emplace(std::move(key), std::string(tokens[i].substr(eq + 1)));
  }
  return out;
}

inline const std::string& require_key(const KeyValues& kv, std::string_view key, std::size_t line) {
  auto it = kv.find(key);
  if (it == kv.end()) {
    throw ParseError(line, "missing " + std::string(key) + "=");
  }
  return it->second;
}

/// Calls `fn(line_no, content)` for each non-blank, non-comment line.
template <class Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto pos = text.find('\n', start);
    if (pos == std::string_view::npos) {
      pos = text.size();
    }
    ++line_no;
    auto line = trim(text.substr(start, pos - start));
    if (!line.empty() && line.front() != '#') {
      fn(line_no, line);
    }
    start = pos + 1;
  }
}

} // namespace stratus::text
