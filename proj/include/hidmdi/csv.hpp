/**
 * Copyright 2026 the hidmdi authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace hidmdi {

// Plain comma-separated tables. Fields never contain commas, quotes or
// newlines, so no quoting layer exists; emission is deterministic and
// emit(parse(emit(t))) == emit(t) byte for byte.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::vector<std::string>& add_row() {
    rows.emplace_back();
    rows.back().reserve(header.size());
    return rows.back();
  }
};

// 12 significant digits: stable under a parse/re-emit cycle and plenty for
// every quantity this project reports.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::string format_int(std::int64_t v) { return std::to_string(v); }

inline std::string emit_csv(const Table& t) {
  std::string out;
  auto line = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out.push_back(',');
      out += fields[i];
    }
    out.push_back('\n');
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return out;
}

inline Table parse_csv(const std::string& text) {
  Table t;
  std::vector<std::string> fields;
  std::string field;
  bool header_done = false;
  auto flush_line = [&]() {
    fields.push_back(field);
    field.clear();
    if (!header_done) {
      t.header = fields;
      header_done = true;
    } else {
      if (fields.size() != t.header.size())
        throw std::invalid_argument("parse_csv: ragged row");
      t.rows.push_back(fields);
    }
    fields.clear();
  };
  for (char c : text) {
    if (c == '\n') {
      flush_line();
    } else if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  if (!field.empty() || !fields.empty()) flush_line();  // missing trailing newline
  return t;
}

// The alternative "object" output: one key/value block per row, blank-line
// separated. Values are the same strings the CSV would carry.
inline std::string emit_object(const Table& t) {
  std::string out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (r) out.push_back('\n');
    for (std::size_t i = 0; i < t.header.size(); ++i) {
      out += t.header[i];
      out += ": ";
      out += t.rows[r][i];
      out.push_back('\n');
    }
  }
  return out;
}

}  // namespace hidmdi
