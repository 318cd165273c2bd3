// Copyright 2026 rcakit contributors
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

#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace rca::csv {

// Streaming RFC 4180 reader. Quoted fields may contain commas, doubled
// quotes, and line breaks. Throws DataError on an unterminated quote.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Next record, or nullopt at end of input. A trailing newline does not
  // produce an empty record.
  std::optional<std::vector<std::string>> next();

  // Physical line the most recent record started on (1-based).
  std::size_t line() const { return record_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 1;
  std::size_t record_line_ = 1;
};

// Quotes the field only when it contains a comma, quote, or line break.
std::string escape_field(const std::string& field);
// Joins escaped fields with commas; no trailing newline.
std::string join_record(const std::vector<std::string>& fields);

}  // namespace rca::csv
