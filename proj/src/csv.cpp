// Copyright 2026 The bhc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bhc/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <ostream>

namespace bhc::csv {

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), ptr);
}

void comment(std::ostream& out, const std::string& text) { out << "# " << text << "\n"; }

void header(std::ostream& out, const std::vector<std::string>& columns) {
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << "\n";
}

void row(std::ostream& out, const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) out << (i ? "," : "") << num(values[i]);
  out << "\n";
}

std::vector<std::string> trajectory_columns(int sites) {
  std::vector<std::string> cols{"t", "theta"};
  for (int j = 1; j <= sites; ++j) cols.push_back("n" + std::to_string(j) + "/N");
  cols.emplace_back("energy_per_particle");
  cols.emplace_back("norm_error");
  return cols;
}

}  // namespace bhc::csv
