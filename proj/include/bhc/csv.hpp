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

#ifndef BHC_CSV_HPP
#define BHC_CSV_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace bhc::csv {

/// Shortest decimal string that round-trips to the same double.
std::string num(double x);

/// `# text` line; used for units and metadata ahead of the column header.
void comment(std::ostream& out, const std::string& text);
void header(std::ostream& out, const std::vector<std::string>& columns);
void row(std::ostream& out, const std::vector<double>& values);

/// Column names of the shared trajectory schema:
/// t, theta, n1/N .. nM/N, energy_per_particle, norm_error.
std::vector<std::string> trajectory_columns(int sites);

}  // namespace bhc::csv

#endif  // BHC_CSV_HPP
