//
// Copyright 2026 The fedsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef FEDSIM_TEXTIO_HPP_
#define FEDSIM_TEXTIO_HPP_

#include <string>
#include <vector>

namespace fedsim::textio {

// Doubles are printed with 17 significant digits ("%.17g"), enough to
// round-trip any finite IEEE-754 double exactly.
std::string format_double(double v);

// Strict parsers: the whole string must be consumed.  Throw ParseError.
double parse_double(const std::string& s, const std::string& context);
long long parse_int(const std::string& s, const std::string& context);

std::vector<std::string> split(const std::string& line, char sep);
std::string join(const std::vector<std::string>& parts, char sep);

// Whole-file helpers; write_file creates parent directories.  LF endings.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace fedsim::textio

#endif  // FEDSIM_TEXTIO_HPP_
