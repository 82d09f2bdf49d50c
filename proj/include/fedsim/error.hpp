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

#ifndef FEDSIM_ERROR_HPP_
#define FEDSIM_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace fedsim {

// Invalid configuration: unknown key, out-of-range value, missing input.
// The CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input file (CSV, checkpoint, config syntax).  Exit code 2.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Structural mismatch between parameter sets (names, shapes, lengths).
// Exit code 2.
class ConformanceError : public std::runtime_error {
 public:
  explicit ConformanceError(const std::string& what)
      : std::runtime_error(what) {}
};

// Secure-aggregation round cannot complete (too few clients, missing
// shares, reconstruction failure).  Exit code 2.
class ProtocolError : public std::runtime_error {
 public:
  explicit ProtocolError(const std::string& what) : std::runtime_error(what) {}
};

// Metric undefined for the given inputs (e.g. AUC with one class present).
class MetricsError : public std::runtime_error {
 public:
  explicit MetricsError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fedsim

#endif  // FEDSIM_ERROR_HPP_
