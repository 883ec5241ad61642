// Copyright 2026 The SALEM Lab Authors
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

#ifndef SALEM_LAB_H
#define SALEM_LAB_H

#include <optional>
#include <ostream>
#include <string>

#include "salem/config.h"

namespace salem {

namespace exit_code {
constexpr int ok = 0;
constexpr int failure = 1;
constexpr int bad_config = 2;
constexpr int missing_table = 3;
constexpr int missing_inputs = 4;
}  // namespace exit_code

/// Command-line overrides applied on top of the config file.
struct LabOptions {
    std::string config_path;
    std::optional<uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> threads;
    std::string table;
};

/// Runs one subcommand (characterize, estimate, analytics, selftest) and returns its exit code.
/// Progress and warnings go to `log`.
int run_lab(const std::string &command, const LabOptions &options, std::ostream &log);

}  // namespace salem

#endif
