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

#ifndef SALEM_TABLE_IO_H
#define SALEM_TABLE_IO_H

#include <stdexcept>
#include <string>

#include "salem/p2lc.h"

namespace salem {

struct TableIoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Writes `<stem>.bin` (little-endian rows) and `<stem>.json` (metadata, record keys, checksum).
void save_table(const JointTable &table, const std::string &stem, const std::string &config_hash);

/// Reads a table written by save_table. `path` may name the stem, the .bin or the .json file.
JointTable load_table(const std::string &path);

}  // namespace salem

#endif
