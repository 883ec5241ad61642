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

#ifndef SALEM_CONFIG_H
#define SALEM_CONFIG_H

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "salem/analytics.h"
#include "salem/mitigation.h"

namespace salem {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class CodeKind { steane, surface_d3 };

struct ExperimentConfig {
    CodeKind code = CodeKind::steane;
    double eps = 4e-4;
    int max_weight = 2;
    /// lut or ml for Steane; mwpm or ml for the surface code.
    std::string decoder = "lut";

    PartitionFamily family = PartitionFamily::lut_eps;
    double tau = 0.2;
    std::vector<double> tau_grid;

    std::vector<Method> methods;
    std::vector<uint32_t> volumes;
    uint64_t shots = 0;
    bool midshot = false;

    /// Analytics inputs. fit_eps_l may be empty when fit_eps should be characterized directly.
    std::vector<double> fit_eps;
    std::vector<double> fit_eps_l;
    BaselineInputs baseline;
    std::vector<Method> baseline_methods;
    std::vector<double> baseline_volumes;
    std::vector<double> deltas;
    std::vector<double> v_grid;
    VolumeRule volume_rule = VolumeRule::per_logical;
    std::vector<double> aspect_ratios;

    uint64_t seed = 1;
    int threads = 1;
    std::string out = "out";

    /// FNV-1a hash of the source text and the effective seed, embedded in every artifact.
    std::string hash;
};

/// Parses TOML text. Unknown keys and out-of-range values raise ConfigError.
ExperimentConfig parse_config(const std::string &text);
ExperimentConfig load_config(const std::string &path);

uint64_t fnv1a(const std::string &data);

/// Recomputes the hash after command-line overrides of the seed.
void rehash(ExperimentConfig &cfg, const std::string &text);

}  // namespace salem

#endif
