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

#ifndef SALEM_SURFACE_H
#define SALEM_SURFACE_H

#include <absl/container/flat_hash_map.h>
#include <array>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <vector>

#include "salem/circuit.h"
#include "salem/p2lc.h"

namespace salem {

/// Rotated distance-3 surface code on a 7x7 grid of half-integer coordinates.
///
/// Data qubits sit at odd (x, y), stabilizer ancillas at even (x, y). X-type boundary plaquettes lie on the top and
/// bottom edges, Z-type on the left and right edges. The logical Z runs along the bottom row of data qubits.
struct SurfaceLayout {
    struct Ancilla {
        int x;
        int y;
        bool is_x;
        /// Data qubit touched in each of the four CNOT layers, or -1.
        std::array<int, 4> schedule;
    };
    static constexpr uint32_t d = 3;
    static constexpr uint32_t rounds = 3;
    std::vector<std::pair<int, int>> data;
    std::vector<Ancilla> ancillas;
    std::vector<uint32_t> logical_z;

    static SurfaceLayout build();
    uint32_t num_data() const {
        return static_cast<uint32_t>(data.size());
    }
    /// Data-qubit mask of an ancilla's plaquette.
    uint32_t support(uint32_t ancilla) const;
};

/// Parity of a set of measurement records.
struct Detector {
    uint64_t records = 0;
    bool z_type = true;
    /// 0-based syndrome round; `rounds` marks the final data readout.
    uint32_t round = 0;
};

/// Memory circuit plus the detector and observable definitions that turn a measurement record into a syndrome.
struct SurfaceMemory {
    SurfaceLayout layout;
    FtCircuit circuit;
    double eps = 0;
    /// Z-type detectors come first so matching can work on a bit prefix.
    std::vector<Detector> detectors;
    uint32_t num_z_detectors = 0;
    uint64_t observable = 0;

    /// Detector bits in the low bits and the observable flip in bit 31.
    uint32_t syndrome_key(uint64_t record_bits) const;
    uint32_t z_defects(uint32_t key) const {
        return key & ((uint32_t{1} << num_z_detectors) - 1);
    }
    static bool observable_flip(uint32_t key) {
        return (key >> 31) & 1;
    }
    static uint32_t detectors_of(uint32_t key) {
        return key & 0x7FFFFFFF;
    }
};

/// Three noisy rounds of four-layer plaquette readout followed by a noiseless data readout. Depolarizing noise follows
/// every H and CNOT; bit flips follow resets and precede noisy measurements.
SurfaceMemory build_surface_memory(double eps);

struct SoftOutput {
    uint8_t recovery = 0;
    double gap = 0;
    std::array<double, 2> weights{0, 0};
};

/// Matching graph on the Z-type detectors plus one boundary node.
class DecodingGraph {
   public:
    struct Edge {
        uint32_t a;
        /// `boundary()` for boundary edges.
        uint32_t b;
        double probability;
        double weight;
        bool logical_flip;
    };

    /// Harvests edges from the single-fault effects of the circuit, merging parallel mechanisms by probability.
    explicit DecodingGraph(const SurfaceMemory &memory);

    uint32_t num_nodes() const {
        return num_detectors_;
    }
    uint32_t boundary() const {
        return num_detectors_;
    }
    const std::vector<Edge> &edges() const {
        return edges_;
    }
    /// Shortest path weight from a to b with the given logical parity; infinity when none exists.
    double distance(uint32_t a, uint32_t b, int parity) const {
        return dist_[(a * (num_detectors_ + 1) + b) * 2 + parity];
    }
    /// Single-fault mechanisms that touched more than two detectors and were split into graph edges.
    size_t num_decomposed() const {
        return num_decomposed_;
    }
    nlohmann::json to_json() const;

   private:
    uint32_t num_detectors_;
    std::vector<Edge> edges_;
    std::vector<double> dist_;
    size_t num_decomposed_ = 0;
};

/// Exact minimum-weight matching with the logical parity forced to 0 and to 1, by dynamic programming over defect
/// subsets. `defects` is a mask over Z-type detectors.
SoftOutput decode_mwpm(const DecodingGraph &graph, uint32_t defects);

/// Weight-limited fault-path enumeration of the memory circuit, keyed by syndrome_key.
struct SurfaceEnumeration {
    /// Probability of each (detectors, observable) key.
    absl::flat_hash_map<uint32_t, double> mass;
    double missing = 0;
    int max_weight = 0;
    uint64_t num_paths = 0;

    /// P(flip = 0, s) and P(flip = 1, s) per detector pattern, sorted by pattern.
    std::vector<std::pair<uint32_t, std::array<double, 2>>> by_syndrome() const;
};

SurfaceEnumeration enumerate_surface(const SurfaceMemory &memory, int max_weight);

enum class SurfaceDecoder { mwpm, ml };

/// Syndrome-conditioned logical channels after the chosen decoder. Flips of the logical Z readout appear as
/// logical class X. Gaps come from the matching decoder in both cases.
SyndromeChannels surface_syndrome_channels(
    const SurfaceMemory &memory, const DecodingGraph &graph, const SurfaceEnumeration &enumeration,
    SurfaceDecoder decoder);

/// P(flip | s) for one detector pattern from the enumeration; negative when s never occurred.
double ml_flip_probability(const SurfaceEnumeration &enumeration, uint32_t detectors);

}  // namespace salem

#endif
