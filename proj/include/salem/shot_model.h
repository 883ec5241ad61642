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

#ifndef SALEM_SHOT_MODEL_H
#define SALEM_SHOT_MODEL_H

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "salem/p2lc.h"

namespace salem {

enum class CycleAction : uint8_t { nothing, invert, reject };

/// What a memory run does with each cycle's syndrome.
struct ShotPolicy {
    /// Subset index per record of the joint table. Subset 0 should hold the trivial record.
    std::vector<uint16_t> record_class;
    /// Action per subset.
    std::vector<CycleAction> actions;
    /// Quasiprobability inverses of the logical channels of inverted subsets (unused entries may stay default).
    std::vector<QpDecomposition> inverses;
    /// Subset for records that never appeared during characterization.
    uint16_t unknown_class = 1;
    /// Also classify the record of the ideal readout cycle, so rejection sees the cycle after the last one.
    bool check_final = true;

    int classify(const JointTable &table, const RecordKey &key) const;
};

struct ShotOutcome {
    bool accepted = true;
    /// Cycles executed, including the one that triggered a rejection.
    uint32_t cycles_run = 0;
    /// Z-basis readout (+1 or -1) after the sampled quasiprobability corrections.
    int readout = 1;
    int sign = 1;
    double log_weight = 0;
    /// Inverted cycles in subset 0 and in all other subsets.
    std::array<uint32_t, 2> inversions{0, 0};

    double value() const {
        return readout * sign * std::exp(log_weight);
    }
};

/// Memory experiment driven by the joint table as a Markov chain over physical cosets.
///
/// Each cycle draws (record subset, output coset) from the table row of the current input coset, then applies
/// the policy. Runs of cycles that keep the identity coset, land in subset 0 and draw the identity correction
/// with positive sign are skipped in one geometric draw.
class CompressedMemory {
   public:
    CompressedMemory(const JointTable &table, ShotPolicy policy);

    ShotOutcome run(uint32_t volume, std::mt19937_64 &rng) const;
    /// Probability of a cycle that changes nothing from the identity coset.
    double quiet_probability() const {
        return quiet_;
    }

   private:
    struct Move {
        uint32_t out;
        uint16_t cls;
        uint8_t correction;
    };
    struct Row {
        std::vector<double> cumulative;
        std::vector<Move> moves;
    };

    const Move &draw(const Row &row, std::mt19937_64 &rng) const;
    void apply(const Move &m, ShotOutcome &shot, uint8_t &correction) const;

    ShotPolicy policy_;
    std::vector<uint32_t> ideal_record_;
    std::vector<uint32_t> ideal_out_;
    std::vector<Row> rows_;
    /// Row of the identity coset with the quiet move removed.
    Row loud_;
    double quiet_ = 0;
    double log_quiet_ = 0;
    std::vector<double> log_w_;
    std::vector<std::array<int8_t, 4>> qp_sign_;
};

/// The same memory experiment simulated gate by gate with Pauli frames, for validating the compressed model.
ShotOutcome full_memory_shot(
    const CycleModel &model, const JointTable &table, const ShotPolicy &policy, uint32_t volume,
    std::mt19937_64 &rng);

}  // namespace salem

#endif
