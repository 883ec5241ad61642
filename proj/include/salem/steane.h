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

#ifndef SALEM_STEANE_H
#define SALEM_STEANE_H

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "salem/circuit.h"
#include "salem/pauli.h"

namespace salem {

/// A CSS stabilizer code with one logical qubit.
struct CssCode {
    std::string name;
    uint32_t n = 0;
    uint32_t k = 1;
    uint32_t d = 0;
    uint32_t t_ft = 0;
    std::vector<PauliOp> x_stabilizers;
    std::vector<PauliOp> z_stabilizers;
    PauliOp logical_x;
    PauliOp logical_z;

    /// X stabilizers first, then Z stabilizers. Syndrome bit i refers to entry i.
    std::vector<PauliOp> stabilizers() const;
    uint32_t num_syndrome_bits() const {
        return static_cast<uint32_t>(x_stabilizers.size() + z_stabilizers.size());
    }
    /// Checks commutation relations; throws std::logic_error on failure.
    void validate() const;
};

CssCode steane_code();

/// Logical classes use the PauliOp::at encoding: 0 = I, 1 = X, 2 = Z, 3 = Y.
struct Coset {
    uint32_t syndrome = 0;
    uint8_t logical = 0;

    uint32_t index() const {
        return (syndrome << 2) | logical;
    }
    static Coset from_index(uint32_t index) {
        return {index >> 2, static_cast<uint8_t>(index & 3)};
    }
    bool operator==(const Coset &other) const = default;
};

/// Coset bookkeeping: syndromes, fixed pure-error representatives, and logical classes.
class CosetTable {
   public:
    explicit CosetTable(CssCode code);

    const CssCode &code() const {
        return code_;
    }
    uint32_t num_cosets() const {
        return static_cast<uint32_t>(pure_errors_.size()) * 4;
    }
    uint32_t syndrome(const PauliOp &p) const;
    Coset reduce(const PauliOp &p) const;
    /// Canonical member: pure error of the syndrome times the logical operator of the class.
    PauliOp representative(uint32_t coset_index) const;
    PauliOp logical_operator(uint8_t logical_class) const;
    /// Minimum-weight Pauli per syndrome for independent X and Z decoding (CSS); used by syndrome-only fallbacks.
    PauliOp min_weight_correction(uint32_t syndrome) const;
    /// True when the min-weight correction of its syndrome returns p to logical class I.
    bool correctable_by_syndrome(const PauliOp &p) const;

   private:
    CssCode code_;
    std::vector<PauliOp> stabs_;
    std::vector<PauliOp> pure_errors_;
    std::vector<PauliOp> min_weight_;
};

struct UnknownSyndrome : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Layout of the adaptive flagged cycle's measurement slots.
struct SteaneLayout {
    static constexpr uint32_t NUM_GADGETS = 6;
    static constexpr uint32_t NUM_SLOTS = 18;
    static constexpr uint32_t DATA = 7;
    static constexpr uint32_t ANCILLA = 7;
    static constexpr uint32_t FLAG = 8;
    static uint32_t syndrome_slot(uint32_t gadget) {
        return 2 * gadget;
    }
    static uint32_t flag_slot(uint32_t gadget) {
        return 2 * gadget + 1;
    }
    static uint32_t round2_slot(uint32_t gadget) {
        return 12 + gadget;
    }
};

struct SteaneCycleOptions {
    /// Always run the unflagged round (used to obtain a branch-free variant for oracle tests).
    bool force_round2 = false;
    /// Drop the flagged round and only run the unflagged one.
    bool unflagged_only = false;
};

/// One adaptive flagged error-correction cycle on the Steane code.
///
/// Qubits 0..6 hold the code block, 7 is the syndrome ancilla and 8 the flag. Noise: depol2(eps) after each CNOT,
/// X(eps/2) after each reset and X(eps/2) before each measurement.
FtCircuit build_ec_cycle(double eps_ph, const SteaneCycleOptions &options = {});

/// Checks whether a key has the shape of a record the cycle can produce.
bool is_realizable_steane_key(const RecordKey &key);

/// Decoder-facing syndrome of a full record: the gadget that raised a flag (if any) together with the
/// unflagged-round syndrome. A clean first round maps to the all-zero syndrome without a flag. This gives
/// 7 * 64 = 448 distinct syndromes.
RecordKey steane_syndrome_key(const RecordKey &record);

/// Flag-aware lookup-table decoder.
class LutDecoder {
   public:
    /// Builds the table from all weight <= 1 fault paths of the cycle (weight-1 input errors included).
    static LutDecoder build(const CosetTable &cosets);

    PauliOp decode(const RecordKey &key) const;
    /// Gadget that raised the flag in round 1, or -1.
    static int flag_context(const RecordKey &key);
    const std::map<RecordKey, PauliOp> &table() const {
        return table_;
    }
    /// CSV with header "canonical_key,recovery".
    std::string to_csv() const;

   private:
    std::map<RecordKey, PauliOp> table_;
    std::vector<PauliOp> fallback_;
};

}  // namespace salem

#endif
