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

#ifndef SALEM_CIRCUIT_H
#define SALEM_CIRCUIT_H

#include <cstdint>
#include <functional>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "salem/pauli.h"

namespace salem {

enum class GateType : uint8_t { CNOT, H, RESET_Z, MEASURE_Z, BRANCH };

/// True iff at least one of the listed measurement records came out 1.
struct BranchPredicate {
    std::vector<uint32_t> any_of;
};

struct Operation {
    GateType type = GateType::H;
    uint32_t q0 = 0;
    uint32_t q1 = 0;
    uint32_t record_id = 0;
    uint32_t op_index = 0;
    BranchPredicate predicate;
    std::vector<Operation> then_block;
    std::vector<Operation> else_block;
};

enum class Placement : uint8_t { after_op, before_op };

/// A Pauli channel attached to one operation. Bit i of the channel's Paulis acts on the operation's i-th qubit.
struct NoiseLocation {
    uint32_t op_index = 0;
    PauliChannel channel;
    Placement placement = Placement::after_op;
};

/// Fixed-width encoding of an adaptive measurement record.
///
/// Bit r of `executed` says whether measurement slot r ran. Bit r of `bits` holds its outcome and is zero when the
/// slot did not run, so records of different lengths never collide.
struct RecordKey {
    uint64_t executed = 0;
    uint64_t bits = 0;

    bool operator==(const RecordKey &other) const = default;
    auto operator<=>(const RecordKey &other) const = default;
    /// One character per slot: '0', '1', or '.' for an unexecuted slot.
    std::string str(uint32_t num_slots) const;
    static RecordKey from_str(const std::string &text);
};

struct SyndromeRecord {
    RecordKey key;
    /// Outcomes in execution order.
    std::vector<uint8_t> bits;
};

struct FaultPath {
    /// (noise location index, fault) pairs sorted by location.
    std::vector<std::pair<uint32_t, PauliOp>> assignments;
    double probability = 1;

    size_t weight() const {
        return assignments.size();
    }
};

/// Adaptive Clifford circuit with Pauli noise, compiled to a flat program for Pauli-frame execution.
class FtCircuit {
   public:
    uint32_t num_qubits = 0;
    uint32_t num_records = 0;
    /// Circuit qubits carrying the code block, in code order. Input and output frames live on these.
    std::vector<uint32_t> data_qubits;
    std::vector<Operation> ops;
    std::vector<NoiseLocation> noise_locations;

    /// Validates the IR and builds the executable program. Called by CircuitBuilder::build.
    void compile();

    /// Expected number of faults per execution when every location runs.
    double max_fault_mass() const;
    nlohmann::json to_json() const;

    // Compiled form.
    enum class Code : uint8_t { CNOT, H, RESET, MEASURE, NOISE, JUMP_UNLESS, JUMP };
    struct Instruction {
        Code code;
        uint32_t a;
        uint32_t b;
    };
    struct FaultOutcome {
        double probability;
        uint64_t xs;
        uint64_t zs;
        PauliOp local;
    };
    struct CompiledNoise {
        double total = 0;
        std::vector<FaultOutcome> outcomes;
    };
    std::vector<Instruction> program;
    std::vector<CompiledNoise> compiled_noise;
    std::vector<std::vector<uint32_t>> predicates;
};

/// Builds an FtCircuit block by block.
class CircuitBuilder {
   public:
    CircuitBuilder(uint32_t num_qubits, uint32_t num_records);

    uint32_t cnot(uint32_t control, uint32_t target);
    uint32_t h(uint32_t q);
    uint32_t reset(uint32_t q);
    uint32_t measure(uint32_t q, uint32_t record_id);
    uint32_t branch(
        BranchPredicate predicate,
        const std::function<void(CircuitBuilder &)> &then_fn,
        const std::function<void(CircuitBuilder &)> &else_fn = nullptr);
    void noise(uint32_t op_index, PauliChannel channel, Placement placement = Placement::after_op);

    FtCircuit build(std::vector<uint32_t> data_qubits);

   private:
    uint32_t push(Operation op);
    Operation *find(uint32_t op_index);

    FtCircuit circuit_;
    std::vector<std::vector<Operation> *> stack_;
    uint32_t next_index_ = 0;
};

/// Pauli frame over the circuit register.
struct Frame {
    uint64_t xs = 0;
    uint64_t zs = 0;
};

/// Maps a code-block Pauli onto circuit qubits and back.
Frame embed_frame(const FtCircuit &circ, const PauliOp &data_frame);
PauliOp extract_frame(const FtCircuit &circ, const Frame &frame);

/// Runs one fault path through the adaptive executor.
std::pair<SyndromeRecord, PauliOp> propagate(const FtCircuit &circ, const FaultPath &fp, const PauliOp &input_frame);

struct EnumerationSummary {
    uint64_t num_paths = 0;
    double total_probability = 0;
    double missing_probability = 0;
};

/// Visits every fault path of weight <= max_weight on the executed branch structure.
///
/// Each path's probability multiplies the chosen fault probabilities by the no-fault factor of every executed
/// unassigned location. Unexecuted locations never contribute.
EnumerationSummary enumerate_fault_paths(
    const FtCircuit &circ,
    int max_weight,
    const PauliOp &input_frame,
    const std::function<void(const FaultPath &, const SyndromeRecord &, const PauliOp &)> &visit);

/// Leaner enumeration that reports only the outcome of each path.
EnumerationSummary enumerate_outcomes(
    const FtCircuit &circ,
    int max_weight,
    const PauliOp &input_frame,
    const std::function<void(const RecordKey &, const PauliOp &, double)> &visit);

/// Samples every executed location independently. Deterministic in the seed.
std::pair<SyndromeRecord, PauliOp> sample_shot(const FtCircuit &circ, uint64_t seed, const PauliOp &input_frame);

/// Same as sample_shot but draws from an existing generator.
template <typename Rng>
std::pair<SyndromeRecord, PauliOp> sample_shot_with(const FtCircuit &circ, Rng &rng, const PauliOp &input_frame);

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw.
template <typename Rng>
inline double uniform01(Rng &rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Per-shot stream seed shared by every sampler in the project.
inline uint64_t shot_seed(uint64_t base_seed, uint64_t shot_index) {
    return base_seed ^ shot_index;
}

/// Linear effect of one fault outcome in a circuit without branches.
struct FaultEffect {
    uint32_t location;
    double probability;
    uint64_t record_flips;
    PauliOp output;
};

/// For branch-free circuits: the record flips and output frame of every single fault outcome, in location order.
/// Outcomes of the same location are grouped contiguously. Throws if the circuit has a BRANCH.
std::vector<FaultEffect> single_fault_effects(const FtCircuit &circ);

}  // namespace salem

template <>
struct std::hash<salem::RecordKey> {
    size_t operator()(const salem::RecordKey &k) const {
        return std::hash<uint64_t>{}(k.executed * 0x9E3779B97F4A7C15ULL ^ k.bits);
    }
};

#include "salem/circuit.inl"

#endif
