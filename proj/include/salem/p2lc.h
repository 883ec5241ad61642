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

#ifndef SALEM_P2LC_H
#define SALEM_P2LC_H

#include <array>
#include <functional>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "salem/circuit.h"
#include "salem/steane.h"

namespace salem {

/// Maps a measured record to the recovery Pauli applied to the code block.
using Decoder = std::function<PauliOp(const RecordKey &)>;

/// Everything needed to characterize one error-correction cycle.
struct CycleModel {
    CosetTable cosets;
    FtCircuit noisy;
    /// Same cycle with all noise removed. Serves as the ideal cycle E0.
    FtCircuit ideal;
    Decoder decode;
    /// Optional coarse-graining of full records into the syndromes that channels are conditioned on.
    std::function<RecordKey(const RecordKey &)> view;
    uint32_t num_slots = 0;
    /// Physical error rate the noisy circuit was built with.
    double eps_ph = 0;
};

CycleModel steane_cycle_model(double eps_ph);

/// Logical classes use the PauliOp::at encoding: 0 = I, 1 = X, 2 = Z, 3 = Y.
inline PauliOp logical_pauli(uint8_t logical_class) {
    return PauliOp(1, logical_class & 1, logical_class >> 1);
}

/// Distribution over single-qubit logical classes. Probabilities may sum to less than one; the deficit is the
/// mass of fault paths that were never enumerated.
struct LogicalChannel {
    std::array<double, 4> probs{1, 0, 0, 0};
    double missing = 0;
    std::string tag;

    double total() const {
        return probs[0] + probs[1] + probs[2] + probs[3];
    }
    /// Infidelity of the channel renormalized over enumerated mass.
    double infidelity() const {
        return 1 - probs[0] / total();
    }
    /// Probability of flipping a Z-basis readout (X or Y class), renormalized.
    double z_flip() const {
        return (probs[1] + probs[3]) / total();
    }
    LogicalChannel normalized() const;
    PauliChannel to_pauli_channel() const;
    nlohmann::json to_json() const;
};

/// Total variation distance between two normalized logical channels.
double total_variation(const LogicalChannel &a, const LogicalChannel &b);

/// Exact (up to enumeration order) joint distribution P(s, sigma_out | sigma_in) of one cycle.
///
/// Output cosets are taken after the decoder's recovery has been applied.
class JointTable {
   public:
    struct Entry {
        uint32_t record;
        uint32_t out;
        double probability;
    };

    uint32_t num_slots = 0;
    uint32_t num_cosets = 0;
    double eps_ph = 0;
    int max_weight = 0;
    std::vector<RecordKey> records;
    /// rows[c] lists the entries for input coset c, sorted by (record, out).
    std::vector<std::vector<Entry>> rows;
    std::vector<double> missing;
    /// Record index and decoded output coset of the ideal cycle for each input coset.
    std::vector<uint32_t> ideal_record;
    std::vector<uint32_t> ideal_out;

    /// Index of a key, or -1 when the key never occurred.
    int64_t find_record(const RecordKey &key) const;
    /// An input coset is correctable when the ideal cycle returns it to logical class I.
    bool correctable(uint32_t coset) const {
        return Coset::from_index(ideal_out[coset]).logical == 0;
    }
    /// Records reached from input I with nonzero mass.
    size_t num_identity_records() const;
    nlohmann::json index_json() const;
};

struct CharacterizeOptions {
    /// Give every input coset the same internal fault budget. By default nontrivial inputs count as one fault.
    bool uniform_weight = false;
};

/// Enumerates the cycle for every input coset. The identity input gets max_weight internal faults, every other
/// coset max_weight - 1 (or max_weight with uniform_weight).
JointTable characterize_cycle(const CycleModel &model, int max_weight, const CharacterizeOptions &options = {});

/// Pushes a distribution over input cosets through one noisy cycle. Missing mass is dropped.
std::vector<double> propagate_cosets(const JointTable &table, const std::vector<double> &input);

/// Applies the ideal cycle and reads off logical classes.
LogicalChannel ideal_readout(const JointTable &table, const std::vector<double> &cosets);

struct P2lcOptions {
    /// Feed the correctable part of the previous cycle's output as input. Turning this off is an ablation.
    bool input_errors = true;
    /// Accepted records by record index. Empty means every record is accepted.
    std::vector<uint8_t> accepted;
    /// Also require the ideal cycle that follows to produce an accepted record.
    bool future_acceptance = true;
};

/// Per-record outcome of the temporally-local characterization.
struct RecordChannel {
    uint32_t record;
    /// P(s) under the constructed input channel.
    double probability;
    /// Joint mass of (s, logical class) after the ideal readout.
    std::array<double, 4> logical;
};

struct P2lcResult {
    /// Input coset distribution fed to the characterized cycle.
    std::vector<double> input;
    /// Accepted records with nonzero mass, ordered by record index.
    std::vector<RecordChannel> per_record;
    /// Missing mass of the characterized cycle, weighted by the input distribution.
    double missing = 0;
    /// Probability that the current cycle's record is accepted (1 without an acceptance set).
    double accept_probability = 1;
    /// Leading-order logical channel of one cycle, conditioned on acceptance when requested.
    LogicalChannel channel;
};

/// Temporally-local characterization of one interior cycle of a uniform memory.
P2lcResult algorithm_p2lc(const JointTable &table, const P2lcOptions &options = {});

/// One entry per syndrome: probability and normalized conditional logical channel.
struct SyndromeEntry {
    RecordKey key;
    double probability = 0;
    std::array<double, 4> logical{1, 0, 0, 0};
    /// Soft-output confidence for matching decoders; unused by lookup-table pipelines.
    double gap = 0;
    /// Fewest faults that produce this syndrome, as a diagnostic.
    int min_faults = 0;

    double infidelity() const {
        return 1 - logical[0];
    }
};

/// Syndrome-resolved view of a logical channel, with the unenumerated mass carried explicitly.
struct SyndromeChannels {
    std::vector<SyndromeEntry> entries;
    double missing = 0;

    /// Sum_s P(s) Lambda_{L|s}; total mass is 1 - missing.
    LogicalChannel average() const;
    double eps_l() const {
        return average().infidelity();
    }
};

SyndromeChannels syndrome_channels(const JointTable &table, const P2lcResult &result);

enum class PartitionFamily { lut_eps, mwpm_gap };

/// Binary partition S0 (accept / invert) and S1 (classified as high-risk).
struct Partition {
    PartitionFamily family = PartitionFamily::lut_eps;
    double tau = 1;
    /// Keys classified into S1. Keys absent from the characterization are treated as S1 as well.
    std::map<RecordKey, bool> in_s1;

    int classify(const RecordKey &key) const;
};

struct PartitionStats {
    double tau = 1;
    double p_s1 = 0;
    double eps_l = 0;
    double eps_l0 = 0;
    double eps_l1 = 0;
    double p1_given_l = 0;
    LogicalChannel channel0;
    LogicalChannel channel1;
    int min_faults_s1 = 0;
    nlohmann::json to_json() const;
};

/// Threshold classifier: lut_eps puts s in S1 when eps_{L|s} > tau, mwpm_gap when exp(-gap) > tau.
Partition partition_by_threshold(const SyndromeChannels &channels, PartitionFamily family, double tau);
PartitionStats partition_stats(const SyndromeChannels &channels, const Partition &partition);

/// FG-SALEM blowup with the missing mass modelled as one extra syndrome carrying a single-Pauli logical error of
/// probability eps_missing. With ml_shift every channel is first relabelled by its most likely class.
double fg_lambda(const SyndromeChannels &channels, double eps_missing, bool ml_shift = false);

struct MissingScan {
    std::vector<std::pair<double, double>> grid;
    double min = 0;
    double mid = 0;
    double max = 0;
    double width() const {
        return max - min;
    }
};

MissingScan missing_mass_scan(const SyndromeChannels &channels, const std::vector<double> &grid, bool ml_shift = false);

}  // namespace salem

#endif
