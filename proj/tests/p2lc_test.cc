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


#include "salem/p2lc.h"

#include <gtest/gtest.h>
#include <map>

#include "salem/mitigation.h"

using namespace salem;

namespace {

// Three-qubit repetition code against X noise. Z0 Z1 and Z1 Z2 are read out through one reused ancilla.
CssCode repetition_code() {
    CssCode c;
    c.name = "rep3";
    c.n = 3;
    c.k = 1;
    c.d = 3;
    c.t_ft = 1;
    c.z_stabilizers = {PauliOp::from_str("ZZI"), PauliOp::from_str("IZZ")};
    c.logical_x = PauliOp::from_str("XXX");
    c.logical_z = PauliOp::from_str("ZII");
    return c;
}

FtCircuit repetition_cycle(double p) {
    // Distinct rates per location keep every conditional channel away from a 50/50 split.
    CircuitBuilder b(4, 2);
    auto flip_control = [](double q) {
        return PauliChannel::single_pauli(PauliOp::from_str("XI"), q);
    };
    b.reset(3);
    b.noise(b.cnot(0, 3), flip_control(p));
    b.noise(b.cnot(1, 3), flip_control(1.3 * p));
    b.noise(b.measure(3, 0), PauliChannel::bit_flip(0.5 * p), Placement::before_op);
    b.reset(3);
    b.cnot(1, 3);
    b.noise(b.cnot(2, 3), flip_control(0.8 * p));
    b.noise(b.measure(3, 1), PauliChannel::bit_flip(0.7 * p), Placement::before_op);
    return b.build({0, 1, 2});
}

CycleModel repetition_model(double p) {
    return CycleModel{
        CosetTable(repetition_code()),
        repetition_cycle(p),
        repetition_cycle(0),
        [](const RecordKey &k) {
            static const char *fix[4] = {"III", "XII", "IIX", "IXI"};
            return PauliOp::from_str(fix[k.bits & 3]);
        },
        nullptr,
        2,
        p,
    };
}

// Z-readout eigenvalue of a logical channel (probabilities or quasiprobabilities).
double z_eigenvalue(const std::array<double, 4> &c) {
    return c[0] + c[2] - c[1] - c[3];
}

std::array<double, 4> as_array(const PauliChannel &ch) {
    std::array<double, 4> out{};
    for (const auto &[op, w] : ch.terms()) {
        out[op.at(0)] += w;
    }
    return out;
}

LogicalChannel from_array(const std::array<double, 4> &a) {
    LogicalChannel l;
    l.probs = a;
    return l;
}

Characterization steane_at(double eps) {
    return characterize(characterize_cycle(steane_cycle_model(eps), 2));
}

}  // namespace

TEST(p2lc, syndrome_channels_recompose_the_average) {
    Characterization ch = steane_at(4e-4);
    LogicalChannel avg = ch.channels.average();
    LogicalChannel base = ch.base.channel;
    for (int c = 0; c < 4; c++) {
        EXPECT_NEAR(avg.probs[c] / avg.total(), base.probs[c] / base.total(), 1e-12);
    }
    // The same identity across a binary partition.
    Partition part = partition_by_threshold(ch.channels, PartitionFamily::lut_eps, 0.2);
    PartitionStats st = partition_stats(ch.channels, part);
    for (int c = 0; c < 4; c++) {
        double mix = (1 - st.p_s1) * st.channel0.normalized().probs[c] + st.p_s1 * st.channel1.normalized().probs[c];
        EXPECT_NEAR(mix, avg.normalized().probs[c], 1e-12);
    }
    EXPECT_NEAR(st.eps_l, avg.infidelity(), 1e-12);
}

TEST(p2lc, partition_is_monotone_in_tau) {
    Characterization ch = steane_at(4e-4);
    double prev_p = 2, prev_e0 = -1;
    for (double tau : {0.01, 0.05, 0.1, 0.2, 0.3, 0.5, 0.8, 1.0}) {
        PartitionStats st = partition_stats(ch.channels, partition_by_threshold(ch.channels, PartitionFamily::lut_eps, tau));
        EXPECT_LE(st.p_s1, prev_p + 1e-15);
        EXPECT_GE(st.eps_l0, prev_e0 - 1e-15);
        prev_p = st.p_s1;
        prev_e0 = st.eps_l0;
    }
    EXPECT_EQ(prev_p, 0);
}

TEST(p2lc, joint_table_is_normalized) {
    JointTable t = characterize_cycle(steane_cycle_model(4e-4), 2);
    for (uint32_t c = 0; c < t.num_cosets; c += 37) {
        double sum = t.missing[c];
        for (const auto &e : t.rows[c]) {
            sum += e.probability;
        }
        EXPECT_NEAR(sum, 1, 1e-12) << c;
    }
    EXPECT_TRUE(t.correctable(0));
}

TEST(p2lc, logical_rows_are_translates) {
    // Logical operators commute with every check, so row (s, l) is row (s, 0) with the output class shifted by l.
    JointTable t = characterize_cycle(repetition_model(0.02), 5, {true});
    for (uint32_t c = 0; c < t.num_cosets; c += 4) {
        for (uint32_t l = 1; l < 4; l++) {
            ASSERT_EQ(t.rows[c | l].size(), t.rows[c].size());
            for (size_t i = 0; i < t.rows[c].size(); i++) {
                const auto &a = t.rows[c][i];
                auto it = std::find_if(t.rows[c | l].begin(), t.rows[c | l].end(), [&](const JointTable::Entry &e) {
                    return e.record == a.record && e.out == (a.out ^ l);
                });
                ASSERT_NE(it, t.rows[c | l].end());
                EXPECT_NEAR(it->probability, a.probability, 1e-15);
            }
        }
    }
}

TEST(p2lc, window_reference_agrees_to_higher_order) {
    // Two-cycle window reference E0(T T d) * E0(T d)^-1 against the one-cycle characterization. The gap should
    // shrink like eps_L * eps, so the normalized ratio stays flat across a factor of four in eps.
    std::vector<double> ratios;
    for (double eps : {8e-4, 4e-4, 2e-4}) {
        JointTable t = characterize_cycle(steane_cycle_model(eps), 2);
        std::vector<double> delta(t.num_cosets, 0);
        delta[0] = 1;
        std::vector<double> t1 = propagate_cosets(t, delta);
        std::vector<double> t2 = propagate_cosets(t, t1);
        LogicalChannel one = ideal_readout(t, t1);
        LogicalChannel two = ideal_readout(t, t2);
        PauliChannel ref = convolve(two.to_pauli_channel(), invert_channel(one.to_pauli_channel()).reconstruct());
        LogicalChannel alg = algorithm_p2lc(t).channel;
        double dist = total_variation(from_array(as_array(ref)), alg);
        double eps_l = alg.infidelity();
        ratios.push_back(dist / (eps_l * eps));
        EXPECT_LT(dist, 0.05 * eps_l);
    }
    double hi = *std::max_element(ratios.begin(), ratios.end());
    double lo = *std::min_element(ratios.begin(), ratios.end());
    EXPECT_LE(hi / lo, 2) << ratios[0] << " " << ratios[1] << " " << ratios[2];
}

TEST(p2lc, two_cycle_conditional_inversion_is_exact) {
    // Exact two-cycle memory on the repetition code. Inverting the first cycle's channel given s1 and then the
    // conditional channel of the second cycle given (s1, s2) recovers <Z> = 1 with no bias.
    const double p = 0.05;
    JointTable t = characterize_cycle(repetition_model(p), 5, {true});
    for (uint32_t c = 0; c < t.num_cosets; c++) {
        ASSERT_NEAR(t.missing[c], 0, 1e-15);
    }
    auto logical = [&](uint32_t coset) {
        return Coset::from_index(t.ideal_out[coset]).logical;
    };

    std::map<uint32_t, std::array<double, 4>> first;
    std::map<std::pair<uint32_t, uint32_t>, std::array<double, 4>> both;
    for (const auto &e1 : t.rows[0]) {
        first[e1.record][logical(e1.out)] += e1.probability;
        for (const auto &e2 : t.rows[e1.out]) {
            both[{e1.record, e2.record}][logical(e2.out)] += e1.probability * e2.probability;
        }
    }

    double total = 0, estimate = 0, naive = 0;
    for (const auto &[key, joint] : both) {
        double p12 = joint[0] + joint[1] + joint[2] + joint[3];
        total += p12;
        LogicalChannel cyc1 = from_array(first[key.first]).normalized();
        LogicalChannel tot = from_array(joint).normalized();
        QpDecomposition inv1 = invert_channel(cyc1.to_pauli_channel());
        PauliChannel cyc2 = convolve(tot.to_pauli_channel(), inv1.reconstruct());
        QpDecomposition inv2 = invert_channel(cyc2);
        // Sample-free expectation of the quasiprobability estimator: sum over both correction draws.
        double e = 0;
        PauliChannel q1s = inv1.reconstruct();
        PauliChannel q2s = inv2.reconstruct();
        for (const auto &[c1, q1] : q1s.terms()) {
            for (const auto &[c2, q2] : q2s.terms()) {
                for (int l = 0; l < 4; l++) {
                    int out = l ^ c1.at(0) ^ c2.at(0);
                    e += tot.probs[l] * q1 * q2 * ((out & 1) ? -1 : 1);
                }
            }
        }
        estimate += p12 * e;
        naive += p12 * z_eigenvalue(tot.probs);
    }
    EXPECT_NEAR(total, 1, 1e-14);
    EXPECT_NEAR(estimate, 1, 1e-12);
    EXPECT_LT(naive, 0.999);
}

TEST(p2lc, ablations_move_the_channel) {
    JointTable t = characterize_cycle(steane_cycle_model(4e-4), 2);
    double full = algorithm_p2lc(t).channel.infidelity();
    double no_input = algorithm_p2lc(t, {false, {}, true}).channel.infidelity();
    EXPECT_LT(no_input, full);
}

TEST(p2lc, missing_mass_scan_brackets_the_midpoint) {
    Characterization ch = steane_at(4e-4);
    double eps_l = ch.channels.eps_l();
    MissingScan s = missing_mass_scan(ch.channels, {eps_l / 4, eps_l, 4 * eps_l, 0.25});
    // The midpoint treats unseen syndromes as fully random; it should sit close to the scanned range.
    EXPECT_LE(s.min, s.max);
    EXPECT_LT(s.width(), 0.1);
    EXPECT_NEAR(s.mid, 0.5 * (s.min + s.max), 0.1);
    EXPECT_GT(fg_lambda(ch.channels, eps_l), 1);
}
