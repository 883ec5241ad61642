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


#include "salem/surface.h"

#include <algorithm>
#include <gtest/gtest.h>
#include <limits>
#include <map>
#include <bit>
#include <cmath>
#include <random>

using namespace salem;

namespace {

const SurfaceMemory &memory() {
    static const SurfaceMemory m = build_surface_memory(1e-3);
    return m;
}

const DecodingGraph &graph() {
    static const DecodingGraph g(memory());
    return g;
}

// Exhaustive pairing of defects with each other or with the boundary, minimized per logical parity.
void brute_force(const DecodingGraph &g, std::vector<uint32_t> left, int parity, double acc, std::array<double, 2> &best) {
    if (left.empty()) {
        best[parity] = std::min(best[parity], acc);
        return;
    }
    uint32_t a = left.back();
    left.pop_back();
    for (int p = 0; p < 2; p++) {
        double w = g.distance(a, g.boundary(), p);
        if (std::isfinite(w)) {
            brute_force(g, left, parity ^ p, acc + w, best);
        }
    }
    for (size_t i = 0; i < left.size(); i++) {
        std::vector<uint32_t> rest = left;
        uint32_t b = rest[i];
        rest.erase(rest.begin() + static_cast<long>(i));
        for (int p = 0; p < 2; p++) {
            double w = g.distance(a, b, p);
            if (std::isfinite(w)) {
                brute_force(g, rest, parity ^ p, acc + w, best);
            }
        }
    }
}

}  // namespace

TEST(surface, layout) {
    SurfaceLayout lay = SurfaceLayout::build();
    EXPECT_EQ(lay.num_data(), 9u);
    EXPECT_EQ(lay.ancillas.size(), 8u);
    EXPECT_EQ(memory().circuit.num_qubits, 17u);
    EXPECT_EQ(memory().circuit.num_records, 33u);
    EXPECT_EQ(memory().detectors.size(), 24u);
    EXPECT_EQ(memory().num_z_detectors, 16u);
}

TEST(surface, noiseless_run_is_silent) {
    SurfaceMemory m = build_surface_memory(0);
    auto [rec, out] = propagate(m.circuit, {}, PauliOp(9));
    EXPECT_EQ(m.syndrome_key(rec.key.bits), 0u);
}

TEST(surface, bulk_data_flip_lights_two_detectors) {
    // The first noise locations are the flips after each data reset; qubit 4 is the center of the patch.
    auto effects = single_fault_effects(memory().circuit);
    uint32_t key = memory().syndrome_key(effects[4].record_flips);
    EXPECT_EQ(std::popcount(SurfaceMemory::detectors_of(key)), 2);
    EXPECT_EQ(std::popcount(memory().z_defects(key)), 2);
    EXPECT_FALSE(SurfaceMemory::observable_flip(key));
    // A corner qubit on the logical row sits next to the boundary and flips the readout.
    uint32_t corner = memory().syndrome_key(effects[0].record_flips);
    EXPECT_EQ(std::popcount(memory().z_defects(corner)), 1);
    EXPECT_TRUE(SurfaceMemory::observable_flip(corner));
}

TEST(surface, graph_is_graphlike) {
    EXPECT_EQ(graph().num_decomposed(), 0u);
    EXPECT_GT(graph().edges().size(), 20u);
    for (const auto &e : graph().edges()) {
        EXPECT_GT(e.probability, 0);
        EXPECT_NEAR(e.weight, std::log((1 - e.probability) / e.probability), 1e-9);
    }
}

TEST(surface, every_single_fault_is_decoded) {
    for (const auto &e : single_fault_effects(memory().circuit)) {
        uint32_t key = memory().syndrome_key(e.record_flips);
        SoftOutput s = decode_mwpm(graph(), memory().z_defects(key));
        ASSERT_EQ(s.recovery, SurfaceMemory::observable_flip(key)) << e.location;
    }
}

TEST(surface, matcher_agrees_with_brute_force) {
    std::mt19937_64 rng(3);
    uint32_t nz = memory().num_z_detectors;
    for (int trial = 0; trial < 300; trial++) {
        uint32_t mask = 0;
        int k = static_cast<int>(rng() % 7);
        for (int i = 0; i < k; i++) {
            mask |= uint32_t{1} << (rng() % nz);
        }
        std::vector<uint32_t> d;
        for (uint32_t z = mask; z; z &= z - 1) {
            d.push_back(static_cast<uint32_t>(std::countr_zero(z)));
        }
        std::array<double, 2> best{INFINITY, INFINITY};
        brute_force(graph(), d, 0, 0, best);
        SoftOutput s = decode_mwpm(graph(), mask);
        for (int p = 0; p < 2; p++) {
            if (std::isfinite(best[p])) {
                ASSERT_NEAR(s.weights[p], best[p], 1e-9) << mask;
            }
        }
        if (best[0] != best[1]) {
            ASSERT_EQ(s.recovery, best[1] < best[0] ? 1 : 0) << mask;
        }
    }
}

TEST(surface, empty_syndrome_gap) {
    SoftOutput s = decode_mwpm(graph(), 0);
    EXPECT_EQ(s.recovery, 0);
    EXPECT_EQ(s.weights[0], 0);
    EXPECT_TRUE(std::isfinite(s.weights[1]));
    EXPECT_NEAR(s.gap, s.weights[1], 1e-12);
    // At least d = 3 faults separate the two sectors.
    double w1 = std::log((1 - 1e-3) / 1e-3);
    EXPECT_GT(s.gap, 2 * w1);
}

TEST(surface, ml_flip_matches_sampling) {
    const double eps = 3e-3;
    SurfaceMemory m = build_surface_memory(eps);
    SurfaceEnumeration en = enumerate_surface(m, 3);
    double mass = en.missing;
    for (const auto &[k, p] : en.mass) {
        mass += p;
    }
    EXPECT_NEAR(mass, 1, 1e-9);

    std::vector<std::pair<double, uint32_t>> top;
    for (const auto &[s, probs] : en.by_syndrome()) {
        top.push_back({probs[0] + probs[1], s});
    }
    std::partial_sort(top.begin(), top.begin() + 20, top.end(), std::greater<>());
    top.resize(20);

    std::map<uint32_t, std::array<uint64_t, 2>> counts;
    for (const auto &t : top) {
        counts[t.second] = {0, 0};
    }
    const uint64_t shots = 300000;
    for (uint64_t i = 0; i < shots; i++) {
        auto [rec, out] = sample_shot(m.circuit, shot_seed(11, i), PauliOp(9));
        uint32_t key = m.syndrome_key(rec.key.bits);
        auto it = counts.find(SurfaceMemory::detectors_of(key));
        if (it != counts.end()) {
            it->second[0]++;
            it->second[1] += SurfaceMemory::observable_flip(key);
        }
    }
    for (const auto &[s, c] : counts) {
        double ml = ml_flip_probability(en, s);
        ASSERT_GE(ml, 0);
        double n = static_cast<double>(c[0]);
        ASSERT_GT(n, 0);
        double f = c[1] / n;
        double sigma = std::sqrt(std::max(ml * (1 - ml), 1.0 / n) / n);
        EXPECT_NEAR(f, ml, 4 * sigma + 0.05 * ml) << s;
    }
}

TEST(surface, syndrome_channels_are_normalized) {
    SurfaceEnumeration en = enumerate_surface(memory(), 2);
    SyndromeChannels mw = surface_syndrome_channels(memory(), graph(), en, SurfaceDecoder::mwpm);
    SyndromeChannels ml = surface_syndrome_channels(memory(), graph(), en, SurfaceDecoder::ml);
    double total = mw.missing;
    for (const auto &e : mw.entries) {
        total += e.probability;
        ASSERT_NEAR(e.logical[0] + e.logical[1], 1, 1e-12);
    }
    EXPECT_NEAR(total, 1, 1e-9);
    // Maximum likelihood can never be worse on the enumerated mass.
    EXPECT_LE(ml.eps_l(), mw.eps_l() + 1e-15);
    EXPECT_LT(ml_flip_probability(en, 0x7FFFFFF), 0);
}
