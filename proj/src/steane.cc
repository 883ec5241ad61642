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

#include "salem/steane.h"

#include <algorithm>
#include <bit>
#include <sstream>
#include <tuple>

using namespace salem;

std::vector<PauliOp> CssCode::stabilizers() const {
    std::vector<PauliOp> out = x_stabilizers;
    out.insert(out.end(), z_stabilizers.begin(), z_stabilizers.end());
    return out;
}

void CssCode::validate() const {
    auto all = stabilizers();
    for (size_t i = 0; i < all.size(); i++) {
        for (size_t j = 0; j < all.size(); j++) {
            if (!all[i].commutes(all[j])) {
                throw std::logic_error("Stabilizers do not commute.");
            }
        }
        if (!all[i].commutes(logical_x) || !all[i].commutes(logical_z)) {
            throw std::logic_error("Logical operator anticommutes with a stabilizer.");
        }
    }
    if (logical_x.commutes(logical_z)) {
        throw std::logic_error("Logical X and Z must anticommute.");
    }
}

CssCode salem::steane_code() {
    CssCode c;
    c.name = "steane";
    c.n = 7;
    c.k = 1;
    c.d = 3;
    c.t_ft = 1;
    // Hamming parity checks: row b covers the qubits q with bit b of (q + 1) set.
    for (uint32_t b = 0; b < 3; b++) {
        uint64_t mask = 0;
        for (uint32_t q = 0; q < 7; q++) {
            if (((q + 1) >> b) & 1) {
                mask |= uint64_t{1} << q;
            }
        }
        c.x_stabilizers.emplace_back(7, mask, 0);
        c.z_stabilizers.emplace_back(7, 0, mask);
    }
    c.logical_x = PauliOp(7, 0x7F, 0);
    c.logical_z = PauliOp(7, 0, 0x7F);
    c.validate();
    return c;
}

CosetTable::CosetTable(CssCode code) : code_(std::move(code)), stabs_(code_.stabilizers()) {
    code_.validate();
    uint32_t n = code_.n;
    uint32_t r = code_.num_syndrome_bits();
    if (2 * n > 24 || r > 20) {
        throw DimensionError("Coset tables are built by exhaustive search and need small codes.");
    }
    // Enumerate every Pauli in (weight, lexicographic) order and keep the first hit per syndrome.
    std::vector<PauliOp> all;
    all.reserve(size_t{1} << (2 * n));
    for (uint64_t i = 0; i < (uint64_t{1} << (2 * n)); i++) {
        all.push_back(PauliOp::from_symplectic_index(n, i));
    }
    std::stable_sort(all.begin(), all.end(), [](const PauliOp &a, const PauliOp &b) {
        if (a.weight() != b.weight()) {
            return a.weight() < b.weight();
        }
        return a < b;
    });
    pure_errors_.assign(size_t{1} << r, PauliOp());
    std::vector<bool> seen(size_t{1} << r, false);
    for (const auto &p : all) {
        if (!p.commutes(code_.logical_x) || !p.commutes(code_.logical_z)) {
            continue;
        }
        uint32_t s = syndrome(p);
        if (!seen[s]) {
            seen[s] = true;
            pure_errors_[s] = p;
        }
    }
    for (size_t s = 0; s < seen.size(); s++) {
        if (!seen[s]) {
            throw std::logic_error("Stabilizer generators are not independent.");
        }
    }

    // CSS minimum-weight decoding treats the X part and the Z part separately.
    uint32_t nx = static_cast<uint32_t>(code_.x_stabilizers.size());
    std::vector<uint64_t> best_z(size_t{1} << nx, ~uint64_t{0});
    std::vector<uint64_t> best_x(size_t{1} << (r - nx), ~uint64_t{0});
    std::vector<uint64_t> masks(uint64_t{1} << n);
    for (uint64_t m = 0; m < masks.size(); m++) {
        masks[m] = m;
    }
    std::stable_sort(masks.begin(), masks.end(), [&](uint64_t a, uint64_t b) {
        int wa = std::popcount(a);
        int wb = std::popcount(b);
        if (wa != wb) {
            return wa < wb;
        }
        return PauliOp(n, a, 0) < PauliOp(n, b, 0);
    });
    for (uint64_t m : masks) {
        uint32_t sz = syndrome(PauliOp(n, 0, m)) & ((1u << nx) - 1);
        uint32_t sx = syndrome(PauliOp(n, m, 0)) >> nx;
        if (best_z[sz] == ~uint64_t{0}) {
            best_z[sz] = m;
        }
        if (best_x[sx] == ~uint64_t{0}) {
            best_x[sx] = m;
        }
    }
    min_weight_.resize(size_t{1} << r);
    for (uint32_t s = 0; s < (1u << r); s++) {
        uint64_t zm = best_z[s & ((1u << nx) - 1)];
        uint64_t xm = best_x[s >> nx];
        if (zm == ~uint64_t{0} || xm == ~uint64_t{0}) {
            throw std::logic_error("Syndrome without a CSS correction.");
        }
        min_weight_[s] = PauliOp(n, xm, zm);
    }
}

uint32_t CosetTable::syndrome(const PauliOp &p) const {
    uint32_t s = 0;
    for (size_t i = 0; i < stabs_.size(); i++) {
        if (!p.commutes(stabs_[i])) {
            s |= 1u << i;
        }
    }
    return s;
}

Coset CosetTable::reduce(const PauliOp &p) const {
    uint32_t s = syndrome(p);
    PauliOp q = p * pure_errors_[s];
    uint8_t l = 0;
    if (!q.commutes(code_.logical_z)) {
        l |= 1;
    }
    if (!q.commutes(code_.logical_x)) {
        l |= 2;
    }
    return {s, l};
}

PauliOp CosetTable::logical_operator(uint8_t logical_class) const {
    PauliOp out(code_.n);
    if (logical_class & 1) {
        out *= code_.logical_x;
    }
    if (logical_class & 2) {
        out *= code_.logical_z;
    }
    return out;
}

PauliOp CosetTable::representative(uint32_t coset_index) const {
    Coset c = Coset::from_index(coset_index);
    return pure_errors_.at(c.syndrome) * logical_operator(c.logical);
}

PauliOp CosetTable::min_weight_correction(uint32_t syndrome) const {
    return min_weight_.at(syndrome);
}

bool CosetTable::correctable_by_syndrome(const PauliOp &p) const {
    return reduce(p * min_weight_correction(syndrome(p))).logical == 0;
}

namespace {

struct CycleBuilder {
    CircuitBuilder &b;
    const CssCode &code;
    double eps;

    void reset_noisy(uint32_t q) {
        uint32_t op = b.reset(q);
        if (eps > 0) {
            b.noise(op, PauliChannel::bit_flip(eps / 2));
        }
    }

    void measure_noisy(uint32_t q, uint32_t slot) {
        uint32_t op = b.measure(q, slot);
        if (eps > 0) {
            b.noise(op, PauliChannel::bit_flip(eps / 2), Placement::before_op);
        }
    }

    void cnot_noisy(uint32_t c, uint32_t t) {
        uint32_t op = b.cnot(c, t);
        if (eps > 0) {
            b.noise(op, PauliChannel::depolarizing2(eps));
        }
    }

    static std::vector<uint32_t> support(const PauliOp &p) {
        std::vector<uint32_t> out;
        for (uint32_t q = 0; q < p.num_qubits; q++) {
            if (p.at(q) != 0) {
                out.push_back(q);
            }
        }
        return out;
    }

    // Gadget g < 3 measures X stabilizer g, gadget g >= 3 measures Z stabilizer g - 3.
    void gadget(uint32_t g, bool flagged, uint32_t syndrome_slot, uint32_t flag_slot) {
        const uint32_t A = SteaneLayout::ANCILLA;
        const uint32_t F = SteaneLayout::FLAG;
        bool x_type = g < 3;
        auto data = support(x_type ? code.x_stabilizers[g] : code.z_stabilizers[g - 3]);
        reset_noisy(A);
        if (flagged) {
            reset_noisy(F);
        }
        if (x_type) {
            b.h(A);
        } else if (flagged) {
            b.h(F);
        }
        for (size_t i = 0; i < data.size(); i++) {
            if (flagged && i + 1 == data.size()) {
                x_type ? cnot_noisy(A, F) : cnot_noisy(F, A);
            }
            x_type ? cnot_noisy(A, data[i]) : cnot_noisy(data[i], A);
            if (flagged && i == 0) {
                x_type ? cnot_noisy(A, F) : cnot_noisy(F, A);
            }
        }
        if (x_type) {
            b.h(A);
        } else if (flagged) {
            b.h(F);
        }
        measure_noisy(A, syndrome_slot);
        if (flagged) {
            measure_noisy(F, flag_slot);
        }
    }

    void round2() {
        for (uint32_t g = 0; g < SteaneLayout::NUM_GADGETS; g++) {
            gadget(g, false, SteaneLayout::round2_slot(g), 0);
        }
    }

    // Flagged gadgets from g on, each followed by a branch into the unflagged round.
    void round1_from(uint32_t g) {
        gadget(g, true, SteaneLayout::syndrome_slot(g), SteaneLayout::flag_slot(g));
        BranchPredicate pred{{SteaneLayout::syndrome_slot(g), SteaneLayout::flag_slot(g)}};
        if (g + 1 == SteaneLayout::NUM_GADGETS) {
            b.branch(pred, [&](CircuitBuilder &) { round2(); });
        } else {
            b.branch(pred, [&](CircuitBuilder &) { round2(); }, [&](CircuitBuilder &) { round1_from(g + 1); });
        }
    }
};

}  // namespace

FtCircuit salem::build_ec_cycle(double eps_ph, const SteaneCycleOptions &options) {
    if (!(eps_ph >= 0 && eps_ph < 1)) {
        throw std::invalid_argument("eps_ph must lie in [0, 1).");
    }
    CssCode code = steane_code();
    CircuitBuilder b(9, SteaneLayout::NUM_SLOTS);
    CycleBuilder cb{b, code, eps_ph};
    if (options.unflagged_only) {
        cb.round2();
    } else if (options.force_round2) {
        for (uint32_t g = 0; g < SteaneLayout::NUM_GADGETS; g++) {
            cb.gadget(g, true, SteaneLayout::syndrome_slot(g), SteaneLayout::flag_slot(g));
        }
        cb.round2();
    } else {
        cb.round1_from(0);
    }
    return b.build({0, 1, 2, 3, 4, 5, 6});
}

bool salem::is_realizable_steane_key(const RecordKey &key) {
    uint64_t round2 = uint64_t{0x3F} << 12;
    uint64_t r1_exec = key.executed & 0xFFF;
    bool has_round2 = (key.executed & round2) == round2;
    if ((key.executed & round2) != 0 && !has_round2) {
        return false;
    }
    if (key.executed & ~(round2 | 0xFFF)) {
        return false;
    }
    // Round 1 always runs a prefix of whole gadgets.
    int gadgets = std::popcount(r1_exec) / 2;
    if (r1_exec != (uint64_t{1} << (2 * gadgets)) - 1 || gadgets == 0) {
        return false;
    }
    uint64_t r1_bits = key.bits & 0xFFF;
    // Every gadget before the last executed one was trivial.
    uint64_t earlier = (uint64_t{1} << (2 * (gadgets - 1))) - 1;
    if (r1_bits & earlier) {
        return false;
    }
    bool last_fired = (r1_bits >> (2 * (gadgets - 1))) != 0;
    if (has_round2) {
        return last_fired;
    }
    return !last_fired && gadgets == static_cast<int>(SteaneLayout::NUM_GADGETS);
}

RecordKey salem::steane_syndrome_key(const RecordKey &record) {
    uint64_t round2 = uint64_t{0x3F} << SteaneLayout::round2_slot(0);
    RecordKey out;
    if ((record.executed & round2) == 0) {
        return out;
    }
    out.executed = round2;
    out.bits = record.bits & round2;
    int g = LutDecoder::flag_context(record);
    if (g >= 0) {
        uint64_t f = uint64_t{1} << SteaneLayout::flag_slot(static_cast<uint32_t>(g));
        out.executed |= f;
        out.bits |= f;
    }
    if (out.bits == 0) {
        return RecordKey{};
    }
    return out;
}

int LutDecoder::flag_context(const RecordKey &key) {
    for (uint32_t g = 0; g < SteaneLayout::NUM_GADGETS; g++) {
        if ((key.bits >> SteaneLayout::flag_slot(g)) & 1) {
            return static_cast<int>(g);
        }
    }
    return -1;
}

LutDecoder LutDecoder::build(const CosetTable &cosets) {
    // Only supports matter here, so any positive rate gives the same path set.
    FtCircuit circ = build_ec_cycle(1e-3);
    uint32_t n = cosets.code().n;

    std::map<RecordKey, std::vector<PauliOp>> groups;
    auto add = [&](const RecordKey &k, const PauliOp &out) {
        groups[steane_syndrome_key(k)].push_back(out);
    };
    enumerate_outcomes(circ, 1, PauliOp(n), [&](const RecordKey &k, const PauliOp &out, double) {
        add(k, out);
    });
    for (uint32_t q = 0; q < n; q++) {
        for (char c : {'X', 'Y', 'Z'}) {
            PauliOp in = PauliOp::single(n, q, c);
            enumerate_outcomes(circ, 0, in, [&](const RecordKey &k, const PauliOp &out, double) {
                add(k, out);
            });
        }
    }

    std::vector<PauliOp> candidates;
    for (uint64_t i = 0; i < (uint64_t{1} << (2 * n)); i++) {
        PauliOp p = PauliOp::from_symplectic_index(n, i);
        if (p.weight() <= 2) {
            candidates.push_back(p);
        }
    }

    LutDecoder dec;
    for (auto &[key, outs] : groups) {
        using Cost = std::tuple<size_t, size_t, size_t>;
        PauliOp best;
        Cost best_cost{~size_t{0}, 0, 0};
        bool have = false;
        for (const auto &r : candidates) {
            size_t uncorrectable = 0;
            size_t inexact = 0;
            for (const auto &o : outs) {
                PauliOp residual = r * o;
                Coset c = cosets.reduce(residual);
                if (c.syndrome != 0 || c.logical != 0) {
                    inexact++;
                }
                if (!cosets.correctable_by_syndrome(residual)) {
                    uncorrectable++;
                }
            }
            Cost cost{uncorrectable, inexact, r.weight()};
            if (!have || cost < best_cost || (cost == best_cost && r < best)) {
                best = r;
                best_cost = cost;
                have = true;
            }
        }
        dec.table_[key] = best;
    }
    uint32_t r = cosets.code().num_syndrome_bits();
    for (uint32_t s = 0; s < (1u << r); s++) {
        dec.fallback_.push_back(cosets.min_weight_correction(s));
    }
    return dec;
}

PauliOp LutDecoder::decode(const RecordKey &key) const {
    if (!is_realizable_steane_key(key)) {
        throw UnknownSyndrome("Record " + key.str(SteaneLayout::NUM_SLOTS) + " cannot come from the cycle.");
    }
    auto it = table_.find(steane_syndrome_key(key));
    if (it != table_.end()) {
        return it->second;
    }
    if (!((key.executed >> SteaneLayout::round2_slot(0)) & 1)) {
        return PauliOp(7);
    }
    uint32_t s2 = static_cast<uint32_t>((key.bits >> SteaneLayout::round2_slot(0)) & 0x3F);
    return fallback_.at(s2);
}

std::string LutDecoder::to_csv() const {
    std::ostringstream out;
    out << "canonical_key,recovery\n";
    for (const auto &[k, r] : table_) {
        out << k.str(SteaneLayout::NUM_SLOTS) << "," << r.str() << "\n";
    }
    return out.str();
}
