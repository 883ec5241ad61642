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

#include <absl/container/flat_hash_map.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

using namespace salem;

CycleModel salem::steane_cycle_model(double eps_ph) {
    CosetTable cosets(steane_code());
    auto lut = std::make_shared<LutDecoder>(LutDecoder::build(cosets));
    return CycleModel{
        cosets,
        build_ec_cycle(eps_ph),
        build_ec_cycle(0),
        [lut](const RecordKey &k) {
            return lut->decode(k);
        },
        steane_syndrome_key,
        SteaneLayout::NUM_SLOTS,
        eps_ph,
    };
}

LogicalChannel LogicalChannel::normalized() const {
    LogicalChannel out = *this;
    double t = total();
    if (t <= 0) {
        throw std::domain_error("Cannot normalize an empty logical channel.");
    }
    for (auto &p : out.probs) {
        p /= t;
    }
    out.missing = 0;
    return out;
}

PauliChannel LogicalChannel::to_pauli_channel() const {
    LogicalChannel n = normalized();
    std::map<PauliOp, double> terms;
    for (uint8_t c = 0; c < 4; c++) {
        if (n.probs[c] != 0) {
            terms[logical_pauli(c)] = n.probs[c];
        }
    }
    return PauliChannel(1, std::move(terms), ChannelKind::probability);
}

nlohmann::json LogicalChannel::to_json() const {
    return {{"I", probs[0]}, {"X", probs[1]}, {"Z", probs[2]}, {"Y", probs[3]}, {"missing", missing}, {"tag", tag}};
}

double salem::total_variation(const LogicalChannel &a, const LogicalChannel &b) {
    auto na = a.normalized();
    auto nb = b.normalized();
    double d = 0;
    for (int c = 0; c < 4; c++) {
        d += std::abs(na.probs[c] - nb.probs[c]);
    }
    return d / 2;
}

int64_t JointTable::find_record(const RecordKey &key) const {
    auto it = std::lower_bound(records.begin(), records.end(), key);
    if (it == records.end() || *it != key) {
        return -1;
    }
    return it - records.begin();
}

size_t JointTable::num_identity_records() const {
    std::vector<bool> seen(records.size(), false);
    size_t n = 0;
    for (const auto &e : rows[0]) {
        if (!seen[e.record] && e.probability > 0) {
            seen[e.record] = true;
            n++;
        }
    }
    return n;
}

nlohmann::json JointTable::index_json() const {
    size_t entries = 0;
    for (const auto &r : rows) {
        entries += r.size();
    }
    return {
        {"num_slots", num_slots},
        {"num_cosets", num_cosets},
        {"eps_ph", eps_ph},
        {"max_weight", max_weight},
        {"num_records", records.size()},
        {"num_entries", entries},
        {"identity_records", num_identity_records()},
        {"missing_identity", missing.empty() ? 0.0 : missing[0]},
    };
}

JointTable salem::characterize_cycle(const CycleModel &model, int max_weight, const CharacterizeOptions &options) {
    if (max_weight < 1) {
        throw std::invalid_argument("max_weight must be at least 1.");
    }
    const CosetTable &cosets = model.cosets;
    uint32_t nc = cosets.num_cosets();
    absl::flat_hash_map<RecordKey, uint32_t> ids;
    std::vector<RecordKey> keys;
    auto id_of = [&](const RecordKey &k) {
        auto [it, fresh] = ids.try_emplace(k, static_cast<uint32_t>(keys.size()));
        if (fresh) {
            keys.push_back(k);
        }
        return it->second;
    };
    // Decoding is the hot spot, so recoveries are cached per key.
    absl::flat_hash_map<RecordKey, PauliOp> recovery;
    auto decode = [&](const RecordKey &k) -> const PauliOp & {
        auto it = recovery.find(k);
        if (it == recovery.end()) {
            it = recovery.emplace(k, model.decode(k)).first;
        }
        return it->second;
    };

    auto view_of = [&](const RecordKey &k) {
        return model.view ? model.view(k) : k;
    };

    JointTable t;
    t.num_slots = model.num_slots;
    t.num_cosets = nc;
    t.max_weight = max_weight;
    t.eps_ph = model.eps_ph;
    t.missing.assign(nc, 0);
    t.ideal_record.assign(nc, 0);
    t.ideal_out.assign(nc, 0);
    std::vector<absl::flat_hash_map<uint64_t, double>> acc(nc);

    // Logical operators commute with every check, so a logical input only relabels the output class. Cosets
    // with nonzero logical bits copy the row of their logical-free partner instead of being enumerated.
    for (uint32_t c = 0; c < nc; c += 4) {
        PauliOp input = cosets.representative(c);
        int w = max_weight - ((c != 0 && !options.uniform_weight) ? 1 : 0);
        auto summary = enumerate_outcomes(model.noisy, w, input, [&](const RecordKey &k, const PauliOp &out, double p) {
            uint32_t oc = cosets.reduce(out * decode(k)).index();
            acc[c][(uint64_t{id_of(view_of(k))} << 32) | oc] += p;
        });
        t.missing[c] = summary.missing_probability;
        enumerate_outcomes(model.ideal, 0, input, [&](const RecordKey &k, const PauliOp &out, double) {
            t.ideal_record[c] = id_of(view_of(k));
            t.ideal_out[c] = cosets.reduce(out * decode(k)).index();
        });
        for (uint32_t l = 1; l < 4; l++) {
            for (const auto &[k, p] : acc[c]) {
                acc[c | l][k ^ l] = p;
            }
            t.missing[c | l] = t.missing[c];
            t.ideal_record[c | l] = t.ideal_record[c];
            t.ideal_out[c | l] = t.ideal_out[c] ^ l;
        }
    }

    // Renumber records in key order so the table is independent of enumeration order.
    std::vector<uint32_t> order(keys.size());
    for (uint32_t i = 0; i < order.size(); i++) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
        return keys[a] < keys[b];
    });
    std::vector<uint32_t> remap(keys.size());
    t.records.resize(keys.size());
    for (uint32_t i = 0; i < order.size(); i++) {
        remap[order[i]] = i;
        t.records[i] = keys[order[i]];
    }
    for (auto &r : t.ideal_record) {
        r = remap[r];
    }
    t.rows.resize(nc);
    for (uint32_t c = 0; c < nc; c++) {
        auto &row = t.rows[c];
        row.reserve(acc[c].size());
        for (const auto &[k, p] : acc[c]) {
            row.push_back({remap[k >> 32], static_cast<uint32_t>(k & 0xFFFFFFFF), p});
        }
        std::sort(row.begin(), row.end(), [](const auto &a, const auto &b) {
            return std::tie(a.record, a.out) < std::tie(b.record, b.out);
        });
    }
    return t;
}

std::vector<double> salem::propagate_cosets(const JointTable &table, const std::vector<double> &input) {
    std::vector<double> out(table.num_cosets, 0);
    for (uint32_t c = 0; c < table.num_cosets; c++) {
        if (input[c] == 0) {
            continue;
        }
        for (const auto &e : table.rows[c]) {
            out[e.out] += input[c] * e.probability;
        }
    }
    return out;
}

LogicalChannel salem::ideal_readout(const JointTable &table, const std::vector<double> &cosets) {
    LogicalChannel ch;
    ch.probs = {0, 0, 0, 0};
    for (uint32_t c = 0; c < table.num_cosets; c++) {
        ch.probs[Coset::from_index(table.ideal_out[c]).logical] += cosets[c];
    }
    return ch;
}

P2lcResult salem::algorithm_p2lc(const JointTable &table, const P2lcOptions &options) {
    const uint32_t nc = table.num_cosets;
    const bool filtered = !options.accepted.empty();
    if (filtered && options.accepted.size() != table.records.size()) {
        throw std::invalid_argument("Acceptance mask does not match the record list.");
    }
    auto accepted = [&](uint32_t r) {
        return !filtered || options.accepted[r] != 0;
    };

    P2lcResult res;
    res.input.assign(nc, 0);
    if (options.input_errors) {
        // Output of a cycle fed with no error, restricted to accepted records of that earlier cycle.
        std::vector<double> prev(nc, 0);
        for (const auto &e : table.rows[0]) {
            if (accepted(e.record)) {
                prev[e.out] += e.probability;
            }
        }
        // Non-correctable outputs are replaced by I, then the input is renormalized over enumerated mass.
        double total = 0;
        for (uint32_t c = 0; c < nc; c++) {
            res.input[table.correctable(c) ? c : 0] += prev[c];
            total += prev[c];
        }
        if (total <= 0) {
            throw std::domain_error("The acceptance set rejects every record of the identity input.");
        }
        for (auto &p : res.input) {
            p /= total;
        }
    } else {
        res.input[0] = 1;
    }

    std::vector<std::array<double, 4>> logical(table.records.size(), {0, 0, 0, 0});
    std::vector<double> prob(table.records.size(), 0);
    double all = 0;
    for (uint32_t c = 0; c < nc; c++) {
        double pin = res.input[c];
        if (pin == 0) {
            continue;
        }
        res.missing += pin * table.missing[c];
        for (const auto &e : table.rows[c]) {
            double m = pin * e.probability;
            all += m;
            if (!accepted(e.record)) {
                continue;
            }
            prob[e.record] += m;
            if (filtered && options.future_acceptance && !accepted(table.ideal_record[e.out])) {
                continue;
            }
            logical[e.record][Coset::from_index(table.ideal_out[e.out]).logical] += m;
        }
    }

    res.channel.probs = {0, 0, 0, 0};
    double acc_mass = 0;
    for (uint32_t r = 0; r < table.records.size(); r++) {
        if (prob[r] == 0) {
            continue;
        }
        res.per_record.push_back({r, prob[r], logical[r]});
        acc_mass += prob[r];
        for (int c = 0; c < 4; c++) {
            res.channel.probs[c] += logical[r][c];
        }
    }
    res.accept_probability = all > 0 ? acc_mass / all : 0;
    res.channel.missing = res.missing;
    res.channel.tag = filtered ? "accepted" : "all";
    return res;
}

LogicalChannel SyndromeChannels::average() const {
    LogicalChannel ch;
    ch.probs = {0, 0, 0, 0};
    for (const auto &e : entries) {
        for (int c = 0; c < 4; c++) {
            ch.probs[c] += e.probability * e.logical[c];
        }
    }
    ch.missing = missing;
    return ch;
}

SyndromeChannels salem::syndrome_channels(const JointTable &table, const P2lcResult &result) {
    SyndromeChannels out;
    out.missing = result.missing;
    double log_eps = table.eps_ph > 0 ? std::log(table.eps_ph) : 0;
    for (const auto &rc : result.per_record) {
        double t = rc.logical[0] + rc.logical[1] + rc.logical[2] + rc.logical[3];
        if (t <= 0) {
            continue;
        }
        SyndromeEntry e;
        e.key = table.records[rc.record];
        e.probability = rc.probability;
        for (int c = 0; c < 4; c++) {
            e.logical[c] = rc.logical[c] / t;
        }
        // P(s) ~ eps^m for the fewest faults m that produce s.
        e.min_faults = log_eps < 0 ? static_cast<int>(std::lround(std::log(rc.probability) / log_eps)) : 0;
        out.entries.push_back(e);
    }
    return out;
}

int Partition::classify(const RecordKey &key) const {
    auto it = in_s1.find(key);
    if (it == in_s1.end()) {
        return 1;
    }
    return it->second ? 1 : 0;
}

namespace {

double score(const SyndromeEntry &e, PartitionFamily family) {
    return family == PartitionFamily::lut_eps ? e.infidelity() : std::exp(-e.gap);
}

/// 1 / W^2 of the inverse of a normalized single-qubit logical channel, zero when it is singular.
double inverse_gamma(const std::array<double, 4> &logical) {
    LogicalChannel ch;
    ch.probs = logical;
    try {
        double w = invert_channel(ch.to_pauli_channel()).norm_w;
        return 1 / (w * w);
    } catch (const SingularChannel &) {
        return 0;
    }
}

}  // namespace

Partition salem::partition_by_threshold(const SyndromeChannels &channels, PartitionFamily family, double tau) {
    if (!(tau >= 0 && tau <= 1)) {
        throw std::invalid_argument("tau must lie in [0, 1].");
    }
    Partition p;
    p.family = family;
    p.tau = tau;
    for (const auto &e : channels.entries) {
        p.in_s1[e.key] = score(e, family) > tau;
    }
    return p;
}

nlohmann::json PartitionStats::to_json() const {
    return {
        {"tau", tau},
        {"p_s1", p_s1},
        {"eps_l", eps_l},
        {"eps_l0", eps_l0},
        {"eps_l1", eps_l1},
        {"p1_given_l", p1_given_l},
        {"min_faults_s1", min_faults_s1},
    };
}

PartitionStats salem::partition_stats(const SyndromeChannels &channels, const Partition &partition) {
    PartitionStats st;
    st.tau = partition.tau;
    st.channel0.probs = {0, 0, 0, 0};
    st.channel1.probs = {0, 0, 0, 0};
    st.channel0.tag = "S0";
    st.channel1.tag = "S1";
    st.min_faults_s1 = std::numeric_limits<int>::max();
    double m0 = 0;
    double m1 = 0;
    double err0 = 0;
    double err1 = 0;
    for (const auto &e : channels.entries) {
        bool s1 = partition.classify(e.key) == 1;
        auto &ch = s1 ? st.channel1 : st.channel0;
        for (int c = 0; c < 4; c++) {
            ch.probs[c] += e.probability * e.logical[c];
        }
        (s1 ? m1 : m0) += e.probability;
        (s1 ? err1 : err0) += e.probability * e.infidelity();
        if (s1) {
            st.min_faults_s1 = std::min(st.min_faults_s1, e.min_faults);
        }
    }
    if (m0 <= 0) {
        throw std::domain_error("The partition rejects every syndrome.");
    }
    if (m1 == 0) {
        st.min_faults_s1 = 0;
    }
    st.p_s1 = m1 / (m0 + m1);
    st.eps_l = (err0 + err1) / (m0 + m1);
    st.eps_l0 = err0 / m0;
    st.eps_l1 = m1 > 0 ? err1 / m1 : 0;
    st.p1_given_l = (err0 + err1) > 0 ? err1 / (err0 + err1) : 0;
    return st;
}

double salem::fg_lambda(const SyndromeChannels &channels, double eps_missing, bool ml_shift) {
    double harmonic = 0;
    double eps = 0;
    for (const auto &e : channels.entries) {
        std::array<double, 4> l = e.logical;
        if (ml_shift) {
            uint8_t best = static_cast<uint8_t>(std::max_element(l.begin(), l.end()) - l.begin());
            std::array<double, 4> shifted{};
            for (uint8_t c = 0; c < 4; c++) {
                shifted[c] = l[c ^ best];
            }
            l = shifted;
        }
        harmonic += e.probability * inverse_gamma(l);
        eps += e.probability * (1 - l[0]);
    }
    double g = 1 - 2 * eps_missing;
    harmonic += channels.missing * g * g;
    eps += channels.missing * eps_missing;
    if (eps <= 0) {
        return 0;
    }
    return -std::log(harmonic) / eps;
}

MissingScan salem::missing_mass_scan(const SyndromeChannels &channels, const std::vector<double> &grid, bool ml_shift) {
    if (grid.empty()) {
        throw std::invalid_argument("Empty scan grid.");
    }
    MissingScan scan;
    scan.min = std::numeric_limits<double>::infinity();
    scan.max = -scan.min;
    for (double x : grid) {
        if (!(x >= 0 && x <= 1)) {
            throw std::invalid_argument("eps_missing must lie in [0, 1].");
        }
        double l = fg_lambda(channels, x, ml_shift);
        scan.grid.emplace_back(x, l);
        scan.min = std::min(scan.min, l);
        scan.max = std::max(scan.max, l);
    }
    scan.mid = fg_lambda(channels, 0.5, ml_shift);
    return scan;
}
