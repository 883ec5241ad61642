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

#include "salem/shot_model.h"

#include <algorithm>
#include <map>

using namespace salem;

namespace {

uint8_t class_of(const PauliOp &p) {
    return static_cast<uint8_t>(p.at(0));
}

struct QpTable {
    std::array<double, 4> probs{0, 0, 0, 0};
    std::array<int8_t, 4> signs{1, 1, 1, 1};
    double log_w = 0;
};

QpTable qp_table(const QpDecomposition &qp) {
    QpTable t;
    for (const auto &[p, w] : qp.probs) {
        if (p.num_qubits != 1) {
            throw DimensionError("Logical corrections must act on one logical qubit.");
        }
        t.probs[class_of(p)] = w;
    }
    for (const auto &[p, s] : qp.signs) {
        t.signs[class_of(p)] = static_cast<int8_t>(s);
    }
    t.log_w = std::log(qp.norm_w);
    return t;
}

uint8_t draw_correction(const QpTable &t, std::mt19937_64 &rng) {
    double u = uniform01(rng);
    double acc = 0;
    for (uint8_t c = 0; c < 4; c++) {
        acc += t.probs[c];
        if (u < acc) {
            return c;
        }
    }
    // Rounding left a sliver past the last bin; give it to the last nonzero term.
    for (uint8_t c = 4; c-- > 0;) {
        if (t.probs[c] > 0) {
            return c;
        }
    }
    return 0;
}

}  // namespace

int ShotPolicy::classify(const JointTable &table, const RecordKey &key) const {
    int64_t r = table.find_record(key);
    if (r < 0) {
        return unknown_class;
    }
    return record_class.at(static_cast<size_t>(r));
}

CompressedMemory::CompressedMemory(const JointTable &table, ShotPolicy policy)
    : policy_(std::move(policy)), ideal_record_(table.ideal_record), ideal_out_(table.ideal_out) {
    if (policy_.record_class.size() != table.records.size()) {
        throw std::invalid_argument("Policy classes do not match the table records.");
    }
    size_t nk = policy_.actions.size();
    if (nk == 0 || policy_.actions[0] == CycleAction::reject) {
        throw std::invalid_argument("Subset 0 must exist and must not be rejected.");
    }
    for (auto c : policy_.record_class) {
        if (c >= nk) {
            throw std::invalid_argument("Record class without an action.");
        }
    }
    std::vector<QpTable> qp(nk);
    log_w_.assign(nk, 0);
    qp_sign_.assign(nk, {1, 1, 1, 1});
    for (size_t k = 0; k < nk; k++) {
        if (policy_.actions[k] == CycleAction::invert) {
            qp[k] = qp_table(policy_.inverses.at(k));
            log_w_[k] = qp[k].log_w;
            qp_sign_[k] = qp[k].signs;
        }
    }

    rows_.resize(table.num_cosets);
    for (uint32_t c = 0; c < table.num_cosets; c++) {
        std::map<std::pair<uint32_t, uint16_t>, double> agg;
        double total = 0;
        for (const auto &e : table.rows[c]) {
            agg[{e.out, policy_.record_class[e.record]}] += e.probability;
            total += e.probability;
        }
        if (total <= 0) {
            continue;
        }
        Row &row = rows_[c];
        double acc = 0;
        for (const auto &[key, p] : agg) {
            auto [out, cls] = key;
            if (policy_.actions[cls] == CycleAction::invert) {
                for (uint8_t s = 0; s < 4; s++) {
                    if (qp[cls].probs[s] > 0) {
                        acc += p / total * qp[cls].probs[s];
                        row.cumulative.push_back(acc);
                        row.moves.push_back({out, cls, s});
                    }
                }
            } else {
                acc += p / total;
                row.cumulative.push_back(acc);
                row.moves.push_back({out, cls, 0});
            }
        }
    }

    // Split off the quiet move of the identity row.
    const Row &id = rows_.at(0);
    bool quiet_allowed = policy_.actions[0] != CycleAction::invert || qp_sign_[0][0] > 0;
    double prev = 0;
    for (size_t i = 0; i < id.moves.size(); i++) {
        double p = id.cumulative[i] - prev;
        prev = id.cumulative[i];
        const Move &m = id.moves[i];
        if (quiet_allowed && m.out == 0 && m.cls == 0 && m.correction == 0) {
            quiet_ = p;
            continue;
        }
        loud_.moves.push_back(m);
        loud_.cumulative.push_back(p);
    }
    double acc = 0;
    for (auto &c : loud_.cumulative) {
        acc += c;
        c = acc;
    }
    for (auto &c : loud_.cumulative) {
        c /= acc;
    }
    log_quiet_ = quiet_ > 0 ? std::log(quiet_) : 0;
}

const CompressedMemory::Move &CompressedMemory::draw(const Row &row, std::mt19937_64 &rng) const {
    double u = uniform01(rng) * row.cumulative.back();
    auto it = std::upper_bound(row.cumulative.begin(), row.cumulative.end(), u);
    if (it == row.cumulative.end()) {
        --it;
    }
    return row.moves[it - row.cumulative.begin()];
}

void CompressedMemory::apply(const Move &m, ShotOutcome &shot, uint8_t &correction) const {
    if (policy_.actions[m.cls] == CycleAction::invert) {
        shot.log_weight += log_w_[m.cls];
        shot.sign *= qp_sign_[m.cls][m.correction];
        shot.inversions[m.cls == 0 ? 0 : 1]++;
        correction ^= m.correction;
    }
}

ShotOutcome CompressedMemory::run(uint32_t volume, std::mt19937_64 &rng) const {
    ShotOutcome shot;
    uint32_t state = 0;
    uint8_t correction = 0;
    uint32_t j = 0;
    while (j < volume) {
        const Move *m;
        if (state == 0 && quiet_ > 0) {
            uint32_t left = volume - j;
            uint64_t g = left;
            if (quiet_ < 1) {
                double u = uniform01(rng);
                double q = std::floor(std::log1p(-u) / log_quiet_);
                g = q < left ? static_cast<uint64_t>(q) : left;
            }
            j += static_cast<uint32_t>(g);
            if (policy_.actions[0] == CycleAction::invert) {
                shot.log_weight += static_cast<double>(g) * log_w_[0];
                shot.inversions[0] += static_cast<uint32_t>(g);
            }
            if (j == volume) {
                break;
            }
            m = &draw(loud_, rng);
        } else {
            if (rows_[state].moves.empty()) {
                throw std::logic_error("The joint table has no row for a reachable coset.");
            }
            m = &draw(rows_[state], rng);
        }
        j++;
        if (policy_.actions[m->cls] == CycleAction::reject) {
            shot.accepted = false;
            shot.cycles_run = j;
            return shot;
        }
        apply(*m, shot, correction);
        state = m->out;
    }
    shot.cycles_run = volume;
    if (policy_.check_final && policy_.actions[policy_.record_class[ideal_record_[state]]] == CycleAction::reject) {
        shot.accepted = false;
        return shot;
    }
    uint8_t logical = Coset::from_index(ideal_out_[state]).logical ^ correction;
    shot.readout = (logical & 1) ? -1 : 1;
    return shot;
}

ShotOutcome salem::full_memory_shot(
    const CycleModel &model, const JointTable &table, const ShotPolicy &policy, uint32_t volume,
    std::mt19937_64 &rng) {
    std::vector<QpTable> qp(policy.actions.size());
    for (size_t k = 0; k < qp.size(); k++) {
        if (policy.actions[k] == CycleAction::invert) {
            qp[k] = qp_table(policy.inverses.at(k));
        }
    }
    auto view = [&](const RecordKey &k) {
        return model.view ? model.view(k) : k;
    };
    ShotOutcome shot;
    PauliOp frame(model.cosets.code().n);
    uint8_t correction = 0;
    for (uint32_t j = 0; j < volume; j++) {
        auto [rec, out] = sample_shot_with(model.noisy, rng, frame);
        frame = out * model.decode(rec.key);
        int cls = policy.classify(table, view(rec.key));
        switch (policy.actions[cls]) {
            case CycleAction::reject:
                shot.accepted = false;
                shot.cycles_run = j + 1;
                return shot;
            case CycleAction::invert: {
                uint8_t s = draw_correction(qp[cls], rng);
                shot.log_weight += qp[cls].log_w;
                shot.sign *= qp[cls].signs[s];
                shot.inversions[cls == 0 ? 0 : 1]++;
                correction ^= s;
                break;
            }
            case CycleAction::nothing:
                break;
        }
    }
    shot.cycles_run = volume;
    auto [rec, out] = sample_shot_with(model.ideal, rng, frame);
    PauliOp residual = out * model.decode(rec.key);
    if (policy.check_final && policy.actions[policy.classify(table, view(rec.key))] == CycleAction::reject) {
        shot.accepted = false;
        return shot;
    }
    uint8_t logical = model.cosets.reduce(residual).logical ^ correction;
    shot.readout = (logical & 1) ? -1 : 1;
    return shot;
}
