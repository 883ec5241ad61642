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
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>

using namespace salem;

namespace {

constexpr double INF = std::numeric_limits<double>::infinity();

// Offsets (dx, dy) per CNOT layer. X plaquettes sweep row by row and Z plaquettes column by column, so two
// plaquettes that share a pair of data qubits visit the pair in the same order. The last two X-layer targets form a
// horizontal pair, which keeps hook errors parallel to the logical Z.
constexpr std::array<std::pair<int, int>, 4> X_ORDER{{{-1, -1}, {1, -1}, {-1, 1}, {1, 1}}};
constexpr std::array<std::pair<int, int>, 4> Z_ORDER{{{-1, -1}, {-1, 1}, {1, -1}, {1, 1}}};

int data_index(int x, int y) {
    if (x < 0 || y < 0 || x > 6 || y > 6 || x % 2 == 0 || y % 2 == 0) {
        return -1;
    }
    return (y / 2) * 3 + x / 2;
}

}  // namespace

SurfaceLayout SurfaceLayout::build() {
    SurfaceLayout l;
    for (int j = 0; j < 3; j++) {
        for (int i = 0; i < 3; i++) {
            l.data.emplace_back(2 * i + 1, 2 * j + 1);
        }
    }
    const std::vector<std::tuple<int, int, bool>> sites = {
        {2, 2, true}, {4, 4, true}, {4, 0, true}, {2, 6, true},
        {4, 2, false}, {2, 4, false}, {0, 2, false}, {6, 4, false},
    };
    for (auto [x, y, is_x] : sites) {
        Ancilla a{x, y, is_x, {-1, -1, -1, -1}};
        const auto &order = is_x ? X_ORDER : Z_ORDER;
        for (int k = 0; k < 4; k++) {
            a.schedule[k] = data_index(x + order[k].first, y + order[k].second);
        }
        l.ancillas.push_back(a);
    }
    l.logical_z = {0, 1, 2};

    // Layout sanity: no data qubit is used twice in a layer, checks of different type overlap evenly,
    // and the logical commutes with every X check.
    for (int k = 0; k < 4; k++) {
        uint32_t used = 0;
        for (const auto &a : l.ancillas) {
            if (a.schedule[k] >= 0) {
                uint32_t bit = uint32_t{1} << a.schedule[k];
                if (used & bit) {
                    throw std::logic_error("CNOT schedule collision.");
                }
                used |= bit;
            }
        }
    }
    uint32_t lz = 0;
    for (auto q : l.logical_z) {
        lz |= uint32_t{1} << q;
    }
    for (uint32_t a = 0; a < l.ancillas.size(); a++) {
        for (uint32_t b = 0; b < l.ancillas.size(); b++) {
            if (l.ancillas[a].is_x && !l.ancillas[b].is_x && std::popcount(l.support(a) & l.support(b)) % 2) {
                throw std::logic_error("Checks do not commute.");
            }
        }
        if (l.ancillas[a].is_x && std::popcount(l.support(a) & lz) % 2) {
            throw std::logic_error("Logical Z anticommutes with an X check.");
        }
    }
    return l;
}

uint32_t SurfaceLayout::support(uint32_t ancilla) const {
    uint32_t m = 0;
    for (int q : ancillas.at(ancilla).schedule) {
        if (q >= 0) {
            m |= uint32_t{1} << q;
        }
    }
    return m;
}

uint32_t SurfaceMemory::syndrome_key(uint64_t record_bits) const {
    uint32_t key = 0;
    for (size_t i = 0; i < detectors.size(); i++) {
        key |= static_cast<uint32_t>(std::popcount(record_bits & detectors[i].records) & 1) << i;
    }
    key |= static_cast<uint32_t>(std::popcount(record_bits & observable) & 1) << 31;
    return key;
}

SurfaceMemory salem::build_surface_memory(double eps) {
    if (!(eps >= 0 && eps < 1)) {
        throw std::invalid_argument("eps must lie in [0, 1).");
    }
    SurfaceMemory m;
    m.eps = eps;
    m.layout = SurfaceLayout::build();
    const auto &lay = m.layout;
    uint32_t nd = lay.num_data();
    uint32_t na = static_cast<uint32_t>(lay.ancillas.size());
    uint32_t nrounds = SurfaceLayout::rounds;
    CircuitBuilder b(nd + na, nrounds * na + nd);
    auto flip = PauliChannel::bit_flip(eps);
    auto dep1 = PauliChannel::depolarizing1(eps);
    auto dep2 = PauliChannel::depolarizing2(eps);

    for (uint32_t q = 0; q < nd; q++) {
        b.noise(b.reset(q), flip);
    }
    for (uint32_t r = 0; r < nrounds; r++) {
        for (uint32_t a = 0; a < na; a++) {
            b.noise(b.reset(nd + a), flip);
        }
        for (uint32_t a = 0; a < na; a++) {
            if (lay.ancillas[a].is_x) {
                b.noise(b.h(nd + a), dep1);
            }
        }
        for (int k = 0; k < 4; k++) {
            for (uint32_t a = 0; a < na; a++) {
                int q = lay.ancillas[a].schedule[k];
                if (q < 0) {
                    continue;
                }
                uint32_t op = lay.ancillas[a].is_x ? b.cnot(nd + a, q) : b.cnot(q, nd + a);
                b.noise(op, dep2);
            }
        }
        for (uint32_t a = 0; a < na; a++) {
            if (lay.ancillas[a].is_x) {
                b.noise(b.h(nd + a), dep1);
            }
        }
        for (uint32_t a = 0; a < na; a++) {
            b.noise(b.measure(nd + a, r * na + a), flip, Placement::before_op);
        }
    }
    // Noiseless data readout stands in for the ideal final round.
    for (uint32_t q = 0; q < nd; q++) {
        b.measure(q, nrounds * na + q);
    }
    std::vector<uint32_t> data(nd);
    for (uint32_t q = 0; q < nd; q++) {
        data[q] = q;
    }
    m.circuit = b.build(data);

    auto rec = [&](uint32_t r, uint32_t a) {
        return uint64_t{1} << (r * na + a);
    };
    auto data_rec = [&](uint32_t support) {
        uint64_t mask = 0;
        for (uint32_t q = 0; q < nd; q++) {
            if ((support >> q) & 1) {
                mask |= uint64_t{1} << (nrounds * na + q);
            }
        }
        return mask;
    };
    for (uint32_t a = 0; a < na; a++) {
        if (lay.ancillas[a].is_x) {
            continue;
        }
        m.detectors.push_back({rec(0, a), true, 0});
        for (uint32_t r = 1; r < nrounds; r++) {
            m.detectors.push_back({rec(r, a) | rec(r - 1, a), true, r});
        }
        m.detectors.push_back({rec(nrounds - 1, a) | data_rec(lay.support(a)), true, nrounds});
    }
    m.num_z_detectors = static_cast<uint32_t>(m.detectors.size());
    // First-round X checks are random on a product-state input, so X detectors start at the second round.
    for (uint32_t a = 0; a < na; a++) {
        if (!lay.ancillas[a].is_x) {
            continue;
        }
        for (uint32_t r = 1; r < nrounds; r++) {
            m.detectors.push_back({rec(r, a) | rec(r - 1, a), false, r});
        }
    }
    uint32_t lz = 0;
    for (auto q : lay.logical_z) {
        lz |= uint32_t{1} << q;
    }
    m.observable = data_rec(lz);
    return m;
}

DecodingGraph::DecodingGraph(const SurfaceMemory &memory) : num_detectors_(memory.num_z_detectors) {
    uint32_t nb = num_detectors_;
    // Mechanisms keyed by (defect mask, logical flip); the same signature from different faults merges.
    std::map<std::pair<uint32_t, bool>, double> mech;
    for (const auto &e : single_fault_effects(memory.circuit)) {
        if (e.probability <= 0) {
            continue;
        }
        uint32_t key = memory.syndrome_key(e.record_flips);
        uint32_t z = memory.z_defects(key);
        bool flip = SurfaceMemory::observable_flip(key);
        if (z == 0) {
            if (flip) {
                throw std::logic_error("A single fault flips the logical without being detected.");
            }
            continue;
        }
        double &p = mech[{z, flip}];
        p = p * (1 - e.probability) + e.probability * (1 - p);
    }

    std::map<std::tuple<uint32_t, uint32_t, bool>, double> merged;
    auto add_edge = [&](uint32_t a, uint32_t b, bool flip, double p) {
        double &q = merged[{std::min(a, b), std::max(a, b), flip}];
        q = q * (1 - p) + p * (1 - q);
    };
    auto endpoints = [&](uint32_t z) -> std::pair<uint32_t, uint32_t> {
        uint32_t a = static_cast<uint32_t>(std::countr_zero(z));
        z &= z - 1;
        return {a, z ? static_cast<uint32_t>(std::countr_zero(z)) : nb};
    };
    std::vector<std::pair<std::pair<uint32_t, bool>, double>> wide;
    for (const auto &[k, p] : mech) {
        if (std::popcount(k.first) <= 2) {
            auto [a, b] = endpoints(k.first);
            add_edge(a, b, k.second, p);
        } else {
            wide.emplace_back(k, p);
        }
    }
    // Split wider mechanisms into existing edges whose signatures and flips add up.
    for (const auto &[k, p] : wide) {
        std::vector<std::tuple<uint32_t, uint32_t, bool>> parts;
        std::function<bool(uint32_t, bool)> split = [&](uint32_t z, bool flip) -> bool {
            if (z == 0) {
                return !flip;
            }
            uint32_t a = static_cast<uint32_t>(std::countr_zero(z));
            uint32_t rest = z & (z - 1);
            for (uint32_t b = 0; b <= nb; b++) {
                if (b != nb && (b == a || !((rest >> b) & 1))) {
                    continue;
                }
                for (bool f : {false, true}) {
                    if (!merged.count({std::min(a, b), std::max(a, b), f})) {
                        continue;
                    }
                    parts.emplace_back(a, b, f);
                    uint32_t next = b == nb ? rest : rest & ~(uint32_t{1} << b);
                    if (split(next, flip ^ f)) {
                        return true;
                    }
                    parts.pop_back();
                }
            }
            return false;
        };
        if (!split(k.first, k.second)) {
            throw std::logic_error("A fault mechanism could not be decomposed into graph edges.");
        }
        for (auto [a, b, f] : parts) {
            add_edge(a, b, f, p);
        }
        num_decomposed_++;
    }

    for (const auto &[k, p] : merged) {
        auto [a, b, f] = k;
        if (!(p > 0 && p < 0.5)) {
            throw std::logic_error("Edge probability outside (0, 1/2).");
        }
        edges_.push_back({a, b, p, std::log((1 - p) / p), f});
    }

    uint32_t n = nb + 1;
    dist_.assign(n * n * 2, INF);
    auto at = [&](uint32_t a, uint32_t b, int par) -> double & {
        return dist_[(a * n + b) * 2 + par];
    };
    for (uint32_t v = 0; v < n; v++) {
        at(v, v, 0) = 0;
    }
    for (const auto &e : edges_) {
        at(e.a, e.b, e.logical_flip) = std::min(at(e.a, e.b, e.logical_flip), e.weight);
        at(e.b, e.a, e.logical_flip) = std::min(at(e.b, e.a, e.logical_flip), e.weight);
    }
    for (uint32_t k = 0; k < n; k++) {
        for (uint32_t i = 0; i < n; i++) {
            for (uint32_t j = 0; j < n; j++) {
                for (int p = 0; p < 2; p++) {
                    for (int q = 0; q < 2; q++) {
                        double via = at(i, k, p) + at(k, j, q);
                        if (via < at(i, j, p ^ q)) {
                            at(i, j, p ^ q) = via;
                        }
                    }
                }
            }
        }
    }
}

nlohmann::json DecodingGraph::to_json() const {
    nlohmann::json edges = nlohmann::json::array();
    for (const auto &e : edges_) {
        edges.push_back({
            {"a", e.a},
            {"b", e.b == boundary() ? nlohmann::json("boundary") : nlohmann::json(e.b)},
            {"probability", e.probability},
            {"weight", e.weight},
            {"logical_flip", e.logical_flip},
        });
    }
    return {{"num_detectors", num_detectors_}, {"edges", edges}};
}

SoftOutput salem::decode_mwpm(const DecodingGraph &g, uint32_t defects) {
    std::vector<uint32_t> d;
    for (uint32_t z = defects; z; z &= z - 1) {
        d.push_back(static_cast<uint32_t>(std::countr_zero(z)));
    }
    if (d.size() > 20) {
        throw std::invalid_argument("Too many defects for exact matching.");
    }
    uint32_t full = (uint32_t{1} << d.size()) - 1;
    std::vector<std::array<double, 2>> f(full + 1, {INF, INF});
    f[0] = {0, INF};
    uint32_t b = g.boundary();
    for (uint32_t mask = 1; mask <= full; mask++) {
        uint32_t i = static_cast<uint32_t>(std::countr_zero(mask));
        uint32_t rest = mask & ~(uint32_t{1} << i);
        auto &out = f[mask];
        for (int p = 0; p < 2; p++) {
            if (f[rest][p] == INF) {
                continue;
            }
            for (int q = 0; q < 2; q++) {
                out[p ^ q] = std::min(out[p ^ q], f[rest][p] + g.distance(d[i], b, q));
            }
        }
        for (uint32_t r = rest; r; r &= r - 1) {
            uint32_t j = static_cast<uint32_t>(std::countr_zero(r));
            uint32_t sub = rest & ~(uint32_t{1} << j);
            for (int p = 0; p < 2; p++) {
                if (f[sub][p] == INF) {
                    continue;
                }
                for (int q = 0; q < 2; q++) {
                    out[p ^ q] = std::min(out[p ^ q], f[sub][p] + g.distance(d[i], d[j], q));
                }
            }
        }
    }
    // An odd-parity cycle (a logical operator) can be added to either sector.
    double cycle = INF;
    for (uint32_t v = 0; v <= b; v++) {
        cycle = std::min(cycle, g.distance(v, v, 1));
    }
    SoftOutput s;
    for (int p = 0; p < 2; p++) {
        s.weights[p] = std::min(f[full][p], f[full][p ^ 1] + cycle);
    }
    s.recovery = s.weights[1] < s.weights[0] ? 1 : 0;
    s.gap = std::abs(s.weights[0] - s.weights[1]);
    if (std::isnan(s.gap)) {
        s.gap = INF;
    }
    return s;
}

SurfaceEnumeration salem::enumerate_surface(const SurfaceMemory &memory, int max_weight) {
    if (max_weight < 0 || max_weight > 3) {
        throw std::invalid_argument("Surface enumeration supports weights 0 to 3.");
    }
    const FtCircuit &c = memory.circuit;
    auto effects = single_fault_effects(c);
    double p0 = 1;
    for (const auto &n : c.compiled_noise) {
        p0 *= 1 - n.total;
    }
    // Per outcome: syndrome key and odds relative to the no-fault case at its location.
    std::vector<uint32_t> key;
    std::vector<double> odds;
    std::vector<uint32_t> loc;
    for (const auto &e : effects) {
        if (e.probability <= 0) {
            continue;
        }
        key.push_back(memory.syndrome_key(e.record_flips));
        odds.push_back(e.probability / (1 - c.compiled_noise[e.location].total));
        loc.push_back(e.location);
    }
    size_t n = key.size();
    // next[i] is the first outcome at a later location, so each path picks at most one outcome per location.
    std::vector<size_t> next(n);
    for (size_t i = n; i-- > 0;) {
        next[i] = (i + 1 < n && loc[i + 1] == loc[i]) ? next[i + 1] : i + 1;
    }

    SurfaceEnumeration out;
    out.max_weight = max_weight;
    auto &mass = out.mass;
    mass[0] += p0;
    out.num_paths = 1;
    if (max_weight >= 1) {
        for (size_t a = 0; a < n; a++) {
            mass[key[a]] += p0 * odds[a];
            out.num_paths++;
            if (max_weight < 2) {
                continue;
            }
            for (size_t b = next[a]; b < n; b++) {
                uint32_t kab = key[a] ^ key[b];
                double pab = p0 * odds[a] * odds[b];
                mass[kab] += pab;
                out.num_paths++;
                if (max_weight < 3) {
                    continue;
                }
                for (size_t c3 = next[b]; c3 < n; c3++) {
                    mass[kab ^ key[c3]] += pab * odds[c3];
                }
                out.num_paths += n - next[b];
            }
        }
    }
    double total = 0;
    for (const auto &[k, p] : mass) {
        total += p;
    }
    out.missing = std::max(0.0, 1 - total);
    return out;
}

std::vector<std::pair<uint32_t, std::array<double, 2>>> SurfaceEnumeration::by_syndrome() const {
    absl::flat_hash_map<uint32_t, std::array<double, 2>> g;
    for (const auto &[k, p] : mass) {
        auto &v = g[SurfaceMemory::detectors_of(k)];
        v[SurfaceMemory::observable_flip(k)] += p;
    }
    std::vector<std::pair<uint32_t, std::array<double, 2>>> out(g.begin(), g.end());
    std::sort(out.begin(), out.end(), [](const auto &a, const auto &b) {
        return a.first < b.first;
    });
    return out;
}

double salem::ml_flip_probability(const SurfaceEnumeration &e, uint32_t detectors) {
    auto get = [&](uint32_t k) {
        auto it = e.mass.find(k);
        return it == e.mass.end() ? 0.0 : it->second;
    };
    double p0 = get(detectors);
    double p1 = get(detectors | (uint32_t{1} << 31));
    if (p0 + p1 <= 0) {
        return -1;
    }
    return p1 / (p0 + p1);
}

SyndromeChannels salem::surface_syndrome_channels(
    const SurfaceMemory &memory, const DecodingGraph &graph, const SurfaceEnumeration &enumeration,
    SurfaceDecoder decoder) {
    SyndromeChannels out;
    out.missing = enumeration.missing;
    absl::flat_hash_map<uint32_t, SoftOutput> cache;
    uint64_t executed = (uint64_t{1} << memory.detectors.size()) - 1;
    double log_eps = memory.eps > 0 ? std::log(memory.eps) : 0;
    for (const auto &[s, p] : enumeration.by_syndrome()) {
        uint32_t z = memory.z_defects(s);
        auto it = cache.find(z);
        if (it == cache.end()) {
            it = cache.emplace(z, decode_mwpm(graph, z)).first;
        }
        double total = p[0] + p[1];
        uint8_t l = it->second.recovery;
        if (decoder == SurfaceDecoder::ml) {
            l = p[1] > p[0] ? 1 : 0;
        }
        double fail = p[l ^ 1] / total;
        SyndromeEntry e;
        e.key = RecordKey{executed, s};
        e.probability = total;
        e.logical = {1 - fail, fail, 0, 0};
        e.gap = it->second.gap;
        e.min_faults = log_eps < 0 ? static_cast<int>(std::lround(std::log(total) / log_eps)) : 0;
        out.entries.push_back(e);
    }
    return out;
}
