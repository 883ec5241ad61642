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

#include "salem/pauli.h"

#include <bit>
#include <cmath>
#include <sstream>

using namespace salem;

namespace {

constexpr double PRUNE_TOLERANCE = 1e-15;
constexpr double SUM_TOLERANCE = 1e-12;
constexpr double SINGULAR_TOLERANCE = 1e-12;
constexpr uint32_t MAX_DENSE_QUBITS = 8;

uint64_t qubit_mask(uint32_t n) {
    return n >= 64 ? ~uint64_t{0} : (uint64_t{1} << n) - 1;
}

// Exchanges the X half and the Z half of a symplectic index.
uint64_t swap_halves(uint64_t index, uint32_t n) {
    uint64_t lo = index & qubit_mask(n);
    uint64_t hi = index >> n;
    return hi | (lo << n);
}

}  // namespace

PauliOp::PauliOp(uint32_t num_qubits, uint64_t xs, uint64_t zs) : num_qubits(num_qubits), xs(xs), zs(zs) {
    if (num_qubits > MAX_PAULI_QUBITS) {
        throw DimensionError("PauliOp supports at most 64 qubits.");
    }
    uint64_t m = qubit_mask(num_qubits);
    if ((xs & ~m) || (zs & ~m)) {
        throw DimensionError("PauliOp mask has bits beyond num_qubits.");
    }
}

PauliOp PauliOp::identity(uint32_t num_qubits) {
    return PauliOp(num_qubits);
}

PauliOp PauliOp::single(uint32_t num_qubits, uint32_t qubit, char pauli) {
    if (qubit >= num_qubits) {
        throw DimensionError("Qubit index out of range.");
    }
    uint64_t b = uint64_t{1} << qubit;
    switch (pauli) {
        case 'I':
            return PauliOp(num_qubits);
        case 'X':
            return PauliOp(num_qubits, b, 0);
        case 'Y':
            return PauliOp(num_qubits, b, b);
        case 'Z':
            return PauliOp(num_qubits, 0, b);
        default:
            throw std::invalid_argument(std::string("Unknown Pauli character: ") + pauli);
    }
}

PauliOp PauliOp::from_str(std::string_view text) {
    PauliOp result(static_cast<uint32_t>(text.size()));
    for (size_t q = 0; q < text.size(); q++) {
        char c = text[q];
        if (c == '_') {
            c = 'I';
        }
        result *= single(result.num_qubits, static_cast<uint32_t>(q), c);
    }
    return result;
}

size_t PauliOp::weight() const {
    return std::popcount(xs | zs);
}

bool PauliOp::is_identity() const {
    return xs == 0 && zs == 0;
}

bool PauliOp::commutes(const PauliOp &other) const {
    if (num_qubits != other.num_qubits) {
        throw DimensionError("Pauli qubit counts differ.");
    }
    return (std::popcount(xs & other.zs) + std::popcount(zs & other.xs)) % 2 == 0;
}

uint8_t PauliOp::at(uint32_t qubit) const {
    uint8_t x = (xs >> qubit) & 1;
    uint8_t z = (zs >> qubit) & 1;
    return static_cast<uint8_t>(x | (z << 1));
}

std::string PauliOp::str() const {
    static constexpr char CHARS[4] = {'I', 'X', 'Z', 'Y'};
    std::string out(num_qubits, 'I');
    for (uint32_t q = 0; q < num_qubits; q++) {
        out[q] = CHARS[at(q)];
    }
    return out;
}

uint64_t PauliOp::symplectic_index() const {
    if (num_qubits > 32) {
        throw DimensionError("Dense symplectic index needs num_qubits <= 32.");
    }
    return xs | (zs << num_qubits);
}

PauliOp PauliOp::from_symplectic_index(uint32_t num_qubits, uint64_t index) {
    return PauliOp(num_qubits, index & qubit_mask(num_qubits), index >> num_qubits);
}

PauliOp &PauliOp::operator*=(const PauliOp &rhs) {
    if (num_qubits != rhs.num_qubits) {
        throw DimensionError("Pauli qubit counts differ.");
    }
    xs ^= rhs.xs;
    zs ^= rhs.zs;
    return *this;
}

PauliOp PauliOp::operator*(const PauliOp &rhs) const {
    PauliOp r = *this;
    r *= rhs;
    return r;
}

bool PauliOp::operator<(const PauliOp &other) const {
    if (num_qubits != other.num_qubits) {
        return num_qubits < other.num_qubits;
    }
    // Qubit 0 is the most significant position, so order agrees with str() under I < X < Z < Y.
    for (uint32_t q = 0; q < num_qubits; q++) {
        uint8_t a = at(q);
        uint8_t b = other.at(q);
        if (a != b) {
            return a < b;
        }
    }
    return false;
}

std::ostream &salem::operator<<(std::ostream &out, const PauliOp &op) {
    return out << op.str();
}

PauliOp salem::compose(const PauliOp &a, const PauliOp &b) {
    return a * b;
}

PauliChannel::PauliChannel(uint32_t num_qubits, std::map<PauliOp, double> terms, ChannelKind kind)
    : num_qubits_(num_qubits), terms_(std::move(terms)), kind_(kind) {
    double total = 0;
    for (const auto &[p, w] : terms_) {
        if (p.num_qubits != num_qubits) {
            throw DimensionError("Channel term has the wrong qubit count.");
        }
        if (kind == ChannelKind::probability && w < -PRUNE_TOLERANCE) {
            throw std::invalid_argument("Probability channel has a negative weight.");
        }
        total += w;
    }
    if (std::abs(total - 1) > SUM_TOLERANCE * std::max(1.0, one_norm())) {
        throw std::invalid_argument("Channel weights must sum to 1.");
    }
}

PauliChannel PauliChannel::identity(uint32_t num_qubits) {
    return PauliChannel(num_qubits, {{PauliOp(num_qubits), 1.0}}, ChannelKind::probability);
}

PauliChannel PauliChannel::bit_flip(double p) {
    return single_pauli(PauliOp::single(1, 0, 'X'), p);
}

PauliChannel PauliChannel::single_pauli(const PauliOp &p_op, double p) {
    if (p_op.is_identity()) {
        return identity(p_op.num_qubits);
    }
    std::map<PauliOp, double> t;
    t[PauliOp(p_op.num_qubits)] = 1 - p;
    t[p_op] = p;
    return PauliChannel(p_op.num_qubits, std::move(t), ChannelKind::probability);
}

PauliChannel PauliChannel::depolarizing1(double eps) {
    std::map<PauliOp, double> t;
    t[PauliOp(1)] = 1 - eps;
    for (char c : {'X', 'Y', 'Z'}) {
        t[PauliOp::single(1, 0, c)] = eps / 3;
    }
    return PauliChannel(1, std::move(t), ChannelKind::probability);
}

PauliChannel PauliChannel::depolarizing2(double eps) {
    std::map<PauliOp, double> t;
    for (uint64_t i = 0; i < 16; i++) {
        PauliOp p = PauliOp::from_symplectic_index(2, i);
        t[p] = p.is_identity() ? 1 - eps : eps / 15;
    }
    return PauliChannel(2, std::move(t), ChannelKind::probability);
}

double PauliChannel::weight(const PauliOp &p) const {
    auto it = terms_.find(p);
    return it == terms_.end() ? 0.0 : it->second;
}

double PauliChannel::infidelity() const {
    return 1 - weight(PauliOp(num_qubits_));
}

double PauliChannel::one_norm() const {
    double t = 0;
    for (const auto &kv : terms_) {
        t += std::abs(kv.second);
    }
    return t;
}

void salem::walsh_hadamard(Eigen::VectorXd &v) {
    Eigen::Index n = v.size();
    for (Eigen::Index h = 1; h < n; h <<= 1) {
        for (Eigen::Index i = 0; i < n; i += h << 1) {
            for (Eigen::Index j = i; j < i + h; j++) {
                double a = v[j];
                double b = v[j + h];
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
    }
}

Eigen::VectorXd PauliChannel::eigenvalues() const {
    if (num_qubits_ > MAX_DENSE_QUBITS) {
        throw DimensionError("Dense channel transforms are limited to 8 qubits.");
    }
    uint64_t size = uint64_t{1} << (2 * num_qubits_);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size));
    for (const auto &[p, w] : terms_) {
        c[static_cast<Eigen::Index>(p.symplectic_index())] = w;
    }
    walsh_hadamard(c);
    // The transform pairs x with x and z with z; the symplectic form pairs x with z.
    Eigen::VectorXd out(c.size());
    for (uint64_t i = 0; i < size; i++) {
        out[static_cast<Eigen::Index>(i)] = c[static_cast<Eigen::Index>(swap_halves(i, num_qubits_))];
    }
    return out;
}

nlohmann::json PauliChannel::to_json() const {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto &[p, w] : terms_) {
        terms.push_back({{"pauli", p.str()}, {"weight", w}});
    }
    return {
        {"n", num_qubits_},
        {"kind", kind_ == ChannelKind::probability ? "probability" : "quasiprobability"},
        {"terms", terms},
    };
}

PauliChannel PauliChannel::from_json(const nlohmann::json &j) {
    uint32_t n = j.at("n").get<uint32_t>();
    std::string kind = j.at("kind").get<std::string>();
    if (kind != "probability" && kind != "quasiprobability") {
        throw std::invalid_argument("Unknown channel kind: " + kind);
    }
    std::map<PauliOp, double> t;
    for (const auto &term : j.at("terms")) {
        PauliOp p = PauliOp::from_str(term.at("pauli").get<std::string>());
        if (p.num_qubits != n) {
            throw DimensionError("Channel term length does not match n.");
        }
        t[p] += term.at("weight").get<double>();
    }
    return PauliChannel(
        n, std::move(t), kind == "probability" ? ChannelKind::probability : ChannelKind::quasiprobability);
}

PauliChannel salem::convolve(const PauliChannel &a, const PauliChannel &b) {
    if (a.num_qubits() != b.num_qubits()) {
        throw DimensionError("Cannot convolve channels of different sizes.");
    }
    std::map<PauliOp, double> out;
    for (const auto &[p, wp] : a.terms()) {
        for (const auto &[q, wq] : b.terms()) {
            out[p * q] += wp * wq;
        }
    }
    bool nonnegative = true;
    for (auto it = out.begin(); it != out.end();) {
        if (std::abs(it->second) < PRUNE_TOLERANCE) {
            it = out.erase(it);
        } else {
            nonnegative &= it->second >= 0;
            ++it;
        }
    }
    bool prob = a.kind() == ChannelKind::probability && b.kind() == ChannelKind::probability && nonnegative;
    return PauliChannel(a.num_qubits(), std::move(out), prob ? ChannelKind::probability : ChannelKind::quasiprobability);
}

PauliChannel QpDecomposition::reconstruct() const {
    uint32_t n = probs.empty() ? 0 : probs.begin()->first.num_qubits;
    std::map<PauliOp, double> t;
    for (const auto &[p, pr] : probs) {
        t[p] = norm_w * signs.at(p) * pr;
    }
    return PauliChannel(n, std::move(t), ChannelKind::quasiprobability);
}

QpDecomposition salem::invert_channel(const PauliChannel &channel) {
    uint32_t n = channel.num_qubits();
    Eigen::VectorXd lambda = channel.eigenvalues();
    uint64_t size = static_cast<uint64_t>(lambda.size());
    for (uint64_t i = 0; i < size; i++) {
        if (std::abs(lambda[static_cast<Eigen::Index>(i)]) < SINGULAR_TOLERANCE) {
            PauliOp a = PauliOp::from_symplectic_index(n, i);
            throw SingularChannel("Channel is singular: eigenvalue on " + a.str() + " vanishes.", a);
        }
    }
    // Undo the half swap so that the forward transform of 1/lambda lands on symplectic indices.
    Eigen::VectorXd g(lambda.size());
    for (uint64_t i = 0; i < size; i++) {
        g[static_cast<Eigen::Index>(swap_halves(i, n))] = 1.0 / lambda[static_cast<Eigen::Index>(i)];
    }
    walsh_hadamard(g);
    g /= static_cast<double>(size);

    QpDecomposition qp;
    double norm = 0;
    for (uint64_t i = 0; i < size; i++) {
        double q = g[static_cast<Eigen::Index>(i)];
        if (std::abs(q) >= PRUNE_TOLERANCE) {
            norm += std::abs(q);
        }
    }
    qp.norm_w = norm;
    for (uint64_t i = 0; i < size; i++) {
        double q = g[static_cast<Eigen::Index>(i)];
        if (std::abs(q) < PRUNE_TOLERANCE) {
            continue;
        }
        PauliOp p = PauliOp::from_symplectic_index(n, i);
        qp.probs[p] = std::abs(q) / norm;
        qp.signs[p] = q < 0 ? -1 : 1;
    }
    return qp;
}
