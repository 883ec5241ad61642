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

#ifndef SALEM_PAULI_H
#define SALEM_PAULI_H

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace salem {

constexpr size_t MAX_PAULI_QUBITS = 64;

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A Pauli operator on up to 64 qubits stored as symplectic bitmasks.
///
/// Phases are not tracked. Bit q of `xs` (`zs`) is set when the operator has an X (Z) component on qubit q,
/// so Y on qubit q has both bits set.
struct PauliOp {
    uint32_t num_qubits = 0;
    uint64_t xs = 0;
    uint64_t zs = 0;

    PauliOp() = default;
    PauliOp(uint32_t num_qubits, uint64_t xs = 0, uint64_t zs = 0);

    static PauliOp identity(uint32_t num_qubits);
    static PauliOp single(uint32_t num_qubits, uint32_t qubit, char pauli);
    /// Parses a little-endian string such as "XIZ" (qubit 0 first). '_' is accepted as identity.
    static PauliOp from_str(std::string_view text);

    size_t weight() const;
    bool is_identity() const;
    bool commutes(const PauliOp &other) const;
    /// 0 = I, 1 = X, 2 = Z, 3 = Y on the given qubit.
    uint8_t at(uint32_t qubit) const;
    std::string str() const;
    /// Dense index x | z << n, valid for n <= 32.
    uint64_t symplectic_index() const;
    static PauliOp from_symplectic_index(uint32_t num_qubits, uint64_t index);

    PauliOp &operator*=(const PauliOp &rhs);
    PauliOp operator*(const PauliOp &rhs) const;
    bool operator==(const PauliOp &other) const = default;
    bool operator<(const PauliOp &other) const;
};

std::ostream &operator<<(std::ostream &out, const PauliOp &op);

/// Symplectic product. Throws DimensionError when the qubit counts differ.
PauliOp compose(const PauliOp &a, const PauliOp &b);

enum class ChannelKind { probability, quasiprobability };

/// A Pauli channel Σ_P c_P P(.)P stored sparsely.
///
/// Probability channels have nonnegative weights. Quasiprobability channels (channel inverses) may carry
/// negative weights. In both cases the weights sum to one.
class PauliChannel {
   public:
    PauliChannel() = default;
    PauliChannel(uint32_t num_qubits, std::map<PauliOp, double> terms, ChannelKind kind);

    static PauliChannel identity(uint32_t num_qubits);
    /// (1 - p) I + p X on a single qubit.
    static PauliChannel bit_flip(double p);
    /// (1 - p) I + p P for an arbitrary nonidentity Pauli P.
    static PauliChannel single_pauli(const PauliOp &p_op, double p);
    /// Uniform over the 3 nonidentity single-qubit Paulis with total probability eps.
    static PauliChannel depolarizing1(double eps);
    /// Uniform over the 15 nonidentity two-qubit Paulis with total probability eps.
    static PauliChannel depolarizing2(double eps);

    uint32_t num_qubits() const {
        return num_qubits_;
    }
    ChannelKind kind() const {
        return kind_;
    }
    const std::map<PauliOp, double> &terms() const {
        return terms_;
    }
    double weight(const PauliOp &p) const;
    /// 1 - weight(I).
    double infidelity() const;
    /// Sum of absolute weights.
    double one_norm() const;

    /// Walsh eigenvalues. Entry `i` is the eigenvalue on the Pauli basis operator with symplectic index `i`.
    Eigen::VectorXd eigenvalues() const;

    nlohmann::json to_json() const;
    static PauliChannel from_json(const nlohmann::json &j);

   private:
    uint32_t num_qubits_ = 0;
    std::map<PauliOp, double> terms_;
    ChannelKind kind_ = ChannelKind::probability;
};

/// Channel composition. Distributions convolve under the symplectic product.
PauliChannel convolve(const PauliChannel &a, const PauliChannel &b);

struct SingularChannel : std::domain_error {
    PauliOp character;
    SingularChannel(const std::string &msg, PauliOp character) : std::domain_error(msg), character(character) {
    }
};

/// Quasiprobability decomposition q_P = norm_w * sign_P * p_P of a channel inverse.
struct QpDecomposition {
    std::map<PauliOp, double> probs;
    std::map<PauliOp, int> signs;
    double norm_w = 1;

    /// The signed quasiprobability channel.
    PauliChannel reconstruct() const;
};

/// Exact inverse of a Pauli channel through the character transform.
///
/// Dense in 4^n, so limited to n <= 8. Throws SingularChannel when an eigenvalue vanishes.
QpDecomposition invert_channel(const PauliChannel &channel);

/// In-place unnormalized Walsh-Hadamard transform over a dense vector of length 2^k.
void walsh_hadamard(Eigen::VectorXd &v);

}  // namespace salem

template <>
struct std::hash<salem::PauliOp> {
    size_t operator()(const salem::PauliOp &p) const {
        return std::hash<uint64_t>{}(p.xs * 0x9E3779B97F4A7C15ULL ^ (p.zs + p.num_qubits));
    }
};

#endif
