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

// Inline Pauli-frame executor shared by propagation, enumeration and sampling.

namespace salem {
namespace internal {

struct ExecState {
    uint32_t pc = 0;
    Frame frame;
    RecordKey key;
};

inline bool predicate_true(const FtCircuit &circ, uint32_t pred, const RecordKey &key) {
    for (uint32_t r : circ.predicates[pred]) {
        if ((key.bits >> r) & 1) {
            return true;
        }
    }
    return false;
}

/// Executes Clifford and control instructions until the next NOISE instruction or the end of the program.
/// Returns true when stopped on a NOISE instruction, leaving pc pointing at it.
inline bool run_until_noise(const FtCircuit &circ, ExecState &st, std::vector<uint8_t> *order) {
    const auto &prog = circ.program;
    uint32_t n = static_cast<uint32_t>(prog.size());
    while (st.pc < n) {
        const auto &ins = prog[st.pc];
        switch (ins.code) {
            case FtCircuit::Code::CNOT: {
                uint64_t xc = (st.frame.xs >> ins.a) & 1;
                uint64_t zt = (st.frame.zs >> ins.b) & 1;
                st.frame.xs ^= xc << ins.b;
                st.frame.zs ^= zt << ins.a;
                break;
            }
            case FtCircuit::Code::H: {
                uint64_t m = uint64_t{1} << ins.a;
                uint64_t x = st.frame.xs & m;
                uint64_t z = st.frame.zs & m;
                st.frame.xs = (st.frame.xs & ~m) | z;
                st.frame.zs = (st.frame.zs & ~m) | x;
                break;
            }
            case FtCircuit::Code::RESET: {
                uint64_t m = ~(uint64_t{1} << ins.a);
                st.frame.xs &= m;
                st.frame.zs &= m;
                break;
            }
            case FtCircuit::Code::MEASURE: {
                uint64_t flip = (st.frame.xs >> ins.a) & 1;
                st.key.executed |= uint64_t{1} << ins.b;
                st.key.bits |= flip << ins.b;
                if (order != nullptr) {
                    order->push_back(static_cast<uint8_t>(flip));
                }
                break;
            }
            case FtCircuit::Code::NOISE:
                return true;
            case FtCircuit::Code::JUMP_UNLESS:
                if (!predicate_true(circ, ins.a, st.key)) {
                    st.pc = ins.b;
                    continue;
                }
                break;
            case FtCircuit::Code::JUMP:
                st.pc = ins.b;
                continue;
        }
        st.pc++;
    }
    return false;
}

}  // namespace internal

template <typename Rng>
std::pair<SyndromeRecord, PauliOp> sample_shot_with(const FtCircuit &circ, Rng &rng, const PauliOp &input_frame) {
    internal::ExecState st;
    st.frame = embed_frame(circ, input_frame);
    SyndromeRecord rec;
    while (internal::run_until_noise(circ, st, &rec.bits)) {
        const auto &noise = circ.compiled_noise[circ.program[st.pc].a];
        double u = uniform01(rng);
        if (u < noise.total) {
            double acc = 0;
            for (const auto &o : noise.outcomes) {
                acc += o.probability;
                if (u < acc) {
                    st.frame.xs ^= o.xs;
                    st.frame.zs ^= o.zs;
                    break;
                }
            }
        }
        st.pc++;
    }
    rec.key = st.key;
    return {rec, extract_frame(circ, st.frame)};
}

}  // namespace salem
