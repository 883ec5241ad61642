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

#include "salem/circuit.h"

#include <algorithm>
#include <random>
#include <set>
#include <stdexcept>

using namespace salem;

std::string RecordKey::str(uint32_t num_slots) const {
    std::string out(num_slots, '.');
    for (uint32_t r = 0; r < num_slots; r++) {
        if ((executed >> r) & 1) {
            out[r] = ((bits >> r) & 1) ? '1' : '0';
        }
    }
    return out;
}

RecordKey RecordKey::from_str(const std::string &text) {
    if (text.size() > 64) {
        throw std::invalid_argument("Record keys hold at most 64 slots.");
    }
    RecordKey k;
    for (size_t r = 0; r < text.size(); r++) {
        switch (text[r]) {
            case '.':
                break;
            case '0':
                k.executed |= uint64_t{1} << r;
                break;
            case '1':
                k.executed |= uint64_t{1} << r;
                k.bits |= uint64_t{1} << r;
                break;
            default:
                throw std::invalid_argument("Bad record key character.");
        }
    }
    return k;
}

CircuitBuilder::CircuitBuilder(uint32_t num_qubits, uint32_t num_records) {
    if (num_qubits > 64 || num_records > 64) {
        throw DimensionError("Circuits are limited to 64 qubits and 64 measurement slots.");
    }
    circuit_.num_qubits = num_qubits;
    circuit_.num_records = num_records;
    stack_.push_back(&circuit_.ops);
}

uint32_t CircuitBuilder::push(Operation op) {
    op.op_index = next_index_++;
    stack_.back()->push_back(std::move(op));
    return stack_.back()->back().op_index;
}

uint32_t CircuitBuilder::cnot(uint32_t control, uint32_t target) {
    if (control == target || control >= circuit_.num_qubits || target >= circuit_.num_qubits) {
        throw std::invalid_argument("Bad CNOT targets.");
    }
    Operation op;
    op.type = GateType::CNOT;
    op.q0 = control;
    op.q1 = target;
    return push(std::move(op));
}

uint32_t CircuitBuilder::h(uint32_t q) {
    if (q >= circuit_.num_qubits) {
        throw std::invalid_argument("Bad H target.");
    }
    Operation op;
    op.type = GateType::H;
    op.q0 = q;
    return push(std::move(op));
}

uint32_t CircuitBuilder::reset(uint32_t q) {
    if (q >= circuit_.num_qubits) {
        throw std::invalid_argument("Bad reset target.");
    }
    Operation op;
    op.type = GateType::RESET_Z;
    op.q0 = q;
    return push(std::move(op));
}

uint32_t CircuitBuilder::measure(uint32_t q, uint32_t record_id) {
    if (q >= circuit_.num_qubits || record_id >= circuit_.num_records) {
        throw std::invalid_argument("Bad measurement target or record id.");
    }
    Operation op;
    op.type = GateType::MEASURE_Z;
    op.q0 = q;
    op.record_id = record_id;
    return push(std::move(op));
}

uint32_t CircuitBuilder::branch(
    BranchPredicate predicate,
    const std::function<void(CircuitBuilder &)> &then_fn,
    const std::function<void(CircuitBuilder &)> &else_fn) {
    Operation op;
    op.type = GateType::BRANCH;
    op.predicate = std::move(predicate);
    uint32_t idx = push(std::move(op));
    Operation &placed = stack_.back()->back();
    // Blocks are filled in place; the vectors are not reallocated while their parent is on the stack.
    std::vector<Operation> then_ops;
    std::vector<Operation> else_ops;
    stack_.push_back(&then_ops);
    if (then_fn) {
        then_fn(*this);
    }
    stack_.back() = &else_ops;
    if (else_fn) {
        else_fn(*this);
    }
    stack_.pop_back();
    placed.then_block = std::move(then_ops);
    placed.else_block = std::move(else_ops);
    return idx;
}

Operation *CircuitBuilder::find(uint32_t op_index) {
    std::function<Operation *(std::vector<Operation> &)> rec = [&](std::vector<Operation> &block) -> Operation * {
        for (auto &op : block) {
            if (op.op_index == op_index) {
                return &op;
            }
            if (op.type == GateType::BRANCH) {
                if (auto *r = rec(op.then_block)) {
                    return r;
                }
                if (auto *r = rec(op.else_block)) {
                    return r;
                }
            }
        }
        return nullptr;
    };
    for (auto *block : stack_) {
        if (auto *r = rec(*block)) {
            return r;
        }
    }
    return nullptr;
}

void CircuitBuilder::noise(uint32_t op_index, PauliChannel channel, Placement placement) {
    if (channel.kind() != ChannelKind::probability) {
        throw std::invalid_argument("Noise channels must be probability channels.");
    }
    Operation *op = find(op_index);
    if (op == nullptr || op->type == GateType::BRANCH) {
        throw std::invalid_argument("Noise must reference an existing gate.");
    }
    uint32_t arity = op->type == GateType::CNOT ? 2 : 1;
    if (channel.num_qubits() != arity) {
        throw std::invalid_argument("Noise channel must act on exactly the operation's qubits.");
    }
    circuit_.noise_locations.push_back({op_index, std::move(channel), placement});
}

FtCircuit CircuitBuilder::build(std::vector<uint32_t> data_qubits) {
    circuit_.data_qubits = std::move(data_qubits);
    FtCircuit out = std::move(circuit_);
    out.compile();
    return out;
}

namespace {

struct Compiler {
    FtCircuit &circ;
    std::vector<std::vector<uint32_t>> before;
    std::vector<std::vector<uint32_t>> after;

    void emit_noise(const std::vector<uint32_t> &locs) {
        for (uint32_t loc : locs) {
            circ.program.push_back({FtCircuit::Code::NOISE, loc, 0});
        }
    }

    void emit_block(const std::vector<Operation> &block) {
        for (const auto &op : block) {
            if (op.type == GateType::BRANCH) {
                uint32_t pred = static_cast<uint32_t>(circ.predicates.size());
                circ.predicates.push_back(op.predicate.any_of);
                size_t jump_unless = circ.program.size();
                circ.program.push_back({FtCircuit::Code::JUMP_UNLESS, pred, 0});
                emit_block(op.then_block);
                size_t jump_end = circ.program.size();
                circ.program.push_back({FtCircuit::Code::JUMP, 0, 0});
                circ.program[jump_unless].b = static_cast<uint32_t>(circ.program.size());
                emit_block(op.else_block);
                circ.program[jump_end].b = static_cast<uint32_t>(circ.program.size());
                continue;
            }
            emit_noise(before[op.op_index]);
            switch (op.type) {
                case GateType::CNOT:
                    circ.program.push_back({FtCircuit::Code::CNOT, op.q0, op.q1});
                    break;
                case GateType::H:
                    circ.program.push_back({FtCircuit::Code::H, op.q0, 0});
                    break;
                case GateType::RESET_Z:
                    circ.program.push_back({FtCircuit::Code::RESET, op.q0, 0});
                    break;
                case GateType::MEASURE_Z:
                    circ.program.push_back({FtCircuit::Code::MEASURE, op.q0, op.record_id});
                    break;
                case GateType::BRANCH:
                    break;
            }
            emit_noise(after[op.op_index]);
        }
    }
};

// Returns the records measured on every path through the block, given those defined on entry.
std::set<uint32_t> check_records(const std::vector<Operation> &block, std::set<uint32_t> defined) {
    for (const auto &op : block) {
        if (op.type == GateType::MEASURE_Z) {
            defined.insert(op.record_id);
        } else if (op.type == GateType::BRANCH) {
            for (uint32_t r : op.predicate.any_of) {
                if (!defined.count(r)) {
                    throw std::invalid_argument(
                        "BRANCH predicate reads record " + std::to_string(r) + " before it is always measured.");
                }
            }
            auto a = check_records(op.then_block, defined);
            auto b = check_records(op.else_block, defined);
            std::set<uint32_t> both;
            std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(both, both.begin()));
            defined = std::move(both);
        }
    }
    return defined;
}

void collect_ops(const std::vector<Operation> &block, std::vector<const Operation *> &out) {
    for (const auto &op : block) {
        out.push_back(&op);
        if (op.type == GateType::BRANCH) {
            collect_ops(op.then_block, out);
            collect_ops(op.else_block, out);
        }
    }
}

}  // namespace

void FtCircuit::compile() {
    check_records(ops, {});
    std::vector<const Operation *> all;
    collect_ops(ops, all);
    uint32_t max_index = 0;
    for (auto *op : all) {
        max_index = std::max(max_index, op->op_index + 1);
    }
    std::vector<const Operation *> by_index(max_index, nullptr);
    for (auto *op : all) {
        by_index[op->op_index] = op;
    }
    for (uint32_t q : data_qubits) {
        if (q >= num_qubits) {
            throw std::invalid_argument("Data qubit out of range.");
        }
    }

    Compiler c{*this, {}, {}};
    c.before.resize(max_index);
    c.after.resize(max_index);
    compiled_noise.clear();
    for (uint32_t loc = 0; loc < noise_locations.size(); loc++) {
        const auto &nl = noise_locations[loc];
        if (nl.op_index >= max_index || by_index[nl.op_index] == nullptr) {
            throw std::invalid_argument("Noise location references a missing operation.");
        }
        const Operation &op = *by_index[nl.op_index];
        uint32_t qs[2] = {op.q0, op.q1};
        CompiledNoise cn;
        for (const auto &[p, w] : nl.channel.terms()) {
            if (p.is_identity() || w <= 0) {
                continue;
            }
            FaultOutcome o{w, 0, 0, p};
            for (uint32_t i = 0; i < p.num_qubits; i++) {
                o.xs |= ((p.xs >> i) & 1) << qs[i];
                o.zs |= ((p.zs >> i) & 1) << qs[i];
            }
            cn.total += w;
            cn.outcomes.push_back(o);
        }
        compiled_noise.push_back(std::move(cn));
        (nl.placement == Placement::before_op ? c.before : c.after)[nl.op_index].push_back(loc);
    }
    program.clear();
    predicates.clear();
    c.emit_block(ops);
}

double FtCircuit::max_fault_mass() const {
    double t = 0;
    for (const auto &n : compiled_noise) {
        t += n.total;
    }
    return t;
}

nlohmann::json FtCircuit::to_json() const {
    std::function<nlohmann::json(const std::vector<Operation> &)> block_json = [&](const std::vector<Operation> &b) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto &op : b) {
            nlohmann::json j;
            j["index"] = op.op_index;
            switch (op.type) {
                case GateType::CNOT:
                    j["gate"] = "CNOT";
                    j["targets"] = {op.q0, op.q1};
                    break;
                case GateType::H:
                    j["gate"] = "H";
                    j["targets"] = {op.q0};
                    break;
                case GateType::RESET_Z:
                    j["gate"] = "RESET_Z";
                    j["targets"] = {op.q0};
                    break;
                case GateType::MEASURE_Z:
                    j["gate"] = "MEASURE_Z";
                    j["targets"] = {op.q0};
                    j["record"] = op.record_id;
                    break;
                case GateType::BRANCH:
                    j["gate"] = "BRANCH";
                    j["any_of"] = op.predicate.any_of;
                    j["then"] = block_json(op.then_block);
                    j["else"] = block_json(op.else_block);
                    break;
            }
            arr.push_back(j);
        }
        return arr;
    };
    nlohmann::json noise = nlohmann::json::array();
    for (const auto &nl : noise_locations) {
        noise.push_back({
            {"op", nl.op_index},
            {"placement", nl.placement == Placement::after_op ? "after_op" : "before_op"},
            {"channel", nl.channel.to_json()},
        });
    }
    return {
        {"num_qubits", num_qubits},
        {"num_records", num_records},
        {"data_qubits", data_qubits},
        {"ops", block_json(ops)},
        {"noise", noise},
    };
}

Frame salem::embed_frame(const FtCircuit &circ, const PauliOp &data_frame) {
    if (data_frame.num_qubits != circ.data_qubits.size()) {
        throw DimensionError("Input frame size does not match the circuit's data block.");
    }
    Frame f;
    for (uint32_t i = 0; i < data_frame.num_qubits; i++) {
        f.xs |= ((data_frame.xs >> i) & 1) << circ.data_qubits[i];
        f.zs |= ((data_frame.zs >> i) & 1) << circ.data_qubits[i];
    }
    return f;
}

PauliOp salem::extract_frame(const FtCircuit &circ, const Frame &frame) {
    PauliOp out(static_cast<uint32_t>(circ.data_qubits.size()));
    for (uint32_t i = 0; i < out.num_qubits; i++) {
        out.xs |= ((frame.xs >> circ.data_qubits[i]) & 1) << i;
        out.zs |= ((frame.zs >> circ.data_qubits[i]) & 1) << i;
    }
    return out;
}

std::pair<SyndromeRecord, PauliOp> salem::propagate(
    const FtCircuit &circ, const FaultPath &fp, const PauliOp &input_frame) {
    std::vector<const PauliOp *> assigned(circ.noise_locations.size(), nullptr);
    for (const auto &[loc, p] : fp.assignments) {
        if (loc >= assigned.size()) {
            throw std::invalid_argument("Fault path references a missing noise location.");
        }
        if (p.num_qubits != circ.noise_locations[loc].channel.num_qubits()) {
            throw DimensionError("Fault size does not match its location.");
        }
        assigned[loc] = &p;
    }
    internal::ExecState st;
    st.frame = embed_frame(circ, input_frame);
    SyndromeRecord rec;
    while (internal::run_until_noise(circ, st, &rec.bits)) {
        uint32_t loc = circ.program[st.pc].a;
        if (assigned[loc] != nullptr) {
            // The compiled outcome that matches the local fault already carries its register masks.
            bool done = false;
            for (const auto &o : circ.compiled_noise[loc].outcomes) {
                if (o.local == *assigned[loc]) {
                    st.frame.xs ^= o.xs;
                    st.frame.zs ^= o.zs;
                    done = true;
                    break;
                }
            }
            if (!done && !assigned[loc]->is_identity()) {
                throw std::invalid_argument("Fault is outside its location's support.");
            }
        }
        st.pc++;
    }
    rec.key = st.key;
    return {rec, extract_frame(circ, st.frame)};
}

namespace {

template <typename Emit>
struct Dfs {
    const FtCircuit &circ;
    int max_weight;
    Emit &emit;
    EnumerationSummary summary;
    std::vector<std::pair<uint32_t, uint32_t>> chosen;  // (location, outcome index)

    void run(internal::ExecState st, int weight, double prob) {
        while (internal::run_until_noise(circ, st, nullptr)) {
            uint32_t loc = circ.program[st.pc].a;
            const auto &noise = circ.compiled_noise[loc];
            if (noise.outcomes.empty()) {
                st.pc++;
                continue;
            }
            if (weight < max_weight) {
                for (uint32_t k = 0; k < noise.outcomes.size(); k++) {
                    const auto &o = noise.outcomes[k];
                    internal::ExecState child = st;
                    child.frame.xs ^= o.xs;
                    child.frame.zs ^= o.zs;
                    child.pc++;
                    chosen.emplace_back(loc, k);
                    run(child, weight + 1, prob * o.probability);
                    chosen.pop_back();
                }
            }
            prob *= 1 - noise.total;
            st.pc++;
        }
        summary.num_paths++;
        summary.total_probability += prob;
        emit(st, prob, chosen);
    }
};

}  // namespace

EnumerationSummary salem::enumerate_fault_paths(
    const FtCircuit &circ,
    int max_weight,
    const PauliOp &input_frame,
    const std::function<void(const FaultPath &, const SyndromeRecord &, const PauliOp &)> &visit) {
    auto emit = [&](const internal::ExecState &st, double prob, const std::vector<std::pair<uint32_t, uint32_t>> &ch) {
        FaultPath fp;
        fp.probability = prob;
        for (auto [loc, k] : ch) {
            fp.assignments.emplace_back(loc, circ.compiled_noise[loc].outcomes[k].local);
        }
        std::sort(fp.assignments.begin(), fp.assignments.end(), [](const auto &a, const auto &b) {
            return a.first < b.first;
        });
        // Rerun to recover the ordered outcome list; cheap relative to the visitor's own work.
        auto [rec, out] = propagate(circ, fp, input_frame);
        (void)st;
        visit(fp, rec, out);
    };
    Dfs<decltype(emit)> dfs{circ, max_weight, emit, {}, {}};
    internal::ExecState st;
    st.frame = embed_frame(circ, input_frame);
    dfs.run(st, 0, 1.0);
    dfs.summary.missing_probability = 1 - dfs.summary.total_probability;
    return dfs.summary;
}

EnumerationSummary salem::enumerate_outcomes(
    const FtCircuit &circ,
    int max_weight,
    const PauliOp &input_frame,
    const std::function<void(const RecordKey &, const PauliOp &, double)> &visit) {
    auto emit = [&](const internal::ExecState &st, double prob, const std::vector<std::pair<uint32_t, uint32_t>> &) {
        visit(st.key, extract_frame(circ, st.frame), prob);
    };
    Dfs<decltype(emit)> dfs{circ, max_weight, emit, {}, {}};
    internal::ExecState st;
    st.frame = embed_frame(circ, input_frame);
    dfs.run(st, 0, 1.0);
    dfs.summary.missing_probability = 1 - dfs.summary.total_probability;
    return dfs.summary;
}

std::pair<SyndromeRecord, PauliOp> salem::sample_shot(
    const FtCircuit &circ, uint64_t seed, const PauliOp &input_frame) {
    std::mt19937_64 rng(seed);
    return sample_shot_with(circ, rng, input_frame);
}

std::vector<FaultEffect> salem::single_fault_effects(const FtCircuit &circ) {
    for (const auto &ins : circ.program) {
        if (ins.code == FtCircuit::Code::JUMP_UNLESS) {
            throw std::invalid_argument("single_fault_effects needs a circuit without branches.");
        }
    }
    // Position of each location in the program, so a fault can be injected there directly.
    std::vector<uint32_t> pos(circ.noise_locations.size(), 0);
    for (uint32_t pc = 0; pc < circ.program.size(); pc++) {
        if (circ.program[pc].code == FtCircuit::Code::NOISE) {
            pos[circ.program[pc].a] = pc;
        }
    }
    std::vector<FaultEffect> out;
    for (uint32_t loc = 0; loc < circ.noise_locations.size(); loc++) {
        for (const auto &o : circ.compiled_noise[loc].outcomes) {
            internal::ExecState st;
            st.pc = pos[loc] + 1;
            st.frame.xs = o.xs;
            st.frame.zs = o.zs;
            while (internal::run_until_noise(circ, st, nullptr)) {
                st.pc++;
            }
            out.push_back({loc, o.probability, st.key.bits, extract_frame(circ, st.frame)});
        }
    }
    return out;
}
