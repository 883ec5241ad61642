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

#include "salem/mitigation.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "salem/analytics.h"

using namespace salem;

namespace {

const std::vector<std::pair<Method, std::string>> METHOD_NAMES = {
    {Method::bare, "bare"},
    {Method::em_physical, "em_physical"},
    {Method::ec, "ec"},
    {Method::ec_ps, "ec_ps"},
    {Method::ext_lem, "ext_lem"},
    {Method::fg_salem, "fg_salem"},
    {Method::cg_salem, "cg_salem"},
};

constexpr uint64_t BLOCK_SHOTS = 1024;

}  // namespace

std::string salem::method_name(Method m) {
    for (const auto &[k, v] : METHOD_NAMES) {
        if (k == m) {
            return v;
        }
    }
    throw std::invalid_argument("Unknown method.");
}

Method salem::parse_method(const std::string &name) {
    for (const auto &[k, v] : METHOD_NAMES) {
        if (v == name) {
            return k;
        }
    }
    throw std::invalid_argument("Unknown method '" + name + "'.");
}

nlohmann::json OverheadReport::to_json() const {
    return {
        {"gamma", gamma},
        {"gamma_time", gamma_time},
        {"lambda", lambda},
        {"eps_l", eps_l},
        {"accept_probability", accept_probability},
    };
}

OverheadReport salem::fg_overhead(const std::vector<std::pair<double, double>> &per_syndrome, double eps_l) {
    double total = 0;
    double inv = 0;
    for (const auto &[p, w] : per_syndrome) {
        if (p < 0 || w < 1 - 1e-12) {
            throw std::invalid_argument("Need P(s) >= 0 and W_s >= 1.");
        }
        if (p > 0 && !std::isfinite(w)) {
            throw SingularSyndrome("A syndrome with nonzero probability has a singular channel; reject it instead.");
        }
        total += p;
        inv += p / (w * w);
    }
    if (total <= 0) {
        throw std::invalid_argument("Empty syndrome distribution.");
    }
    OverheadReport r;
    r.gamma = total / inv;
    r.gamma_time = r.gamma;
    r.eps_l = eps_l;
    r.lambda = eps_l > 0 ? std::log(r.gamma) / eps_l : 0;
    return r;
}

double salem::cg_blowup(double eps_l1, double p1_given_l, CgVariant variant, double gamma1, double v) {
    if (!(p1_given_l >= 0 && p1_given_l <= 1) || !(eps_l1 >= 0 && eps_l1 <= 1)) {
        throw std::invalid_argument("Need eps_{L|1} and p_{1|L} in [0, 1].");
    }
    if (variant == CgVariant::simple_qp) {
        return 4 * (1 - p1_given_l * eps_l1);
    }
    if (p1_given_l == 0) {
        return 4;
    }
    if (eps_l1 == 0) {
        throw std::invalid_argument("p_{1|L} > 0 requires eps_{L|1} > 0.");
    }
    double base = 4 * (1 - p1_given_l);
    double p_over_e = p1_given_l / eps_l1;
    switch (variant) {
        case CgVariant::inversion:
            return base + (1 - 1 / gamma1) * p_over_e;
        case CgVariant::rejection:
            return base + p_over_e;
        case CgVariant::midshot:
            return base + p_over_e * midshot_ratio(v * p_over_e);
        case CgVariant::simple_qp:
            break;
    }
    return base;
}

void ShotLedger::add(const ShotOutcome &shot, uint32_t volume) {
    (void)volume;
    cycles_ += shot.cycles_run;
    if (!shot.accepted) {
        rejected_++;
        return;
    }
    accepted_++;
    // Shots with equal log-weight share a global subset; rounding absorbs summation-order noise.
    auto key = static_cast<uint64_t>(std::llround(shot.log_weight * 0x1.0p32));
    auto &s = subsets_[key];
    if (s.shots == 0) {
        s.gamma = std::exp(2 * shot.log_weight);
    }
    double v = shot.value();
    s.shots++;
    s.sum += v;
    s.sum_sq += v * v;
}

void ShotLedger::merge(const ShotLedger &other) {
    for (const auto &[k, o] : other.subsets_) {
        auto &s = subsets_[k];
        if (s.shots == 0) {
            s.gamma = o.gamma;
        }
        s.shots += o.shots;
        s.sum += o.sum;
        s.sum_sq += o.sum_sq;
    }
    accepted_ += other.accepted_;
    rejected_ += other.rejected_;
    cycles_ += other.cycles_;
}

ShotLedger::Estimate ShotLedger::estimate() const {
    Estimate e;
    e.accepted = accepted_;
    e.rejected = rejected_;
    double w = 0;
    double num = 0;
    for (const auto &[k, s] : subsets_) {
        w += s.shots / s.gamma;
        num += s.sum / s.gamma;
    }
    if (w <= 0) {
        e.gamma = std::numeric_limits<double>::infinity();
        e.sigma_bound = std::numeric_limits<double>::infinity();
        e.sigma_empirical = std::numeric_limits<double>::infinity();
        return e;
    }
    e.o_bar = num / w;
    e.sigma_bound = std::sqrt(1 / w);
    e.gamma = static_cast<double>(total_shots()) / w;
    double var = 0;
    for (const auto &[k, s] : subsets_) {
        double a = 1 / s.gamma;
        double dev = s.sum_sq - 2 * e.o_bar * s.sum + s.shots * e.o_bar * e.o_bar;
        var += a * a * std::max(dev, 0.0);
    }
    e.sigma_empirical = std::sqrt(var) / w;
    return e;
}

double ShotLedger::mean_cycles() const {
    uint64_t n = total_shots();
    return n > 0 ? cycles_ / static_cast<double>(n) : 0;
}

nlohmann::json ShotLedger::to_json() const {
    auto est = estimate();
    nlohmann::json subsets = nlohmann::json::array();
    for (const auto &[k, s] : subsets_) {
        double ok = s.sum / s.shots;
        subsets.push_back({{"shots", s.shots}, {"o_k", ok}, {"gamma_k", s.gamma}, {"weight", s.shots / s.gamma}});
    }
    return {
        {"accepted", accepted_},
        {"rejected", rejected_},
        {"mean_cycles", mean_cycles()},
        {"o_bar", est.o_bar},
        {"sigma_bound", est.sigma_bound},
        {"sigma_empirical", est.sigma_empirical},
        {"gamma", est.gamma},
        {"subsets", subsets},
    };
}

Characterization salem::characterize(const JointTable &table) {
    Characterization ch;
    ch.table = table;
    ch.base = algorithm_p2lc(ch.table);
    ch.channels = syndrome_channels(ch.table, ch.base);
    return ch;
}

ShotPolicy salem::make_policy(const EstimatorSpec &spec, const Characterization &ch) {
    const JointTable &t = ch.table;
    ShotPolicy pol;
    pol.record_class.assign(t.records.size(), 0);
    auto use_partition = [&](const Partition &p) {
        for (size_t r = 0; r < t.records.size(); r++) {
            pol.record_class[r] = static_cast<uint16_t>(p.classify(t.records[r]));
        }
        pol.unknown_class = 1;
    };
    switch (spec.method) {
        case Method::ec:
            pol.actions = {CycleAction::nothing};
            pol.unknown_class = 0;
            return pol;
        case Method::ext_lem:
            pol.actions = {CycleAction::invert};
            pol.inverses = {invert_channel(ch.base.channel.to_pauli_channel())};
            pol.unknown_class = 0;
            return pol;
        case Method::ec_ps: {
            use_partition(partition_by_threshold(ch.channels, spec.family, spec.tau));
            pol.actions = {CycleAction::nothing, CycleAction::reject};
            return pol;
        }
        case Method::cg_salem: {
            Partition part = partition_by_threshold(ch.channels, spec.family, spec.tau);
            use_partition(part);
            if (spec.action1 == CycleAction::reject) {
                std::vector<uint8_t> acc(t.records.size());
                for (size_t r = 0; r < acc.size(); r++) {
                    acc[r] = pol.record_class[r] == 0;
                }
                P2lcResult res = algorithm_p2lc(t, {true, acc, true});
                pol.actions = {CycleAction::invert, CycleAction::reject};
                pol.inverses = {invert_channel(res.channel.to_pauli_channel()), QpDecomposition{}};
            } else {
                PartitionStats st = partition_stats(ch.channels, part);
                pol.actions = {CycleAction::invert, CycleAction::invert};
                try {
                    pol.inverses = {
                        invert_channel(st.channel0.to_pauli_channel()), invert_channel(st.channel1.to_pauli_channel())};
                } catch (const SingularChannel &) {
                    throw SingularSyndrome("The S1 channel is singular; use rejection for S1.");
                }
            }
            return pol;
        }
        case Method::fg_salem: {
            // One subset per syndrome. Class 0 is the trivial record, which sorts first. Singular channels are
            // rejected, unseen records are inverted with the syndrome-averaged channel.
            pol.actions = {CycleAction::invert};
            pol.inverses = {QpDecomposition{}};
            std::vector<int64_t> cls_of(t.records.size(), -1);
            for (const auto &e : ch.channels.entries) {
                int64_t r = t.find_record(e.key);
                LogicalChannel lc;
                lc.probs = e.logical;
                uint16_t k = r == 0 ? 0 : static_cast<uint16_t>(pol.actions.size());
                CycleAction act = CycleAction::invert;
                QpDecomposition qp;
                try {
                    qp = invert_channel(lc.to_pauli_channel());
                } catch (const SingularChannel &) {
                    act = CycleAction::reject;
                }
                if (k == 0) {
                    if (act == CycleAction::reject) {
                        throw SingularSyndrome("The trivial syndrome has a singular channel.");
                    }
                    pol.inverses[0] = qp;
                } else {
                    pol.actions.push_back(act);
                    pol.inverses.push_back(qp);
                }
                cls_of[r] = k;
            }
            uint16_t fallback = static_cast<uint16_t>(pol.actions.size());
            pol.actions.push_back(CycleAction::invert);
            pol.inverses.push_back(invert_channel(ch.base.channel.to_pauli_channel()));
            for (size_t r = 0; r < cls_of.size(); r++) {
                pol.record_class[r] = cls_of[r] < 0 ? fallback : static_cast<uint16_t>(cls_of[r]);
            }
            pol.unknown_class = fallback;
            if (pol.actions.size() > std::numeric_limits<uint16_t>::max()) {
                throw std::length_error("Too many syndromes for one policy.");
            }
            return pol;
        }
        case Method::bare:
        case Method::em_physical:
            break;
    }
    throw std::invalid_argument("Method " + method_name(spec.method) + " has no error-corrected shot model.");
}

EstimatorRun salem::run_estimator(
    const EstimatorSpec &spec, const Characterization &ch, uint32_t volume, uint64_t shots, uint64_t seed,
    int threads) {
    CompressedMemory mem(ch.table, make_policy(spec, ch));
    uint64_t blocks = (shots + BLOCK_SHOTS - 1) / BLOCK_SHOTS;
    std::vector<ShotLedger> partial(blocks);
    std::atomic<uint64_t> next{0};
    auto worker = [&]() {
        for (uint64_t b = next++; b < blocks; b = next++) {
            uint64_t end = std::min(shots, (b + 1) * BLOCK_SHOTS);
            for (uint64_t i = b * BLOCK_SHOTS; i < end; i++) {
                std::mt19937_64 rng(shot_seed(seed, i));
                ShotOutcome s = mem.run(volume, rng);
                if (!spec.midshot) {
                    s.cycles_run = volume;
                }
                partial[b].add(s, volume);
            }
        }
    };
    int n = std::max(1, std::min<int>(threads, static_cast<int>(blocks)));
    std::vector<std::thread> pool;
    for (int i = 1; i < n; i++) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto &th : pool) {
        th.join();
    }

    EstimatorRun run;
    for (const auto &p : partial) {
        run.ledger.merge(p);
    }
    run.estimate = run.ledger.estimate();
    if (shots > 0 && run.estimate.accepted == 0) {
        throw NoAcceptedShots("Every shot was rejected.");
    }
    double eps_l = ch.base.channel.infidelity();
    run.overhead.eps_l = eps_l;
    run.overhead.gamma = run.estimate.gamma;
    run.overhead.gamma_time = run.estimate.gamma * (volume > 0 ? run.ledger.mean_cycles() / volume : 1);
    run.overhead.lambda = (eps_l > 0 && volume > 0) ? std::log(run.overhead.gamma) / (eps_l * volume) : 0;
    run.overhead.accept_probability =
        shots > 0 ? static_cast<double>(run.estimate.accepted) / static_cast<double>(shots) : 1;
    return run;
}

nlohmann::json CgScanPoint::to_json() const {
    nlohmann::json j = stats.to_json();
    j["accept_probability"] = accept_probability;
    j["lambda_inversion"] = lambda_inversion;
    j["lambda_rejection"] = lambda_rejection;
    j["lambda_rej"] = lambda_rej;
    j["lambda_ms"] = lambda_ms;
    j["u"] = u;
    j["lambda_closed_form"] = lambda_closed_form;
    return j;
}

namespace {

CgScanPoint finish_scan_point(CgScanPoint pt, const LogicalChannel &accepted, double eps_l, double v) {
    const PartitionStats &st = pt.stats;
    double w = invert_channel(accepted.normalized().to_pauli_channel()).norm_w;
    pt.lambda_inversion = 2 * std::log(w) / eps_l;
    pt.lambda_rejection = -std::log(pt.accept_probability) / eps_l;
    pt.lambda_rej = pt.lambda_inversion + pt.lambda_rejection;
    if (st.p1_given_l > 0 && st.eps_l1 > 0) {
        pt.u = v * st.p1_given_l / st.eps_l1;
        pt.lambda_ms = pt.lambda_inversion + midshot_ratio(pt.u) * pt.lambda_rejection;
        pt.lambda_closed_form = cg_blowup(st.eps_l1, st.p1_given_l, CgVariant::rejection);
    } else {
        pt.lambda_ms = pt.lambda_rej;
        pt.lambda_closed_form = 4;
    }
    return pt;
}

}  // namespace

CgScanPoint salem::cg_scan_point(const Characterization &ch, PartitionFamily family, double tau, double v) {
    Partition part = partition_by_threshold(ch.channels, family, tau);
    CgScanPoint pt;
    pt.stats = partition_stats(ch.channels, part);
    std::vector<uint8_t> acc(ch.table.records.size());
    for (size_t r = 0; r < acc.size(); r++) {
        acc[r] = part.classify(ch.table.records[r]) == 0;
    }
    P2lcResult res = algorithm_p2lc(ch.table, {true, acc, true});
    pt.accept_probability = res.accept_probability;
    return finish_scan_point(pt, res.channel, ch.base.channel.infidelity(), v);
}

CgScanPoint salem::cg_scan_point(const SyndromeChannels &channels, PartitionFamily family, double tau, double v) {
    Partition part = partition_by_threshold(channels, family, tau);
    CgScanPoint pt;
    pt.stats = partition_stats(channels, part);
    pt.accept_probability = 1 - pt.stats.p_s1;
    return finish_scan_point(pt, pt.stats.channel0, channels.eps_l(), v);
}

double salem::predicted_decay(const LogicalChannel &channel, uint32_t volume) {
    return std::pow(1 - 2 * channel.z_flip(), volume);
}

double salem::surface_v_ec(int d) {
    return 5.0 * (2.0 * d * d - 1);
}

std::vector<BaselinePoint> salem::baseline_curves(
    const BaselineInputs &in, const std::vector<double> &volumes, const std::vector<Method> &methods) {
    std::vector<BaselinePoint> out;
    for (Method m : methods) {
        for (double v : volumes) {
            BaselinePoint p{m, v, 0, 0};
            switch (m) {
                case Method::bare:
                    p.bias = 1 - std::pow(1 - 4 * in.eps / 3, v);
                    p.sigma = std::sqrt(1 / (in.budget * in.v_ec));
                    break;
                case Method::em_physical:
                    p.sigma = std::sqrt(std::pow(1 - 4 * in.eps / 3, -2 * v) / in.v_ec / in.budget);
                    break;
                case Method::ec:
                    p.bias = 1 - std::pow(1 - 2 * in.eps_l / in.d, v);
                    p.sigma = std::sqrt(1 / in.budget);
                    break;
                case Method::ec_ps:
                    p.bias = 1 - std::pow(1 - 2 * in.eps_l0 / in.d, v);
                    p.sigma = std::sqrt(std::pow(in.p_acc, -v) / in.budget);
                    break;
                case Method::ext_lem:
                    p.sigma = std::sqrt(std::exp(in.lambda_ext * in.eps_l * v) / in.budget);
                    break;
                case Method::fg_salem:
                case Method::cg_salem:
                    p.sigma = std::sqrt(std::exp(in.lambda_salem * in.eps_l * v) / in.budget);
                    break;
            }
            out.push_back(p);
        }
    }
    return out;
}

double salem::f_bound(const std::array<double, 4> &channel, BoundFamily family, double depth) {
    double total = channel[0] + channel[1] + channel[2] + channel[3];
    double eps = 1 - channel[0] / total;
    double factor = 1;
    switch (family) {
        case BoundFamily::depolarizing:
            factor = 1 - 4 * eps / 3;
            break;
        case BoundFamily::bit_flip:
            factor = 1 - 2 * eps;
            break;
        case BoundFamily::general: {
            if (eps == 0) {
                return 1;
            }
            // q over X, Y, Z in that order; channel stores I, X, Z, Y.
            std::array<double, 3> q{channel[1] / total / eps, channel[3] / total / eps, channel[2] / total / eps};
            double m = std::min({q[0] + q[1], q[0] + q[2], q[1] + q[2]});
            factor = 1 - 2 * eps * m;
            break;
        }
    }
    return std::pow(std::abs(factor), -2 * depth);
}

double salem::harmonic_bound(
    const std::vector<std::pair<double, std::array<double, 4>>> &subsets, BoundFamily family, double depth) {
    double total = 0;
    double inv = 0;
    for (const auto &[p, ch] : subsets) {
        total += p;
        inv += p / f_bound(ch, family, depth);
    }
    return total / inv;
}
