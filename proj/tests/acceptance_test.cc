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


// End-to-end acceptance checks. Prints one PASS or FAIL line per criterion and exits nonzero on any failure.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "salem/analytics.h"
#include "salem/lab.h"
#include "salem/mitigation.h"
#include "salem/surface.h"

using namespace salem;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double STEANE_EPS = 4e-4;
constexpr double STEANE_EPS_L_REF = 1.12e-4;
constexpr double STEANE_EPS_L_LO = 0.75 * STEANE_EPS_L_REF;
constexpr double STEANE_EPS_L_HI = 1.5 * STEANE_EPS_L_REF;
constexpr double SCALING_LO = 3.6;
constexpr double SCALING_HI = 4.4;
constexpr double FG_LUT_LO = 2.3, FG_LUT_HI = 2.7;
constexpr double FG_ML_LO = 2.8, FG_ML_HI = 3.2;
constexpr double SCAN_WIDTH_MAX = 0.1;
constexpr double SURF_MWPM_LO = 2.0, SURF_MWPM_HI = 2.7;
constexpr double SURF_ML_LO = 3.0, SURF_ML_HI = 3.6;
constexpr double CG_TAU_LO = 0.1, CG_TAU_HI = 0.3;
constexpr double CG_LAMBDA_LO = 2.3, CG_LAMBDA_HI = 2.6;
constexpr double MIDSHOT_TARGET = 1.86, MIDSHOT_TOL = 0.15;
constexpr double Z_MAX = 3;
constexpr uint64_t SHOTS = 100000;
const std::vector<uint32_t> V_GRID = {256, 512, 1024, 2048, 4096, 8192, 16384, 20090};

int failures = 0;

void report(bool ok, const std::string &name, const std::string &detail) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
    failures += !ok;
}

bool within(double x, double lo, double hi) {
    return x >= lo && x <= hi;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Logical infidelity assigned to the unenumerated syndromes, scanned over its whole range.
std::vector<double> missing_grid() {
    std::vector<double> g;
    for (int i = 0; i <= 20; i++) {
        g.push_back(i / 20.0);
    }
    return g;
}

double inverse_norm(const std::array<double, 4> &probs) {
    LogicalChannel l;
    l.probs = probs;
    try {
        return invert_channel(l.normalized().to_pauli_channel()).norm_w;
    } catch (const SingularChannel &) {
        return INFINITY;
    }
}

// Binary overhead of inverting every class of a partition, with singular classes contributing nothing.
double partition_gamma(const std::vector<std::pair<double, std::array<double, 4>>> &classes) {
    std::vector<std::pair<double, double>> per;
    for (const auto &[p, c] : classes) {
        if (p <= 0) {
            continue;
        }
        double w = inverse_norm(c);
        per.push_back({p, std::isfinite(w) ? w : 1e150});
    }
    return fg_overhead(per, 1).gamma;
}

std::array<double, 4> mix(const std::vector<const SyndromeEntry *> &entries, double &mass) {
    std::array<double, 4> c{0, 0, 0, 0};
    mass = 0;
    for (const auto *e : entries) {
        for (int k = 0; k < 4; k++) {
            c[k] += e->probability * e->logical[k];
        }
        mass += e->probability;
    }
    if (mass > 0) {
        for (double &x : c) {
            x /= mass;
        }
    }
    return c;
}

void check_steane(const Characterization &ch4) {
    double e4 = ch4.base.channel.infidelity();
    Characterization ch8 = characterize(characterize_cycle(steane_cycle_model(2 * STEANE_EPS), 2));
    double e8 = ch8.base.channel.infidelity();
    double ratio = e8 / e4;
    report(within(e4, STEANE_EPS_L_LO, STEANE_EPS_L_HI) && within(ratio, SCALING_LO, SCALING_HI),
           "steane_logical_error_rate",
           fmt::format("eps_L(4e-4) = {:.4e} in [{:.3e}, {:.3e}], eps_L(8e-4)/eps_L(4e-4) = {:.3f} in [{}, {}]", e4,
                       STEANE_EPS_L_LO, STEANE_EPS_L_HI, ratio, SCALING_LO, SCALING_HI));
}

void check_steane_table1(const Characterization &ch) {
    MissingScan lut = missing_mass_scan(ch.channels, missing_grid());
    MissingScan ml = missing_mass_scan(ch.channels, missing_grid(), true);
    bool ok = within(lut.mid, FG_LUT_LO, FG_LUT_HI) && within(ml.mid, FG_ML_LO, FG_ML_HI) &&
              lut.width() <= SCAN_WIDTH_MAX && ml.width() <= SCAN_WIDTH_MAX;
    report(ok, "steane_table1_fg_lambda",
           fmt::format("LUT {:.3f} (scan [{:.3f}, {:.3f}]), ML {:.3f} (scan [{:.3f}, {:.3f}]), widths <= {}", lut.mid,
                       lut.min, lut.max, ml.mid, ml.min, ml.max, SCAN_WIDTH_MAX));
}

void check_surface_table1() {
    auto t0 = std::chrono::steady_clock::now();
    SurfaceMemory mem = build_surface_memory(1e-3);
    DecodingGraph graph(mem);
    SurfaceEnumeration en = enumerate_surface(mem, 3);
    SyndromeChannels mw = surface_syndrome_channels(mem, graph, en, SurfaceDecoder::mwpm);
    SyndromeChannels ml = surface_syndrome_channels(mem, graph, en, SurfaceDecoder::ml);
    MissingScan a = missing_mass_scan(mw, missing_grid());
    MissingScan b = missing_mass_scan(ml, missing_grid(), true);
    bool ok = within(a.mid, SURF_MWPM_LO, SURF_MWPM_HI) && within(b.mid, SURF_ML_LO, SURF_ML_HI);
    report(ok, "surface_d3_table1_fg_lambda",
           fmt::format("MWPM {:.3f} in [{}, {}], ML {:.3f} in [{}, {}], eps_L mwpm {:.3e} ml {:.3e}, {:.1f} s", a.mid,
                       SURF_MWPM_LO, SURF_MWPM_HI, b.mid, SURF_ML_LO, SURF_ML_HI, mw.eps_l(), ml.eps_l(),
                       seconds_since(t0)));
}

void check_cg_optimum(const Characterization &ch) {
    double best_tau = 0, best = INFINITY, best_ms = INFINITY, best_ms_tau = 0;
    std::string scan;
    for (double tau = 0.05; tau <= 0.5001; tau += 0.025) {
        CgScanPoint pt = cg_scan_point(ch, PartitionFamily::lut_eps, tau, 1);
        if (pt.lambda_rej < best) {
            best = pt.lambda_rej;
            best_tau = tau;
        }
        if (pt.lambda_ms < best_ms) {
            best_ms = pt.lambda_ms;
            best_ms_tau = tau;
        }
        scan += fmt::format(" {:.3f}:{:.3f}/{:.3f}", tau, pt.lambda_rej, pt.lambda_ms);
    }
    bool ok = within(best_tau, CG_TAU_LO, CG_TAU_HI) && within(best, CG_LAMBDA_LO, CG_LAMBDA_HI) &&
              std::abs(best_ms - MIDSHOT_TARGET) <= MIDSHOT_TOL;
    report(ok, "cg_salem_optimum",
           fmt::format("argmin tau {:.3f} in [{}, {}], lambda {:.3f} in [{}, {}], mid-shot min {:.3f} at tau {:.3f} "
                       "(target {} +- {}); tau:rej/ms{}",
                       best_tau, CG_TAU_LO, CG_TAU_HI, best, CG_LAMBDA_LO, CG_LAMBDA_HI, best_ms, best_ms_tau,
                       MIDSHOT_TARGET, MIDSHOT_TOL, scan));
}

struct McSeries {
    std::vector<ShotLedger::Estimate> est;
};

McSeries run_series(const Characterization &ch, Method m, uint64_t seed, int threads) {
    EstimatorSpec spec{m, PartitionFamily::lut_eps, 0.2, CycleAction::reject, false};
    McSeries s;
    for (uint32_t v : V_GRID) {
        s.est.push_back(run_estimator(spec, ch, v, SHOTS, seed + v, threads).estimate);
    }
    return s;
}

double zscore(double x, double target, double sigma) {
    return sigma > 0 ? (x - target) / sigma : (x == target ? 0 : INFINITY);
}

void check_unbiasedness_and_ablations(const Characterization &ch, int threads) {
    auto t0 = std::chrono::steady_clock::now();
    McSeries cg = run_series(ch, Method::cg_salem, 1000, threads);
    McSeries ext = run_series(ch, Method::ext_lem, 2000, threads);
    McSeries ec = run_series(ch, Method::ec, 3000, threads);
    McSeries ps = run_series(ch, Method::ec_ps, 4000, threads);
    double secs = seconds_since(t0);

    Partition part = partition_by_threshold(ch.channels, PartitionFamily::lut_eps, 0.2);
    std::vector<uint8_t> acc(ch.table.records.size());
    for (size_t r = 0; r < acc.size(); r++) {
        acc[r] = part.classify(ch.table.records[r]) == 0;
    }
    LogicalChannel ch_ec = ch.base.channel;
    LogicalChannel ch_ec_noinput = algorithm_p2lc(ch.table, {false, {}, true}).channel;
    LogicalChannel ch_ps = algorithm_p2lc(ch.table, {true, acc, true}).channel;
    LogicalChannel ch_ps_nofuture = algorithm_p2lc(ch.table, {true, acc, false}).channel;

    double worst_cg = 0, worst_ext = 0, worst_ec = 0, worst_ps = 0;
    std::string detail;
    for (size_t i = 0; i < V_GRID.size(); i++) {
        uint32_t v = V_GRID[i];
        double zc = zscore(cg.est[i].o_bar, 1, cg.est[i].sigma_empirical);
        double ze = zscore(ext.est[i].o_bar, 1, ext.est[i].sigma_empirical);
        double zec = zscore(ec.est[i].o_bar, predicted_decay(ch_ec, v), ec.est[i].sigma_empirical);
        double zps = zscore(ps.est[i].o_bar, predicted_decay(ch_ps, v), ps.est[i].sigma_empirical);
        worst_cg = std::max(worst_cg, std::abs(zc));
        worst_ext = std::max(worst_ext, std::abs(ze));
        worst_ec = std::max(worst_ec, std::abs(zec));
        worst_ps = std::max(worst_ps, std::abs(zps));
        detail += fmt::format(" V={}: cg {:+.2f} ext {:+.2f} ec {:+.2f} ps {:+.2f};", v, zc, ze, zec, zps);
    }
    report(worst_cg <= Z_MAX && worst_ext <= Z_MAX && worst_ec <= Z_MAX && worst_ps <= Z_MAX, "unbiasedness_at_scale",
           fmt::format("max |z| cg {:.2f}, ext_lem {:.2f}, ec vs decay {:.2f}, ec_ps vs decay {:.2f} (limit {}), "
                       "{} shots per V, {:.0f} s; z-scores:{}",
                       worst_cg, worst_ext, worst_ec, worst_ps, Z_MAX, SHOTS, secs, detail));

    size_t last = V_GRID.size() - 1;
    uint32_t vmax = V_GRID[last];
    double mc_ec = ec.est[last].o_bar, s_ec = ec.est[last].sigma_empirical;
    double mc_ps = ps.est[last].o_bar, s_ps = ps.est[last].sigma_empirical;
    // No input errors: too little decay, so the predicted value sits above the data.
    double z_noinput = zscore(predicted_decay(ch_ec_noinput, vmax), mc_ec, s_ec);
    // No future acceptance: too much decay for EC+PS, so the predicted value sits below the data.
    double z_nofuture = zscore(predicted_decay(ch_ps_nofuture, vmax), mc_ps, s_ps);
    bool ok = worst_ec <= Z_MAX && worst_ps <= Z_MAX && z_noinput > Z_MAX && z_nofuture < -Z_MAX;
    report(ok, "p2lc_conditioning_ablations",
           fmt::format("full channels max |z| ec {:.2f}, ec_ps {:.2f}; at V={} no-input prediction {:.4f} vs MC "
                       "{:.4f} (z {:+.2f}, need > {}), no-future EC+PS prediction {:.4f} vs MC {:.4f} (z {:+.2f}, "
                       "need < -{})",
                       worst_ec, worst_ps, vmax, predicted_decay(ch_ec_noinput, vmax), mc_ec, z_noinput, Z_MAX,
                       predicted_decay(ch_ps_nofuture, vmax), mc_ps, z_nofuture, Z_MAX));
}

// (f) Three-qubit repetition code under X noise, enumerated exactly over two cycles.
CycleModel repetition_model(double p) {
    CssCode c;
    c.name = "rep3";
    c.n = 3;
    c.d = 3;
    c.t_ft = 1;
    c.z_stabilizers = {PauliOp::from_str("ZZI"), PauliOp::from_str("IZZ")};
    c.logical_x = PauliOp::from_str("XXX");
    c.logical_z = PauliOp::from_str("ZII");
    auto cycle = [](double q) {
        CircuitBuilder b(4, 2);
        auto flip_control = [](double r) {
            return PauliChannel::single_pauli(PauliOp::from_str("XI"), r);
        };
        b.reset(3);
        b.noise(b.cnot(0, 3), flip_control(q));
        b.noise(b.cnot(1, 3), flip_control(1.3 * q));
        b.noise(b.measure(3, 0), PauliChannel::bit_flip(0.5 * q), Placement::before_op);
        b.reset(3);
        b.cnot(1, 3);
        b.noise(b.cnot(2, 3), flip_control(0.8 * q));
        b.noise(b.measure(3, 1), PauliChannel::bit_flip(0.7 * q), Placement::before_op);
        return b.build({0, 1, 2});
    };
    return CycleModel{
        CosetTable(c),
        cycle(p),
        cycle(0),
        [](const RecordKey &k) {
            static const char *fix[4] = {"III", "XII", "IIX", "IXI"};
            return PauliOp::from_str(fix[k.bits & 3]);
        },
        nullptr,
        2,
        p,
    };
}

double toy_two_cycle_estimate() {
    JointTable t = characterize_cycle(repetition_model(0.05), 5, {true});
    auto logical = [&](uint32_t coset) {
        return Coset::from_index(t.ideal_out[coset]).logical;
    };
    std::map<uint32_t, std::array<double, 4>> first;
    std::map<std::pair<uint32_t, uint32_t>, std::array<double, 4>> both;
    for (const auto &e1 : t.rows[0]) {
        first[e1.record][logical(e1.out)] += e1.probability;
        for (const auto &e2 : t.rows[e1.out]) {
            both[{e1.record, e2.record}][logical(e2.out)] += e1.probability * e2.probability;
        }
    }
    double estimate = 0;
    for (const auto &[key, joint] : both) {
        LogicalChannel tot, cyc1;
        tot.probs = joint;
        cyc1.probs = first[key.first];
        double p12 = tot.total();
        tot = tot.normalized();
        PauliChannel inv1 = invert_channel(cyc1.normalized().to_pauli_channel()).reconstruct();
        PauliChannel inv2 = invert_channel(convolve(tot.to_pauli_channel(), inv1)).reconstruct();
        for (const auto &[c1, q1] : inv1.terms()) {
            for (const auto &[c2, q2] : inv2.terms()) {
                for (int l = 0; l < 4; l++) {
                    estimate += p12 * tot.probs[l] * q1 * q2 * (((l ^ c1.at(0) ^ c2.at(0)) & 1) ? -1 : 1);
                }
            }
        }
    }
    return estimate;
}

void check_oracles(const Characterization &ch) {
    std::mt19937_64 rng(2026);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<std::string> failed;

    // (a) Harmonic mean of W^2 below the geometric mean.
    for (int trial = 0; trial < 1000; trial++) {
        size_t k = 2 + rng() % 30;
        std::vector<std::pair<double, double>> per;
        double total = 0;
        for (size_t i = 0; i < k; i++) {
            per.push_back({u(rng), 1 + 5 * u(rng)});
            total += per.back().first;
        }
        double log_gm = 0;
        for (auto &[p, w] : per) {
            p /= total;
            log_gm += 2 * p * std::log(w);
        }
        if (fg_overhead(per, 1).gamma > std::exp(log_gm) * (1 + 1e-12)) {
            failed.push_back("a");
            break;
        }
    }

    // (b) Inverse-variance weights beat every point of a 2-simplex grid.
    {
        ShotLedger ledger;
        const std::array<double, 3> lw{0.05, 0.4, 1.1};
        const std::array<int, 3> n{700, 200, 100};
        for (int k = 0; k < 3; k++) {
            for (int i = 0; i < n[k]; i++) {
                ShotOutcome s;
                s.log_weight = lw[k];
                ledger.add(s, 1);
            }
        }
        double bound = std::pow(ledger.estimate().sigma_bound, 2);
        bool ok = true;
        for (int i = 0; i <= 200 && ok; i++) {
            for (int j = 0; i + j <= 200; j++) {
                std::array<double, 3> a{i / 200.0, j / 200.0, (200 - i - j) / 200.0};
                double var = 0;
                for (int k = 0; k < 3; k++) {
                    var += a[k] * a[k] * std::exp(2 * lw[k]) / n[k];
                }
                if (bound > var * (1 + 1e-12)) {
                    ok = false;
                    break;
                }
            }
        }
        if (!ok) {
            failed.push_back("b");
        }
    }

    // (c) FG <= CG <= ExtLEM on random binary partitions of the Steane syndromes, and rejecting more of a
    // partition never raises the inversion cost of what is kept.
    {
        std::vector<const SyndromeEntry *> all;
        for (const auto &e : ch.channels.entries) {
            all.push_back(&e);
        }
        std::vector<std::pair<double, std::array<double, 4>>> fine;
        for (const auto *e : all) {
            fine.push_back({e->probability, e->logical});
        }
        double g_fg = partition_gamma(fine);
        double mass = 0;
        double g_ext = partition_gamma({{1, mix(all, mass)}});
        bool ok = g_fg <= g_ext * (1 + 1e-12);
        for (int trial = 0; trial < 200 && ok; trial++) {
            std::vector<const SyndromeEntry *> s0, s1;
            double bias = u(rng);
            for (const auto *e : all) {
                (u(rng) < bias ? s1 : s0).push_back(e);
            }
            double m0, m1;
            auto c0 = mix(s0, m0);
            auto c1 = mix(s1, m1);
            double g_cg = partition_gamma({{m0, c0}, {m1, c1}});
            ok = ok && g_fg <= g_cg * (1 + 1e-12) && g_cg <= g_ext * (1 + 1e-12);
        }
        double prev_acc = 0, prev_inv = 0;
        for (double tau : {0.01, 0.05, 0.1, 0.2, 0.4, 0.8}) {
            CgScanPoint pt = cg_scan_point(ch, PartitionFamily::lut_eps, tau);
            ok = ok && pt.accept_probability >= prev_acc - 1e-15 && pt.lambda_inversion >= prev_inv - 1e-9;
            prev_acc = pt.accept_probability;
            prev_inv = pt.lambda_inversion;
        }
        if (!ok) {
            failed.push_back("c");
        }
    }

    // (d) Inversion norm lower bound for random Pauli channels on one and two qubits.
    for (int trial = 0; trial < 2000; trial++) {
        uint32_t nq = 1 + trial % 2;
        std::map<PauliOp, double> terms;
        double scale = 0.3 * u(rng), total = 0;
        for (uint64_t i = 1; i < (uint64_t{1} << (2 * nq)); i++) {
            double w = u(rng);
            terms[PauliOp::from_symplectic_index(nq, i)] = w;
            total += w;
        }
        for (auto &[op, w] : terms) {
            w *= scale / total;
        }
        terms[PauliOp(nq)] = 1 - scale;
        PauliChannel c(nq, terms, ChannelKind::probability);
        double eps = c.infidelity();
        double w = invert_channel(c).norm_w;
        if (w * w * (1 + 1e-12) < std::pow((1 + eps) / (1 - eps), 2)) {
            failed.push_back("d");
            break;
        }
    }

    // (e) Window reference against the one-cycle characterization across eps halvings.
    std::vector<double> ratios;
    for (double eps : {8e-4, 4e-4, 2e-4}) {
        JointTable t = characterize_cycle(steane_cycle_model(eps), 2);
        std::vector<double> delta(t.num_cosets, 0);
        delta[0] = 1;
        auto t1 = propagate_cosets(t, delta);
        auto t2 = propagate_cosets(t, t1);
        PauliChannel ref = convolve(ideal_readout(t, t2).to_pauli_channel(),
                                    invert_channel(ideal_readout(t, t1).to_pauli_channel()).reconstruct());
        LogicalChannel r;
        r.probs = {0, 0, 0, 0};
        for (const auto &[op, w] : ref.terms()) {
            r.probs[op.at(0)] += w;
        }
        LogicalChannel alg = algorithm_p2lc(t).channel;
        ratios.push_back(total_variation(r, alg) / (alg.infidelity() * eps));
    }
    double spread = *std::max_element(ratios.begin(), ratios.end()) / *std::min_element(ratios.begin(), ratios.end());
    if (!(spread <= 2)) {
        failed.push_back("e");
    }

    // (f) Exact two-cycle expectation of the conditional inversion estimator.
    double toy = toy_two_cycle_estimate();
    if (std::abs(toy - 1) > 1e-12) {
        failed.push_back("f");
    }

    // (g) Syndrome channels recompose the average channel.
    LogicalChannel avg = ch.channels.average().normalized();
    LogicalChannel base = ch.base.channel.normalized();
    double dev = 0;
    for (int k = 0; k < 4; k++) {
        dev = std::max(dev, std::abs(avg.probs[k] - base.probs[k]));
    }
    if (dev > 1e-12) {
        failed.push_back("g");
    }

    std::string f;
    for (const auto &s : failed) {
        f += s + " ";
    }
    report(failed.empty(), "oracle_suite",
           fmt::format("(a)-(g) {}; (e) ratios {:.3f} {:.3f} {:.3f} spread {:.3f} <= 2; (f) E[o] - 1 = {:.2e}; "
                       "(g) max deviation {:.2e}",
                       failed.empty() ? "all hold" : "failed: " + f, ratios[0], ratios[1], ratios[2], spread, toy - 1,
                       dev));
}

void check_analytics(const Characterization &ch) {
    std::vector<std::string> failed;
    if (std::abs(midshot_ratio(1e-8) - 0.5) > 1e-8 || std::abs(midshot_ratio(1e5) - 1) > 1e-3) {
        failed.push_back("r(u) limits");
    }
    double prev = 0;
    for (double uu = 1e-6; uu < 1e6; uu *= 1.1) {
        double r = midshot_ratio(uu);
        if (!(r > prev)) {
            failed.push_back("r(u) monotone");
            break;
        }
        prev = r;
    }
    TimingModel one{40, 1, 0.995};
    MidshotReport mr = midshot_overhead(one);
    if (std::abs(mr.gamma_ms / mr.gamma_rej - 1) > 1e-12) {
        failed.push_back("D = 1");
    }

    ThresholdInputs in;
    in.eps_l = PowerLaw{561.5, 1.979};
    double v = v0(in);
    double below = solve_thresholds(in, v * (1 - 1e-6)).eps_salem - solve_thresholds(in, v).eps_ft;
    double above = solve_thresholds(in, v * (1 + 1e-6)).eps_salem - solve_thresholds(in, v).eps_ft;
    double at = solve_thresholds(in, v).eps_salem / solve_thresholds(in, v).eps_ft - 1;
    if (!(below < 0 && above > 0 && std::abs(at) < 1e-9)) {
        failed.push_back("v0 crossing");
    }

    // Harmonic mean of per-subset bounds against the bound of the averaged channel.
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0, 1);
    bool lb_ok = true;
    for (int trial = 0; trial < 500 && lb_ok; trial++) {
        for (BoundFamily fam : {BoundFamily::depolarizing, BoundFamily::bit_flip}) {
            double depth = 1 + 50 * u(rng);
            std::vector<std::pair<double, std::array<double, 4>>> subsets;
            std::array<double, 4> avg{0, 0, 0, 0};
            double total = 0;
            for (int k = 0; k < 5; k++) {
                double e = 0.2 * u(rng), p = u(rng);
                std::array<double, 4> c = fam == BoundFamily::bit_flip ? std::array<double, 4>{1 - e, e, 0, 0}
                                                                       : std::array<double, 4>{1 - e, e / 3, e / 3, e / 3};
                subsets.push_back({p, c});
                total += p;
                for (int j = 0; j < 4; j++) {
                    avg[j] += p * c[j];
                }
            }
            for (double &x : avg) {
                x /= total;
            }
            lb_ok = lb_ok && harmonic_bound(subsets, fam, depth) <= f_bound(avg, fam, depth) * (1 + 1e-12);
        }
    }
    // The same on the Steane syndrome channels, each family applied to the per-syndrome infidelity.
    for (BoundFamily fam : {BoundFamily::depolarizing, BoundFamily::bit_flip}) {
        std::vector<std::pair<double, std::array<double, 4>>> subsets;
        for (const auto &e : ch.channels.entries) {
            subsets.push_back({e.probability, e.logical});
        }
        if (fam == BoundFamily::depolarizing) {
            // Per-syndrome infidelities above 3/4 leave the depolarizing family; they are clipped to stay in it.
            for (auto &[p, c] : subsets) {
                double e = std::min(1 - c[0], 0.74);
                c = {1 - e, e / 3, e / 3, e / 3};
            }
        } else {
            for (auto &[p, c] : subsets) {
                double e = std::min(1 - c[0], 0.49);
                c = {1 - e, e, 0, 0};
            }
        }
        std::array<double, 4> avg{0, 0, 0, 0};
        double total = 0;
        for (const auto &[p, c] : subsets) {
            total += p;
            for (int j = 0; j < 4; j++) {
                avg[j] += p * c[j];
            }
        }
        for (double &x : avg) {
            x /= total;
        }
        lb_ok = lb_ok && harmonic_bound(subsets, fam, 1000) <= f_bound(avg, fam, 1000) * (1 + 1e-12);
    }
    if (!lb_ok) {
        failed.push_back("lower bound");
    }
    std::string f;
    for (const auto &s : failed) {
        f += s + "; ";
    }
    report(failed.empty(), "analytics_closed_forms",
           fmt::format("{}v0 = {:.4f}, eps_SALEM - eps_FT: {:.3e} below, {:.3e} above; r(1e-8) = {:.6f}, "
                       "Gamma_MS/Gamma_rej at D=1 = {:.12f}",
                       failed.empty() ? "" : "failed: " + f, v, below, above, midshot_ratio(1e-8),
                       mr.gamma_ms / mr.gamma_rej));
}

std::string slurp(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void check_reproducibility() {
    fs::path root = fs::temp_directory_path() / "salem_acceptance_repro";
    fs::remove_all(root);
    fs::create_directories(root);
    fs::path cfg = root / "config.toml";
    std::ofstream(cfg) << "seed = 17\nout = \"" << (root / "out").string() << "\"\n"
                       << "[code]\nname = \"steane\"\neps = 4e-4\nmax_weight = 2\n"
                       << "[partition]\ntau_grid = [0.1, 0.2, 0.3]\n"
                       << "[estimate]\nmethods = [\"ec\", \"ec_ps\", \"ext_lem\", \"fg_salem\", \"cg_salem\"]\n"
                       << "volumes = [256, 2048]\nshots = 4000\n"
                       << "[analytics]\nfit_eps = [2e-4, 4e-4, 8e-4]\nfit_eps_l = [2.6e-5, 1.06e-4, 4.16e-4]\n"
                       << "deltas = [0.01, 0.1]\naspect_ratios = [0.1, 1, 10]\n";
    const std::vector<std::string> csvs = {"bisalem.csv", "results.csv", "decay.csv",      "fig2a.csv",
                                           "fig2b.csv",   "fig2c.csv",   "thresholds.csv", "msrej.csv"};
    std::vector<std::map<std::string, std::string>> runs;
    bool ran = true;
    for (int rep = 0; rep < 2; rep++) {
        fs::remove_all(root / "out");
        std::ostringstream log;
        LabOptions o;
        o.config_path = cfg.string();
        for (const char *cmd : {"characterize", "estimate", "analytics"}) {
            ran = ran && run_lab(cmd, o, log) == 0;
        }
        std::map<std::string, std::string> files;
        for (const auto &name : csvs) {
            files[name] = slurp(root / "out" / name);
        }
        runs.push_back(files);
    }
    size_t same = 0;
    for (const auto &name : csvs) {
        same += !runs[0][name].empty() && runs[0][name] == runs[1][name];
    }
    report(ran && same == csvs.size(), "reproducibility",
           fmt::format("{}/{} CSVs byte-identical across two runs of the same config and seed", same, csvs.size()));
}

}  // namespace

int main() {
    int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    auto t0 = std::chrono::steady_clock::now();
    Characterization ch = characterize(characterize_cycle(steane_cycle_model(STEANE_EPS), 2));
    std::cout << fmt::format("Steane characterization at eps = {}: {:.2f} s, {} syndromes\n", STEANE_EPS,
                             seconds_since(t0), ch.table.records.size());
    check_steane(ch);
    check_steane_table1(ch);
    check_surface_table1();
    check_cg_optimum(ch);
    check_unbiasedness_and_ablations(ch, threads);
    check_oracles(ch);
    check_analytics(ch);
    check_reproducibility();
    std::cout << fmt::format("{} failed, total {:.0f} s\n", failures, seconds_since(t0));
    return failures == 0 ? 0 : 1;
}
