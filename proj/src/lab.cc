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

#include "salem/lab.h"

#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <sstream>

#include "salem/surface.h"
#include "salem/table_io.h"

using namespace salem;
namespace fs = std::filesystem;

namespace {

struct MissingInputs : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string num(double x) {
    return fmt::format("{}", x);
}

/// CSV file whose first line is a `# config_hash=...` comment.
class CsvWriter {
   public:
    CsvWriter(const fs::path &path, const std::string &hash, const std::vector<std::string> &header)
        : out_(path, std::ios::binary), path_(path) {
        if (!out_) {
            throw std::runtime_error("Cannot write '" + path.string() + "'.");
        }
        out_ << "# config_hash=" << hash << "\n";
        row(header);
    }
    void row(const std::vector<std::string> &cells) {
        for (size_t i = 0; i < cells.size(); i++) {
            out_ << (i ? "," : "") << cells[i];
        }
        out_ << "\n";
    }

   private:
    std::ofstream out_;
    fs::path path_;
};

void write_json(const fs::path &path, const nlohmann::json &j) {
    std::ofstream out(path, std::ios::binary);
    out << j.dump(2) << "\n";
    if (!out) {
        throw std::runtime_error("Cannot write '" + path.string() + "'.");
    }
}

std::vector<double> default_tau_grid() {
    return {0.01, 0.02, 0.05, 0.08, 0.1, 0.12, 0.15, 0.18, 0.2, 0.22, 0.25, 0.3, 0.35, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
}

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g;
    for (int i = 0; i < n; i++) {
        g.push_back(lo * std::pow(hi / lo, n > 1 ? i / static_cast<double>(n - 1) : 0.0));
    }
    return g;
}

nlohmann::json scan_json(const MissingScan &s) {
    return {{"min", s.min}, {"mid", s.mid}, {"max", s.max}, {"width", s.width()}};
}

std::vector<double> missing_grid() {
    std::vector<double> g;
    for (int i = 0; i <= 20; i++) {
        g.push_back(i / 20.0);
    }
    return g;
}

Characterization steane_characterization(const ExperimentConfig &cfg, std::ostream &log) {
    if (cfg.max_weight >= 3) {
        log << "warning: Steane enumeration at max_weight " << cfg.max_weight
            << " visits billions of fault paths and may take hours.\n";
    }
    return characterize(characterize_cycle(steane_cycle_model(cfg.eps), cfg.max_weight));
}

void write_bisalem(
    const fs::path &dir, const ExperimentConfig &cfg, const std::vector<CgScanPoint> &points) {
    CsvWriter csv(
        dir / "bisalem.csv", cfg.hash,
        {"tau", "p_s1", "eps_l0", "eps_l1", "p1_given_l", "accept_probability", "lambda_inversion",
         "lambda_rejection", "lambda_rej", "u", "lambda_ms", "lambda_closed_form"});
    for (const auto &p : points) {
        const auto &s = p.stats;
        csv.row({num(s.tau), num(s.p_s1), num(s.eps_l0), num(s.eps_l1), num(s.p1_given_l), num(p.accept_probability),
                 num(p.lambda_inversion), num(p.lambda_rejection), num(p.lambda_rej), num(p.u), num(p.lambda_ms),
                 num(p.lambda_closed_form)});
    }
}

int cmd_characterize(const ExperimentConfig &cfg, const fs::path &dir, std::ostream &log) {
    nlohmann::json report;
    report["config_hash"] = cfg.hash;
    report["seed"] = cfg.seed;
    report["eps"] = cfg.eps;
    report["max_weight"] = cfg.max_weight;
    std::vector<double> taus = cfg.tau_grid.empty() ? default_tau_grid() : cfg.tau_grid;
    std::vector<CgScanPoint> points;
    auto scan = [&](auto &&point_at, double eps_l) {
        if (eps_l <= 0) {
            log << "warning: eps_L = 0, skipping the threshold scan.\n";
            return;
        }
        for (double tau : taus) {
            try {
                points.push_back(point_at(tau));
            } catch (const std::exception &e) {
                log << fmt::format("warning: tau = {} skipped ({})\n", tau, e.what());
            }
        }
    };

    if (cfg.code == CodeKind::steane) {
        report["code"] = "steane";
        Characterization ch = steane_characterization(cfg, log);
        save_table(ch.table, (dir / "table").string(), cfg.hash);
        double eps_l = ch.base.channel.infidelity();
        report["eps_l"] = eps_l;
        report["z_flip"] = ch.base.channel.z_flip();
        report["channel"] = ch.base.channel.to_json();
        report["missing"] = ch.base.missing;
        report["num_records"] = ch.table.records.size();
        report["num_syndromes"] = ch.channels.entries.size();
        report["lambda_fg"] = {
            {"lut", scan_json(missing_mass_scan(ch.channels, missing_grid(), false))},
            {"ml", scan_json(missing_mass_scan(ch.channels, missing_grid(), true))},
        };
        scan([&](double tau) { return cg_scan_point(ch, cfg.family, tau); }, eps_l);
    } else {
        report["code"] = "surface_d3";
        SurfaceMemory mem = build_surface_memory(cfg.eps);
        DecodingGraph graph(mem);
        write_json(dir / "decoding_graph.json", graph.to_json());
        SurfaceEnumeration en = enumerate_surface(mem, cfg.max_weight);
        SyndromeChannels mwpm = surface_syndrome_channels(mem, graph, en, SurfaceDecoder::mwpm);
        SyndromeChannels ml = surface_syndrome_channels(mem, graph, en, SurfaceDecoder::ml);
        const SyndromeChannels &chosen = cfg.decoder == "ml" ? ml : mwpm;
        report["eps_l"] = chosen.eps_l();
        report["eps_l_mwpm"] = mwpm.eps_l();
        report["eps_l_ml"] = ml.eps_l();
        report["missing"] = en.missing;
        report["num_paths"] = en.num_paths;
        report["num_syndromes"] = chosen.entries.size();
        report["lambda_fg"] = {
            {"mwpm", scan_json(missing_mass_scan(mwpm, missing_grid()))},
            {"ml", scan_json(missing_mass_scan(ml, missing_grid()))},
        };
        scan([&](double tau) { return cg_scan_point(chosen, cfg.family, tau); }, chosen.eps_l());
    }
    nlohmann::json tau_scan = nlohmann::json::array();
    for (const auto &p : points) {
        tau_scan.push_back(p.to_json());
    }
    report["tau_scan"] = tau_scan;
    write_bisalem(dir, cfg, points);
    write_json(dir / "report.json", report);
    log << fmt::format("characterize: eps_L = {:.4e}, wrote {}\n", report["eps_l"].get<double>(), dir.string());
    return exit_code::ok;
}

JointTable find_table(const LabOptions &opts, const fs::path &dir) {
    std::string stem = opts.table.empty() ? (dir / "table").string() : opts.table;
    try {
        return load_table(stem);
    } catch (const TableIoError &e) {
        throw TableIoError(fmt::format("No usable joint table at '{}': {}", stem, e.what()));
    }
}

std::vector<uint8_t> accept_mask(const Characterization &ch, PartitionFamily family, double tau) {
    Partition part = partition_by_threshold(ch.channels, family, tau);
    std::vector<uint8_t> acc(ch.table.records.size());
    for (size_t r = 0; r < acc.size(); r++) {
        acc[r] = part.classify(ch.table.records[r]) == 0;
    }
    return acc;
}

int cmd_estimate(const ExperimentConfig &cfg, const LabOptions &opts, const fs::path &dir, std::ostream &log) {
    if (cfg.code != CodeKind::steane) {
        throw ConfigError("estimate runs the Steane memory chain; set code.name = \"steane\".");
    }
    Characterization ch = characterize(find_table(opts, dir));
    std::vector<uint8_t> acc = accept_mask(ch, cfg.family, cfg.tau);
    LogicalChannel ps_channel = algorithm_p2lc(ch.table, {true, acc, true}).channel;
    LogicalChannel ps_no_future = algorithm_p2lc(ch.table, {true, acc, false}).channel;
    LogicalChannel ec_no_input = algorithm_p2lc(ch.table, {false, {}, true}).channel;

    CsvWriter csv(
        dir / "results.csv", cfg.hash,
        {"method", "volume", "eps", "o_bar", "bias_model", "sigma", "sigma_bound", "gamma", "lambda", "shots",
         "accepted", "seed"});
    CsvWriter decay(
        dir / "decay.csv", cfg.hash, {"volume", "ec", "ec_no_input", "ec_ps", "ec_ps_no_future"});
    for (uint32_t v : cfg.volumes) {
        decay.row({std::to_string(v), num(predicted_decay(ch.base.channel, v)), num(predicted_decay(ec_no_input, v)),
                   num(predicted_decay(ps_channel, v)), num(predicted_decay(ps_no_future, v))});
    }
    nlohmann::json runs = nlohmann::json::array();
    if (cfg.shots == 0) {
        log << "warning: estimate.shots = 0, results.csv has no rows.\n";
    } else {
        for (Method m : cfg.methods) {
            EstimatorSpec spec;
            spec.method = m;
            spec.family = cfg.family;
            spec.tau = cfg.tau;
            spec.midshot = cfg.midshot;
            for (uint32_t v : cfg.volumes) {
                double bias = 0;
                if (m == Method::ec) {
                    bias = 1 - predicted_decay(ch.base.channel, v);
                } else if (m == Method::ec_ps) {
                    bias = 1 - predicted_decay(ps_channel, v);
                }
                try {
                    EstimatorRun run = run_estimator(spec, ch, v, cfg.shots, cfg.seed, cfg.threads);
                    const auto &e = run.estimate;
                    csv.row({method_name(m), std::to_string(v), num(cfg.eps), num(e.o_bar), num(bias),
                             num(e.sigma_empirical), num(e.sigma_bound), num(e.gamma), num(run.overhead.lambda),
                             std::to_string(cfg.shots), std::to_string(e.accepted), std::to_string(cfg.seed)});
                    runs.push_back({{"method", method_name(m)},
                                    {"volume", v},
                                    {"ledger", run.ledger.to_json()},
                                    {"overhead", run.overhead.to_json()}});
                } catch (const NoAcceptedShots &) {
                    log << fmt::format("warning: {} at V = {} rejected every shot.\n", method_name(m), v);
                    csv.row({method_name(m), std::to_string(v), num(cfg.eps), "nan", num(bias), "inf", "inf", "inf",
                             "nan", std::to_string(cfg.shots), "0", std::to_string(cfg.seed)});
                }
                log << fmt::format("estimate: {} V={} done\n", method_name(m), v);
            }
        }
    }
    write_json(dir / "results.json", {{"config_hash", cfg.hash}, {"seed", cfg.seed}, {"runs", runs}});
    return exit_code::ok;
}

PowerLaw fit_eps_l(const ExperimentConfig &cfg, std::ostream &log) {
    if (!cfg.fit_eps_l.empty()) {
        return PowerLaw::fit(cfg.fit_eps, cfg.fit_eps_l);
    }
    if (cfg.fit_eps.size() >= 3 && cfg.code == CodeKind::steane) {
        std::vector<double> eps_l;
        for (double e : cfg.fit_eps) {
            ExperimentConfig c = cfg;
            c.eps = e;
            eps_l.push_back(steane_characterization(c, log).base.channel.infidelity());
            log << fmt::format("analytics: eps = {:g} gives eps_L = {:.4e}\n", e, eps_l.back());
        }
        return PowerLaw::fit(cfg.fit_eps, eps_l);
    }
    throw MissingInputs(
        "analytics needs at least three analytics.fit_eps values, plus analytics.fit_eps_l unless the code is Steane.");
}

int cmd_analytics(ExperimentConfig cfg, const LabOptions &opts, const fs::path &dir, std::ostream &log) {
    PowerLaw fit = fit_eps_l(cfg, log);
    BaselineInputs &b = cfg.baseline;
    if (!opts.table.empty()) {
        Characterization ch = characterize(find_table(opts, dir));
        CgScanPoint pt = cg_scan_point(ch, cfg.family, cfg.tau);
        std::vector<uint8_t> acc = accept_mask(ch, cfg.family, cfg.tau);
        b.eps = ch.table.eps_ph;
        b.eps_l = ch.base.channel.infidelity();
        b.eps_l0 = algorithm_p2lc(ch.table, {true, acc, true}).channel.infidelity();
        b.p_acc = pt.accept_probability;
        b.lambda_salem = pt.lambda_rej;
    }

    std::vector<double> volumes = cfg.baseline_volumes.empty() ? log_grid(10, 1e7, 61) : cfg.baseline_volumes;
    CsvWriter a(dir / "fig2a.csv", cfg.hash, {"method", "volume", "bias", "sigma"});
    for (const auto &p : baseline_curves(b, volumes, cfg.baseline_methods)) {
        a.row({method_name(p.method), num(p.volume), num(p.bias), num(p.sigma)});
    }

    std::vector<double> deltas = cfg.deltas.empty() ? std::vector<double>{0.3, 0.1, 0.03, 0.01, 0.003, 0.001}
                                                    : cfg.deltas;
    CsvWriter bb(dir / "fig2b.csv", cfg.hash, {"method", "delta", "max_volume", "cvb"});
    if (!cfg.baseline_methods.empty()) {
        for (const auto &p : cvb_scan(b, cfg.baseline_methods, deltas)) {
            bb.row({method_name(p.method), num(p.delta), num(p.max_volume), num(p.cvb)});
        }
    }

    ThresholdInputs ti;
    ti.lambda = b.lambda_ext;
    ti.lambda_salem = b.lambda_salem;
    ti.v_ec = b.v_ec;
    ti.eps_l = fit;
    ti.rule = cfg.volume_rule;
    double eps_ft = std::pow(1 / fit.c, 1 / (fit.a - 1));

    // Errors against the physical rate at V = 2.5 / eps, with rejection and accepted-subset
    // infidelity scaled along with eps_L.
    CsvWriter c(dir / "fig2c.csv", cfg.hash, {"method", "eps", "volume", "bias", "sigma", "error"});
    for (double eps : log_grid(eps_ft / 20, eps_ft * 2, 41)) {
        BaselineInputs bi = b;
        double scale = fit(eps) / b.eps_l;
        bi.eps = eps;
        bi.eps_l = fit(eps);
        bi.eps_l0 = b.eps_l0 * scale;
        bi.p_acc = std::max(1e-300, 1 - (1 - b.p_acc) * scale);
        double volume = 2.5 / eps;
        for (const auto &p : baseline_curves(bi, {volume}, cfg.baseline_methods)) {
            c.row({method_name(p.method), num(eps), num(volume), num(p.bias), num(p.sigma),
                   num(std::abs(p.bias) + p.sigma)});
        }
    }

    std::vector<double> vs = cfg.v_grid.empty() ? log_grid(0.25, 20, 33) : cfg.v_grid;
    double v0v = v0(ti);
    CsvWriter t(
        dir / "thresholds.csv", cfg.hash,
        {"v", "volume_rule", "v_ec", "lambda", "lambda_salem", "fit_c", "fit_a", "v0", "eps_ft", "eps_ext_lem",
         "eps_salem", "salem_above_ft"});
    for (double v : vs) {
        Thresholds th = solve_thresholds(ti, v);
        t.row({num(v), ti.rule == VolumeRule::per_logical ? "per_logical" : "per_physical", num(ti.v_ec),
               num(ti.lambda), num(ti.lambda_salem), num(fit.c), num(fit.a), num(v0v), num(th.eps_ft),
               num(th.eps_ext_lem), num(th.eps_salem), th.eps_salem > th.eps_ft ? "1" : "0"});
    }

    std::vector<double> aspects = cfg.aspect_ratios.empty() ? std::vector<double>{1e-3, 1, 1e3} : cfg.aspect_ratios;
    CsvWriter m(
        dir / "msrej.csv", cfg.hash, {"aspect_ratio", "v", "u", "r_exact", "r_leading", "expected_time", "gamma_ms"});
    const double eps_l = 1e-6;
    for (double rho : aspects) {
        for (double v : log_grid(0.01, 10, 31)) {
            double volume = v / eps_l;
            double depth = std::max(1.0, std::sqrt(volume / rho));
            double width = volume / depth;
            TimingModel tm;
            tm.width = width;
            tm.depth = depth;
            tm.eps_l = eps_l;
            tm.p_rej_given_l = 0.5;
            tm.eps_l_rej = 0.5;
            tm.p_acc = 1 - tm.p_rej_given_l * eps_l / tm.eps_l_rej;
            MidshotReport r = midshot_overhead(tm);
            m.row({num(rho), num(v), num(r.u), num(r.r_exact), num(r.r_leading), num(r.expected_time),
                   num(r.gamma_ms)});
        }
    }
    log << fmt::format("analytics: eps_L(eps) = {:.4g} eps^{:.3f}, v0 = {:.4f}, wrote {}\n", fit.c, fit.a, v0v,
                       dir.string());
    return exit_code::ok;
}

int cmd_selftest(std::ostream &log) {
    int failures = 0;
    auto check = [&](const std::string &name, bool ok) {
        log << (ok ? "PASS " : "FAIL ") << name << "\n";
        failures += ok ? 0 : 1;
    };
    auto qp = invert_channel(PauliChannel::bit_flip(0.1));
    check("bit-flip inverse norm", std::abs(qp.norm_w - 1.25) < 1e-12);
    auto ch = characterize(characterize_cycle(steane_cycle_model(1e-3), 1));
    check("steane weight-1 cycle has no logical error", ch.base.channel.infidelity() < 1e-12);
    SurfaceMemory mem = build_surface_memory(1e-3);
    DecodingGraph graph(mem);
    bool all = true;
    for (const auto &e : single_fault_effects(mem.circuit)) {
        uint32_t key = mem.syndrome_key(e.record_flips);
        all &= decode_mwpm(graph, mem.z_defects(key)).recovery == SurfaceMemory::observable_flip(key);
    }
    check("surface single faults are corrected by matching", all);
    check("r(u) limits", std::abs(midshot_ratio(1e-6) - 0.5) < 1e-6 && midshot_ratio(1e4) > 0.999);
    return failures == 0 ? exit_code::ok : exit_code::failure;
}

}  // namespace

int salem::run_lab(const std::string &command, const LabOptions &opts, std::ostream &log) {
    try {
        if (command == "selftest") {
            return cmd_selftest(log);
        }
        std::ifstream in(opts.config_path, std::ios::binary);
        if (!in) {
            throw ConfigError("Cannot read config file '" + opts.config_path + "'.");
        }
        std::stringstream ss;
        ss << in.rdbuf();
        std::string text = ss.str();
        ExperimentConfig cfg = parse_config(text);
        if (opts.seed) {
            cfg.seed = *opts.seed;
            rehash(cfg, text);
        }
        if (opts.out) {
            cfg.out = *opts.out;
        }
        if (opts.threads) {
            cfg.threads = *opts.threads;
        }
        fs::path dir(cfg.out);
        fs::create_directories(dir);
        if (command == "characterize") {
            return cmd_characterize(cfg, dir, log);
        }
        if (command == "estimate") {
            return cmd_estimate(cfg, opts, dir, log);
        }
        if (command == "analytics") {
            return cmd_analytics(cfg, opts, dir, log);
        }
        throw ConfigError("Unknown command '" + command + "'.");
    } catch (const ConfigError &e) {
        log << "error: " << e.what() << "\n";
        return exit_code::bad_config;
    } catch (const TableIoError &e) {
        log << "error: " << e.what() << "\n";
        return exit_code::missing_table;
    } catch (const MissingInputs &e) {
        log << "error: " << e.what() << "\n";
        return exit_code::missing_inputs;
    } catch (const std::exception &e) {
        log << "error: " << e.what() << "\n";
        return exit_code::failure;
    }
}
