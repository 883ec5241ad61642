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

#include "salem/config.h"

#include <fmt/format.h>
#include <fstream>
#include <set>
#include <sstream>
#include <toml.hpp>

using namespace salem;

namespace {

// Each table lists the keys it accepts; anything else is an error so typos never pass silently.
void check_keys(const toml::table &t, const std::string &where, const std::set<std::string> &allowed) {
    for (const auto &[k, v] : t) {
        std::string key(k.str());
        if (!allowed.count(key)) {
            throw ConfigError(fmt::format("Unknown key '{}{}'.", where, key));
        }
    }
}

const toml::table *sub(const toml::table &t, const char *name) {
    const toml::node *n = t.get(name);
    if (n == nullptr) {
        return nullptr;
    }
    if (!n->is_table()) {
        throw ConfigError(fmt::format("'{}' must be a table.", name));
    }
    return n->as_table();
}

double get_double(const toml::table &t, const char *key, double fallback) {
    const toml::node *n = t.get(key);
    if (n == nullptr) {
        return fallback;
    }
    if (auto v = n->value<double>()) {
        return *v;
    }
    throw ConfigError(fmt::format("'{}' must be a number.", key));
}

int64_t get_int(const toml::table &t, const char *key, int64_t fallback) {
    const toml::node *n = t.get(key);
    if (n == nullptr) {
        return fallback;
    }
    if (!n->is_integer()) {
        throw ConfigError(fmt::format("'{}' must be an integer.", key));
    }
    return *n->value<int64_t>();
}

std::string get_string(const toml::table &t, const char *key, const std::string &fallback) {
    const toml::node *n = t.get(key);
    if (n == nullptr) {
        return fallback;
    }
    if (!n->is_string()) {
        throw ConfigError(fmt::format("'{}' must be a string.", key));
    }
    return *n->value<std::string>();
}

bool get_bool(const toml::table &t, const char *key, bool fallback) {
    const toml::node *n = t.get(key);
    if (n == nullptr) {
        return fallback;
    }
    if (!n->is_boolean()) {
        throw ConfigError(fmt::format("'{}' must be a boolean.", key));
    }
    return *n->value<bool>();
}

template <typename T>
std::vector<T> get_array(const toml::table &t, const char *key) {
    std::vector<T> out;
    const toml::node *n = t.get(key);
    if (n == nullptr) {
        return out;
    }
    const toml::array *a = n->as_array();
    if (a == nullptr) {
        throw ConfigError(fmt::format("'{}' must be an array.", key));
    }
    for (const auto &e : *a) {
        if constexpr (std::is_same_v<T, std::string>) {
            if (!e.is_string()) {
                throw ConfigError(fmt::format("'{}' must hold strings.", key));
            }
            out.push_back(*e.value<std::string>());
        } else if constexpr (std::is_integral_v<T>) {
            if (!e.is_integer() || *e.value<int64_t>() < 0) {
                throw ConfigError(fmt::format("'{}' must hold nonnegative integers.", key));
            }
            out.push_back(static_cast<T>(*e.value<int64_t>()));
        } else {
            auto v = e.value<double>();
            if (!v) {
                throw ConfigError(fmt::format("'{}' must hold numbers.", key));
            }
            out.push_back(*v);
        }
    }
    return out;
}

std::vector<Method> get_methods(const toml::table &t, const char *key) {
    std::vector<Method> out;
    for (const auto &name : get_array<std::string>(t, key)) {
        try {
            out.push_back(parse_method(name));
        } catch (const std::invalid_argument &e) {
            throw ConfigError(e.what());
        }
    }
    return out;
}

void require(bool ok, const std::string &message) {
    if (!ok) {
        throw ConfigError(message);
    }
}

}  // namespace

uint64_t salem::fnv1a(const std::string &data) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void salem::rehash(ExperimentConfig &cfg, const std::string &text) {
    cfg.hash = fmt::format("{:016x}", fnv1a(text + "\nseed=" + std::to_string(cfg.seed)));
}

ExperimentConfig salem::parse_config(const std::string &text) {
    toml::table root;
    try {
        root = toml::parse(text);
    } catch (const toml::parse_error &e) {
        std::ostringstream ss;
        ss << e;
        throw ConfigError("TOML parse error: " + ss.str());
    }
    check_keys(root, "", {"seed", "threads", "out", "code", "partition", "estimate", "analytics"});

    ExperimentConfig c;
    int64_t seed = get_int(root, "seed", 1);
    require(seed >= 0, "seed must be nonnegative.");
    c.seed = static_cast<uint64_t>(seed);
    c.threads = static_cast<int>(get_int(root, "threads", 1));
    require(c.threads >= 1, "threads must be at least 1.");
    c.out = get_string(root, "out", "out");

    if (const auto *t = sub(root, "code")) {
        check_keys(*t, "code.", {"name", "eps", "max_weight", "decoder"});
        std::string name = get_string(*t, "name", "steane");
        if (name == "steane") {
            c.code = CodeKind::steane;
        } else if (name == "surface_d3") {
            c.code = CodeKind::surface_d3;
        } else {
            throw ConfigError("code.name must be 'steane' or 'surface_d3'.");
        }
        c.eps = get_double(*t, "eps", c.code == CodeKind::steane ? 4e-4 : 1e-3);
        c.max_weight = static_cast<int>(get_int(*t, "max_weight", c.code == CodeKind::steane ? 2 : 3));
        c.decoder = get_string(*t, "decoder", c.code == CodeKind::steane ? "lut" : "mwpm");
    }
    require(c.eps >= 0 && c.eps < 0.5, "code.eps must lie in [0, 0.5).");
    require(c.max_weight >= 1 && c.max_weight <= 3, "code.max_weight must be 1, 2 or 3.");
    if (c.code == CodeKind::steane) {
        require(c.decoder == "lut" || c.decoder == "ml", "Steane decoders are 'lut' and 'ml'.");
        c.family = PartitionFamily::lut_eps;
    } else {
        require(c.decoder == "mwpm" || c.decoder == "ml", "Surface decoders are 'mwpm' and 'ml'.");
        c.family = PartitionFamily::mwpm_gap;
    }

    if (const auto *t = sub(root, "partition")) {
        check_keys(*t, "partition.", {"family", "tau", "tau_grid"});
        std::string fam = get_string(*t, "family", c.family == PartitionFamily::lut_eps ? "lut_eps" : "mwpm_gap");
        require(fam == "lut_eps" || fam == "mwpm_gap", "partition.family must be 'lut_eps' or 'mwpm_gap'.");
        c.family = fam == "lut_eps" ? PartitionFamily::lut_eps : PartitionFamily::mwpm_gap;
        c.tau = get_double(*t, "tau", c.tau);
        c.tau_grid = get_array<double>(*t, "tau_grid");
    }
    require(c.tau >= 0 && c.tau <= 1, "partition.tau must lie in [0, 1].");
    for (double x : c.tau_grid) {
        require(x >= 0 && x <= 1, "partition.tau_grid values must lie in [0, 1].");
    }

    if (const auto *t = sub(root, "estimate")) {
        check_keys(*t, "estimate.", {"methods", "volumes", "shots", "midshot"});
        c.methods = get_methods(*t, "methods");
        c.volumes = get_array<uint32_t>(*t, "volumes");
        int64_t shots = get_int(*t, "shots", 0);
        require(shots >= 0, "estimate.shots must be nonnegative.");
        c.shots = static_cast<uint64_t>(shots);
        c.midshot = get_bool(*t, "midshot", false);
    }
    for (Method m : c.methods) {
        require(m != Method::bare && m != Method::em_physical, "estimate.methods only takes error-corrected methods.");
    }

    if (const auto *t = sub(root, "analytics")) {
        check_keys(
            *t, "analytics.",
            {"fit_eps", "fit_eps_l", "methods", "volumes", "deltas", "v_grid", "volume_rule", "aspect_ratios",
             "budget", "eps", "eps_l", "eps_l0", "d", "v_ec", "p_acc", "lambda", "lambda_salem"});
        c.fit_eps = get_array<double>(*t, "fit_eps");
        c.fit_eps_l = get_array<double>(*t, "fit_eps_l");
        c.baseline_methods = get_methods(*t, "methods");
        c.baseline_volumes = get_array<double>(*t, "volumes");
        c.deltas = get_array<double>(*t, "deltas");
        c.v_grid = get_array<double>(*t, "v_grid");
        c.aspect_ratios = get_array<double>(*t, "aspect_ratios");
        std::string rule = get_string(*t, "volume_rule", "per_logical");
        require(rule == "per_logical" || rule == "per_physical", "analytics.volume_rule is per_logical or per_physical.");
        c.volume_rule = rule == "per_logical" ? VolumeRule::per_logical : VolumeRule::per_physical;
        BaselineInputs &b = c.baseline;
        b.budget = get_double(*t, "budget", b.budget);
        b.eps = get_double(*t, "eps", b.eps);
        b.eps_l = get_double(*t, "eps_l", b.eps_l);
        b.eps_l0 = get_double(*t, "eps_l0", b.eps_l0);
        b.d = get_double(*t, "d", b.d);
        b.v_ec = get_double(*t, "v_ec", b.v_ec);
        b.p_acc = get_double(*t, "p_acc", b.p_acc);
        b.lambda_ext = get_double(*t, "lambda", b.lambda_ext);
        b.lambda_salem = get_double(*t, "lambda_salem", b.lambda_salem);
    }
    require(c.fit_eps_l.empty() || c.fit_eps_l.size() == c.fit_eps.size(),
            "analytics.fit_eps_l must match analytics.fit_eps in length.");
    require(c.baseline.budget > 0 && c.baseline.v_ec > 1 && c.baseline.d > 0, "analytics budget, v_ec and d must be positive.");
    require(c.baseline.p_acc > 0 && c.baseline.p_acc <= 1, "analytics.p_acc must lie in (0, 1].");
    require(c.baseline.lambda_salem < c.baseline.lambda_ext, "analytics.lambda_salem must be below analytics.lambda.");
    for (double x : c.deltas) {
        require(x > 0, "analytics.deltas must be positive.");
    }
    for (double x : c.aspect_ratios) {
        require(x > 0, "analytics.aspect_ratios must be positive.");
    }
    rehash(c, text);
    return c;
}

ExperimentConfig salem::load_config(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("Cannot read config file '" + path + "'.");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}
