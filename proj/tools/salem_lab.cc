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

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "salem/lab.h"

int main(int argc, char **argv) {
    CLI::App app{"SALEM lab: characterize error-corrected memories and evaluate mitigation estimators."};
    app.require_subcommand(1, 1);
    salem::LabOptions opts;
    uint64_t seed = 0;
    std::string out;
    int threads = 0;

    for (const char *name : {"characterize", "estimate", "analytics", "selftest"}) {
        auto *sub = app.add_subcommand(name);
        bool needs_config = std::string(name) != "selftest";
        auto *cfg = sub->add_option("--config", opts.config_path, "TOML experiment config");
        if (needs_config) {
            cfg->required()->check(CLI::ExistingFile);
        }
        sub->add_option("--seed", seed, "Override the config seed");
        sub->add_option("--out", out, "Override the output directory");
        sub->add_option("--table", opts.table, "Joint-table artifact (stem, .bin or .json)");
        sub->add_option("--threads", threads, "Worker threads (falls back to SALEM_LAB_THREADS)")
            ->check(CLI::PositiveNumber);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? 0 : salem::exit_code::bad_config;
    }
    auto *sub = app.get_subcommands().front();
    if (sub->count("--seed")) {
        opts.seed = seed;
    }
    if (sub->count("--out")) {
        opts.out = out;
    }
    if (sub->count("--threads")) {
        opts.threads = threads;
    } else if (const char *env = std::getenv("SALEM_LAB_THREADS")) {
        int t = std::atoi(env);
        if (t > 0) {
            opts.threads = t;
        }
    }
    return salem::run_lab(sub->get_name(), opts, std::cerr);
}
