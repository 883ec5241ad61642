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


#include "salem/analytics.h"

#include <cmath>
#include <gtest/gtest.h>
#include <map>

using namespace salem;

TEST(analytics, midshot_ratio_limits_and_monotonicity) {
    EXPECT_NEAR(midshot_ratio(1e-9), 0.5, 1e-9);
    EXPECT_NEAR(midshot_ratio(1e-3), 0.5 + 1e-3 / 24, 1e-9);
    EXPECT_NEAR(midshot_ratio(1e4), 1, 1e-3);
    // The series branch and the closed form meet smoothly.
    EXPECT_NEAR(midshot_ratio(0.99e-4), midshot_ratio(1.01e-4), 1e-7);
    double prev = 0;
    for (double u = 1e-6; u < 1e5; u *= 1.3) {
        double r = midshot_ratio(u);
        ASSERT_GT(r, prev);
        ASSERT_LT(r, 1);
        prev = r;
    }
}

TEST(analytics, single_layer_midshot_equals_postshot) {
    TimingModel m;
    m.width = 50;
    m.depth = 1;
    m.p_acc = 0.999;
    MidshotReport r = midshot_overhead(m);
    EXPECT_NEAR(r.gamma_ms, r.gamma_rej, 1e-12);
    EXPECT_NEAR(r.expected_time, 1, 1e-12);
    TimingModel sure;
    EXPECT_EQ(midshot_overhead(sure).gamma_ms, 1);
    EXPECT_THROW(midshot_overhead(TimingModel{1, 1, 0}), std::invalid_argument);
}

TEST(analytics, exact_ratio_approaches_leading_order) {
    for (double v : {0.1, 1.0, 10.0}) {
        TimingModel m = TimingModel::from_normalized(v, 100, 1e-7, 0.5, 0.5);
        MidshotReport r = midshot_overhead(m);
        EXPECT_NEAR(r.u, v, 1e-9);
        EXPECT_NEAR(r.r_exact, r.r_leading, 1e-3) << v;
        EXPECT_LT(r.gamma_ms, r.gamma_rej);
        EXPECT_LT(r.expected_time, m.depth);
    }
    EXPECT_NEAR(midshot_cg_lambda(1, 2, 1e-9), 2, 1e-8);
}

TEST(analytics, power_law_fit_recovers_parameters) {
    PowerLaw truth{300, 2.1};
    std::vector<double> eps{1e-4, 2e-4, 4e-4, 8e-4};
    std::vector<double> el;
    for (double e : eps) {
        el.push_back(truth(e));
    }
    PowerLaw fit = PowerLaw::fit(eps, el);
    EXPECT_NEAR(fit.c, 300, 1e-6);
    EXPECT_NEAR(fit.a, 2.1, 1e-10);
    EXPECT_THROW(PowerLaw::fit({1e-3, 2e-3}, {1e-5, 4e-5}), std::invalid_argument);
}

TEST(analytics, bisect) {
    EXPECT_NEAR(bisect([](double x) { return x * x - 2; }, 1, 2), std::sqrt(2), 1e-11);
    // The bracket widens until it straddles the root.
    EXPECT_NEAR(bisect([](double x) { return x - 50; }, 1, 2), 50, 1e-9);
    EXPECT_THROW(bisect([](double x) { return x * x + 1; }, 1, 2), NoRoot);
}

namespace {

ThresholdInputs inputs(VolumeRule rule) {
    ThresholdInputs in;
    in.eps_l = PowerLaw{561.5, 1.979};
    in.rule = rule;
    return in;
}

}  // namespace

TEST(analytics, thresholds_cross_at_v0) {
    ThresholdInputs in = inputs(VolumeRule::per_logical);
    double v = v0(in);
    EXPECT_NEAR(v, std::log(75.0) / (4 - 1.86), 1e-12);
    Thresholds t = solve_thresholds(in, v);
    EXPECT_NEAR(t.eps_salem / t.eps_ft, 1, 1e-8);
    EXPECT_NEAR(t.eps_ft, std::pow(1 / 561.5, 1 / 0.979), 1e-15);
    EXPECT_GT(solve_thresholds(in, 1.5 * v).eps_salem, t.eps_ft);
    EXPECT_LT(solve_thresholds(in, 0.5 * v).eps_salem, t.eps_ft);
}

TEST(analytics, threshold_ordering) {
    for (VolumeRule rule : {VolumeRule::per_logical, VolumeRule::per_physical}) {
        ThresholdInputs in = inputs(rule);
        double prev = 0;
        // Below v = ln V_EC / lambda the per-physical rule has no finite threshold at all.
        for (double v = 2; v < 1e4; v *= 2) {
            Thresholds t = solve_thresholds(in, v);
            ASSERT_LT(t.eps_ext_lem, t.eps_ft);
            ASSERT_GT(t.eps_salem, t.eps_ext_lem);
            ASSERT_GE(t.eps_salem, prev);
            prev = t.eps_salem;
        }
    }
    ThresholdInputs bad = inputs(VolumeRule::per_logical);
    bad.lambda_salem = 5;
    EXPECT_THROW(solve_thresholds(bad, 1), std::invalid_argument);
}

TEST(analytics, cvb_ordering) {
    BaselineInputs in;
    in.eps = 1e-3;
    in.eps_l = 1e-5;
    in.eps_l0 = 1e-6;
    in.p_acc = 0.999;
    in.lambda_salem = 2.5;
    auto pts = cvb_scan(in, {Method::ec, Method::ec_ps, Method::ext_lem, Method::cg_salem}, {0.01}, 1e8, 1.05);
    ASSERT_EQ(pts.size(), 4u);
    std::map<Method, double> mv;
    for (const auto &p : pts) {
        mv[p.method] = p.max_volume;
        EXPECT_GT(p.cvb, 0);
    }
    EXPECT_GT(mv[Method::cg_salem], mv[Method::ext_lem]);
    EXPECT_GT(mv[Method::ext_lem], mv[Method::ec]);
}
