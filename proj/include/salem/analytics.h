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

#ifndef SALEM_ANALYTICS_H
#define SALEM_ANALYTICS_H

#include <functional>
#include <stdexcept>
#include <vector>

#include "salem/mitigation.h"

namespace salem {

/// Leading-order ratio of mid-shot to post-shot rejection blowup, u^-1 log((e^u - 1) / u).
/// Rises monotonically from 1/2 at u -> 0 to 1 at u -> infinity.
double midshot_ratio(double u);

struct TimingModel {
    double width = 1;
    double depth = 1;
    /// Acceptance probability per logical gate.
    double p_acc = 1;
    double t_gate = 1;
    /// Logical infidelity per gate and the rejected-subset statistics, used to normalize the blowup rate.
    double eps_l = 1e-6;
    double p_rej_given_l = 0.5;
    double eps_l_rej = 0.5;

    double volume() const {
        return width * depth;
    }
    /// Builds the model with depth v / (w eps_L) and p_rej = p_{rej|L} eps_L / eps_{L|rej}.
    static TimingModel from_normalized(double v, double width, double eps_l, double p_rej_given_l, double eps_l_rej);
};

struct MidshotReport {
    /// Mean executed layers per shot, in units of t_gate.
    double expected_time = 0;
    double gamma_ms = 1;
    double gamma_rej = 1;
    double lambda_ms = 0;
    double lambda_rej = 0;
    /// Exact lambda_ms / lambda_rej.
    double r_exact = 1;
    double u = 0;
    /// Leading-order r(u).
    double r_leading = 1;
};

MidshotReport midshot_overhead(const TimingModel &model);

/// Binary CG-SALEM blowup with mid-shot rejection of S1: inversion part plus r(u) times the rejection part.
/// Both parts are rates per unit eps_L.
double midshot_cg_lambda(double lambda_inversion, double lambda_rejection, double u);

enum class VolumeRule { per_logical, per_physical };

/// eps_L(eps) as a power law c * eps^a.
struct PowerLaw {
    double c = 0;
    double a = 2;
    double operator()(double eps) const;
    /// Least squares in log-log space over three or more points.
    static PowerLaw fit(const std::vector<double> &eps, const std::vector<double> &eps_l);
};

struct ThresholdInputs {
    double lambda = 4;
    double lambda_salem = 1.86;
    double v_ec = 75;
    PowerLaw eps_l;
    /// V = v / eps_L or V = v / eps.
    VolumeRule rule = VolumeRule::per_logical;
};

struct Thresholds {
    double eps_ft = 0;
    double eps_ext_lem = 0;
    double eps_salem = 0;
};

struct NoRoot : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Roots of f on (lo, hi) by bisection to a relative tolerance of 1e-12. The bracket grows tenfold
/// in each direction, at most four times, until the sign changes.
double bisect(const std::function<double(double)> &f, double lo, double hi);

Thresholds solve_thresholds(const ThresholdInputs &in, double v);

/// Normalized volume above which the SALEM threshold exceeds the FT threshold.
double v0(const ThresholdInputs &in);

struct CvbPoint {
    Method method;
    double delta;
    double max_volume;
    /// max_volume relative to bare.
    double cvb;
};

/// Largest V (searched on a log grid of ratio `step` up to `v_max`) with bias + sigma <= delta.
std::vector<CvbPoint> cvb_scan(
    const BaselineInputs &in, const std::vector<Method> &methods, const std::vector<double> &deltas,
    double v_max = 1e9, double step = 1.02);

}  // namespace salem

#endif
