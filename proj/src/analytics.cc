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

#include <Eigen/Dense>
#include <cmath>
#include <fmt/format.h>

using namespace salem;

double salem::midshot_ratio(double u) {
    if (!(u > 0)) {
        throw std::invalid_argument("midshot_ratio needs u > 0.");
    }
    if (u < 1e-4) {
        // Series of log((e^u - 1) / u) / u around zero.
        return 0.5 + u / 24;
    }
    // log(e^u - 1) = u + log1p(-e^-u) avoids overflow at large u.
    return (u + std::log1p(-std::exp(-u)) - std::log(u)) / u;
}

TimingModel TimingModel::from_normalized(
    double v, double width, double eps_l, double p_rej_given_l, double eps_l_rej) {
    TimingModel m;
    m.width = width;
    m.depth = v / (width * eps_l);
    m.eps_l = eps_l;
    m.p_rej_given_l = p_rej_given_l;
    m.eps_l_rej = eps_l_rej;
    m.p_acc = 1 - p_rej_given_l * eps_l / eps_l_rej;
    return m;
}

MidshotReport salem::midshot_overhead(const TimingModel &m) {
    if (!(m.width >= 1 && m.depth >= 1) || !(m.p_acc > 0 && m.p_acc <= 1)) {
        throw std::invalid_argument("Timing model needs w, D >= 1 and p_acc in (0, 1].");
    }
    MidshotReport r;
    if (m.p_acc == 1) {
        r.expected_time = m.depth * m.t_gate;
        return r;
    }
    double log_p = std::log(m.p_acc);
    // p^{wD} and 1 - p^{w} evaluated through expm1 to keep precision when p_acc is close to one.
    double log_acc = m.width * m.depth * log_p;
    double one_minus_all = -std::expm1(log_acc);
    double one_minus_layer = -std::expm1(m.width * log_p);
    r.expected_time = m.t_gate * one_minus_all / one_minus_layer;
    double log_gamma_ms = std::log(one_minus_all / (m.depth * one_minus_layer)) - log_acc;
    r.gamma_ms = std::exp(log_gamma_ms);
    r.gamma_rej = std::exp(-log_acc);
    double norm = m.volume() * m.eps_l * m.p_rej_given_l;
    r.lambda_ms = log_gamma_ms / norm;
    r.lambda_rej = -log_acc / norm;
    r.r_exact = log_gamma_ms / -log_acc;
    r.u = m.volume() * m.eps_l * m.p_rej_given_l / m.eps_l_rej;
    r.r_leading = midshot_ratio(r.u);
    return r;
}

double salem::midshot_cg_lambda(double lambda_inversion, double lambda_rejection, double u) {
    return lambda_inversion + midshot_ratio(u) * lambda_rejection;
}

double PowerLaw::operator()(double eps) const {
    return c * std::pow(eps, a);
}

PowerLaw PowerLaw::fit(const std::vector<double> &eps, const std::vector<double> &eps_l) {
    if (eps.size() != eps_l.size() || eps.size() < 3) {
        throw std::invalid_argument("A power-law fit needs at least three (eps, eps_L) points.");
    }
    Eigen::MatrixXd a(eps.size(), 2);
    Eigen::VectorXd b(eps.size());
    for (size_t i = 0; i < eps.size(); i++) {
        if (!(eps[i] > 0 && eps_l[i] > 0)) {
            throw std::invalid_argument("Power-law fit points must be positive.");
        }
        a(i, 0) = 1;
        a(i, 1) = std::log(eps[i]);
        b(i) = std::log(eps_l[i]);
    }
    Eigen::Vector2d x = a.colPivHouseholderQr().solve(b);
    return PowerLaw{std::exp(x(0)), x(1)};
}

double salem::bisect(const std::function<double(double)> &f, double lo, double hi) {
    double flo = f(lo);
    double fhi = f(hi);
    for (int grow = 0; grow < 4 && (flo > 0) == (fhi > 0); grow++) {
        lo /= 10;
        hi *= 10;
        flo = f(lo);
        fhi = f(hi);
    }
    if ((flo > 0) == (fhi > 0)) {
        throw NoRoot(fmt::format("No sign change on [{:g}, {:g}] (f = {:g}, {:g}).", lo, hi, flo, fhi));
    }
    while (hi - lo > 1e-12 * std::abs(hi)) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

Thresholds salem::solve_thresholds(const ThresholdInputs &in, double v) {
    if (!(in.lambda_salem < in.lambda) || !(in.eps_l.a > 1) || !(in.eps_l.c > 0) || !(v > 0)) {
        throw std::invalid_argument("Thresholds need lambda_SALEM < lambda, a superlinear eps_L(eps) and v > 0.");
    }
    const PowerLaw &el = in.eps_l;
    double log_vec = std::log(in.v_ec);
    Thresholds t;
    t.eps_ft = std::pow(1 / el.c, 1 / (el.a - 1));
    // log V_EC / (lambda V) + k eps_L(eps) = eps, with V set by the volume rule.
    auto solve = [&](double k) {
        auto f = [&](double eps) {
            double e = el(eps);
            double inv_volume = (in.rule == VolumeRule::per_logical ? e : eps) / v;
            return log_vec * inv_volume / in.lambda + k * e - eps;
        };
        return bisect(f, t.eps_ft * 1e-3, t.eps_ft * 10);
    };
    t.eps_ext_lem = solve(1);
    t.eps_salem = solve(in.lambda_salem / in.lambda);
    return t;
}

double salem::v0(const ThresholdInputs &in) {
    return std::log(in.v_ec) / (in.lambda - in.lambda_salem);
}

std::vector<CvbPoint> salem::cvb_scan(
    const BaselineInputs &in, const std::vector<Method> &methods, const std::vector<double> &deltas, double v_max,
    double step) {
    std::vector<double> grid;
    for (double v = 1; v <= v_max; v = std::max(v + 1, std::floor(v * step))) {
        grid.push_back(v);
    }
    auto max_volume = [&](Method m, double delta) {
        auto curve = baseline_curves(in, grid, {m});
        double best = 0;
        for (const auto &p : curve) {
            if (std::abs(p.bias) + p.sigma <= delta) {
                best = p.volume;
            }
        }
        return best;
    };
    std::vector<CvbPoint> out;
    for (double delta : deltas) {
        double bare = max_volume(Method::bare, delta);
        for (Method m : methods) {
            double mv = max_volume(m, delta);
            out.push_back({m, delta, mv, bare > 0 ? mv / bare : 0});
        }
    }
    return out;
}
