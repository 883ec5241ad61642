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

#ifndef SALEM_MITIGATION_H
#define SALEM_MITIGATION_H

#include <map>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "salem/p2lc.h"
#include "salem/shot_model.h"

namespace salem {

enum class Method { bare, em_physical, ec, ec_ps, ext_lem, fg_salem, cg_salem };

std::string method_name(Method m);
Method parse_method(const std::string &name);

/// Which estimator to run and, for the partitioned ones, how syndromes are grouped and treated.
struct EstimatorSpec {
    Method method = Method::cg_salem;
    PartitionFamily family = PartitionFamily::lut_eps;
    double tau = 0.2;
    /// Treatment of the high-risk subset S1: reject or invert. Used by cg_salem; ec_ps always rejects.
    CycleAction action1 = CycleAction::reject;
    /// Terminate rejected shots at the first rejected syndrome. Changes QPU time, not the estimate.
    bool midshot = false;
};

struct OverheadReport {
    double gamma = 1;
    double gamma_time = 1;
    double lambda = 0;
    double eps_l = 0;
    double accept_probability = 1;
    nlohmann::json to_json() const;
};

struct SingularSyndrome : std::domain_error {
    using std::domain_error::domain_error;
};

/// FG-SALEM overhead of one gate from (P(s), W_s) pairs: Gamma is the harmonic mean of W_s^2 and
/// lambda = log(Gamma) / eps_l. Throws SingularSyndrome when some W_s is infinite.
OverheadReport fg_overhead(const std::vector<std::pair<double, double>> &per_syndrome, double eps_l);

/// Binary CG-SALEM variants with closed-form blowup rates.
enum class CgVariant { inversion, rejection, simple_qp, midshot };

/// Closed-form blowup rate from (eps_{L|1}, p_{1|L}). `gamma1` is the per-gate overhead model of S1 for the
/// inversion variant; `v` is the normalized volume V * eps_L for the mid-shot variant.
double cg_blowup(double eps_l1, double p1_given_l, CgVariant variant, double gamma1 = 1, double v = 1);

/// Shots grouped by global subset for inverse-variance aggregation.
class ShotLedger {
   public:
    struct Subset {
        uint64_t shots = 0;
        double sum = 0;
        double sum_sq = 0;
        double gamma = 1;
    };
    struct Estimate {
        double o_bar = 0;
        /// sqrt of the variance bound at inverse-variance weights.
        double sigma_bound = 0;
        /// Delta-method standard error from the realized outcomes.
        double sigma_empirical = 0;
        /// Shot overhead: total shots over the sum of N_k / Gamma_k.
        double gamma = 1;
        uint64_t accepted = 0;
        uint64_t rejected = 0;
    };

    void add(const ShotOutcome &shot, uint32_t volume);
    /// Associative merge; merging in a fixed order keeps results bit-identical.
    void merge(const ShotLedger &other);
    Estimate estimate() const;
    /// Mean executed cycles per shot.
    double mean_cycles() const;
    uint64_t total_shots() const {
        return accepted_ + rejected_;
    }
    const std::map<uint64_t, Subset> &subsets() const {
        return subsets_;
    }
    nlohmann::json to_json() const;

   private:
    std::map<uint64_t, Subset> subsets_;
    uint64_t accepted_ = 0;
    uint64_t rejected_ = 0;
    double cycles_ = 0;
};

/// Characterization data every estimator draws on.
struct Characterization {
    JointTable table;
    P2lcResult base;
    SyndromeChannels channels;
};

Characterization characterize(const JointTable &table);

/// Builds the per-cycle policy of a method. Physical EM and Bare have no cycle policy and are rejected here.
ShotPolicy make_policy(const EstimatorSpec &spec, const Characterization &ch);

struct EstimatorRun {
    ShotLedger ledger;
    ShotLedger::Estimate estimate;
    OverheadReport overhead;
};

struct NoAcceptedShots : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Monte Carlo memory run with the compressed shot model. Shots are processed in fixed blocks so results do not
/// depend on the thread count.
EstimatorRun run_estimator(
    const EstimatorSpec &spec, const Characterization &ch, uint32_t volume, uint64_t shots, uint64_t seed,
    int threads = 1);

/// One point of a binary CG-SALEM threshold scan with S0 inverted and S1 rejected.
///
/// Rates are per unit eps_L: the inversion part is log(W0^2) / eps_L, the rejection part -log(P_acc) / eps_L. The
/// mid-shot rate scales the rejection part by r(u) with u = v p_{1|L} / eps_{L|1}.
struct CgScanPoint {
    PartitionStats stats;
    double accept_probability = 1;
    double lambda_inversion = 0;
    double lambda_rejection = 0;
    double lambda_rej = 0;
    double lambda_ms = 0;
    double u = 0;
    /// Leading-order closed form 4 (1 - p_{1|L}) + p_{1|L} / eps_{L|1}.
    double lambda_closed_form = 0;
    nlohmann::json to_json() const;
};

/// Scan point from a joint table. S0's channel is conditioned on acceptance of the cycle and of the next one.
CgScanPoint cg_scan_point(const Characterization &ch, PartitionFamily family, double tau, double v = 1);

/// Scan point from syndrome channels alone, for pipelines without a cycle-to-cycle table.
CgScanPoint cg_scan_point(const SyndromeChannels &channels, PartitionFamily family, double tau, double v = 1);

/// Predicted <Z> decay [1 - 2 (p_x + p_y)]^V for EC and EC+PS.
double predicted_decay(const LogicalChannel &channel, uint32_t volume);

/// Closed-form bias and spread of each method at a fixed budget of error-corrected shots.
struct BaselineInputs {
    double eps = 1e-3;
    double eps_l = 1e-4;
    double eps_l0 = 1e-5;
    /// Divisor applied to eps_L in the EC and EC+PS bias formulas.
    double d = 1;
    double v_ec = 75;
    /// Per-gate acceptance probability for EC+PS.
    double p_acc = 1;
    double lambda_ext = 4;
    double lambda_salem = 2.5;
    double budget = 1e6;
};

struct BaselinePoint {
    Method method;
    double volume;
    double bias;
    double sigma;
};

std::vector<BaselinePoint> baseline_curves(
    const BaselineInputs &in, const std::vector<double> &volumes, const std::vector<Method> &methods);

/// V_EC = 5 (2 d^2 - 1) for the surface code of distance d.
double surface_v_ec(int d);

enum class BoundFamily { depolarizing, bit_flip, general };

/// Lower bound on the shot overhead of mitigating D uses of a channel.
double f_bound(const std::array<double, 4> &channel, BoundFamily family, double depth);

/// Harmonic mean of f_bound over subsets with probabilities P(S_k).
double harmonic_bound(
    const std::vector<std::pair<double, std::array<double, 4>>> &subsets, BoundFamily family, double depth);

}  // namespace salem

#endif
