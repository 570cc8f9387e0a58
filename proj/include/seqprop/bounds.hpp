// Closed-form performance bounds and large-sample reference quantities:
// per-stage tail bounds on the sample number for parabolic-form rules, the
// resulting upper bound on the average sample number, and the classical
// fixed-size baselines the sequential designs are measured against.
#pragma once

#include "seqprop/exact.hpp"

namespace seqprop {

// Row of the stage-tail table: P(N > size | p) <= bound, valid once the
// success probability sits below the stage's lower continuation slope a.
struct TailBoundRow {
    int stage = 0;  // 1-based
    long size = 0;
    double a = 0.0;
    double bound = 1.0;
};

struct TailBoundTable {
    double p = 0.0;  // folded to [<= 1/2] for symmetric plans
    int tau = 1;     // first stage with p < a_stage; s when none
    std::vector<TailBoundRow> rows;  // stages tau .. s-1
};

// Requires a parabolic-form rule. p > 1/2 is folded to 1 - p for symmetric
// plans and rejected otherwise.
TailBoundTable stage_tail_bounds(const SamplingPlan& plan, double p);

// E[N | p] <= n_tau + sum over stages l >= tau of (n_{l+1} - n_l) * bound_l.
double asn_upper_bound(const SamplingPlan& plan, double p);

// Large-sample approximation to the average sample number of the tuned
// sequential designs.
double asn_approx(double p, double eps, double delta, double zeta);

// Fixed sample sizes: normal approximation and the exponential-tail bound.
long n_normal(double eps, double delta);
long n_ch(double eps, double delta);

// Limiting coverage of the parabolic designs as eps -> 0 at fixed zeta.
double asymptotic_coverage(double zeta, double delta);

}  // namespace seqprop
