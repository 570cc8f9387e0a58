// Risk-factor calibration. The rules accept a multiplier zeta on the risk
// level delta; raising zeta shrinks sample sizes but eventually breaks the
// coverage guarantee. Tuning finds the largest zeta that still verifies,
// by bracketing and bisection, with every probe settled by the rigorous
// verifier (an inconclusive probe aborts the run rather than guessing).
#pragma once

#include <cstdint>
#include <vector>

#include "seqprop/verify.hpp"

namespace seqprop {

// The zeta at which the rules' asymptotic coverage equals 1 - delta
// exactly; the natural starting probe for bracketing.
double zeta0(double delta);

// Closed-form zeta certified feasible for every schedule of a parabolic
// rule with dilation rho > 0. Extremely conservative; used as a sanity
// floor during bracketing.
double analytic_feasible_zeta(double eps, double delta, double rho);

struct ProbePoint {
    double zeta = 0.0;
    Verdict verdict = Verdict::inconclusive;
};

std::uint64_t trace_hash(const std::vector<ProbePoint>& trace);

struct Bracket {
    double lo = 0.0;  // verified guaranteed
    double hi = 0.0;  // verified violated
    std::vector<ProbePoint> trace;
};

struct TuneOptions {
    double rel_tol = 1e-3;  // stop when (hi - lo) / lo <= rel_tol
    VerifyOptions verify;
    int max_doublings = 20;
};

// Verify the design at one zeta. Appends to the trace when given.
// Throws Inconclusive when verification cannot settle the probe.
Verdict probe_zeta(const DesignParams& base, double zeta, const TuneOptions& opts,
                   std::vector<ProbePoint>* trace = nullptr);

// Bracket the coverage boundary: start at zeta0, double while guaranteed
// (capped below 1/delta), halve while violated (erroring out if the
// analytic feasibility floor is crossed while still failing).
Bracket initial_bracket(const DesignParams& base, const TuneOptions& opts = {});

struct TuneResult {
    double zeta_star = 0.0;  // largest certified-guaranteed zeta found
    Bracket bracket;         // final bracket after bisection
    std::vector<ProbePoint> trace;
    double rel_tol = 0.0;
};

TuneResult bisection_tune(const DesignParams& base, const TuneOptions& opts = {});

// Bisect inside a caller-supplied bracket. With lo_certified the low end
// is trusted as already verified; a zero-width certified bracket returns
// it unchanged.
TuneResult bisection_tune(const DesignParams& base, double lo, double hi, bool lo_certified,
                          const TuneOptions& opts = {});

}  // namespace seqprop
