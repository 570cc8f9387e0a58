// Rigorous coverage verification. A plan passes when sup over p in (0,1) of
// the complementary coverage probability stays at or below delta. The ccp
// map has discontinuities at every k/n +/- eps, so grid checks prove
// nothing; both certifiers here work from interval bounds that hold for
// every p inside an interval, and only ever report "guaranteed" from a
// covering family of certified intervals plus closed-form edge bounds.
#pragma once

#include <functional>
#include <optional>
#include <string>

#include "seqprop/exact.hpp"

namespace seqprop {

enum class Verdict { guaranteed, violated, inconclusive };

const char* verdict_name(Verdict v);

// Thrown when a caller needs a definite verdict and verification could not
// separate the supremum from delta.
class Inconclusive : public std::runtime_error {
public:
    explicit Inconclusive(const std::string& what) : std::runtime_error(what) {}
};

struct Witness {
    double lo = 0.0;
    double hi = 0.0;
    double ccp_lower_bound = 0.0;  // certified lower bound on sup ccp over [lo, hi]
};

struct VerificationReport {
    Verdict verdict = Verdict::inconclusive;
    std::optional<Witness> witness;  // present when violated
    long intervals_examined = 0;
    long evaluations = 0;        // stopping-distribution evaluations
    double max_lower_bound = 0.0;
    double min_width = 0.0;      // narrowest interval examined
    double eta = 0.0;
    std::string method;
    std::string note;
};

struct BnbOptions {
    double eta = 1e-10;                     // stop refining when ub - lb <= eta
    long max_interval_evals = 20'000'000;   // safety cap; exceeding it is inconclusive
};

// Generation-synchronous branch and bound over [lo, hi]: split every
// surviving interval in half, discard intervals whose ccp upper bound is at
// most delta, stop when the surviving set empties (guaranteed), some lower
// bound passes delta (violated), or the bound gap falls below eta
// (inconclusive).
VerificationReport adapted_bnb(const SamplingPlan& plan, double delta, double lo, double hi,
                               const BnbOptions& opts = {});

// Backward adaptive certification: walks b from hi toward lo, growing or
// shrinking the step until the interval bound certifies each piece. Returns
// 0 when [lo, hi] is fully certified, 1 on conservative failure (step size
// fell below eta first). When it fails, fail_lo/fail_hi receive the piece
// that could not be certified.
int amca_backward(const std::function<double(double, double)>& upper_bound, double lo, double hi,
                  double delta, double eta, double d0, double* fail_lo = nullptr,
                  double* fail_hi = nullptr);

enum class VerifyMethod { bnb, amca };

const char* verify_method_name(VerifyMethod m);
VerifyMethod verify_method_from_name(const std::string& name);

struct VerifyOptions {
    VerifyMethod method = VerifyMethod::bnb;
    double eta = 1e-10;
    long max_interval_evals = 20'000'000;
};

// Full-plan verification: closed-form certificates for the edge strips
// (0, e] and [1 - e, 1), the interval algorithm on the interior, and the
// mirror shortcut for symmetric plans.
VerificationReport verify_plan(const SamplingPlan& plan, double delta, const VerifyOptions& opts);

}  // namespace seqprop
