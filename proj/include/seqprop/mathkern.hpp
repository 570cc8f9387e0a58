// Exact-computation kernels: the binomial large-deviation exponent, binomial
// range sums, normal quantiles, and confidence limits for six interval
// families. Everything here is deterministic double arithmetic; callers that
// need exact threshold classification use the rational plumbing in
// numeric.hpp instead.
#pragma once

#include <string>

#include "seqprop/numeric.hpp"

namespace seqprop {

// Large-deviation exponent M(z, theta) = z ln(theta/z) + (1-z) ln((1-theta)/(1-z)),
// with the one-sided limits at z = 0 and z = 1 and -infinity for theta
// outside (0,1). Domain: z in [0,1].
double large_dev(double z, double theta);

// S(k, l, n, p) = sum_{i=k}^{l} C(n,i) p^i (1-p)^{n-i}. Returns 0 when p is
// outside (0,1). Requires 0 <= k <= l <= n. Terms are summed from lgamma-based
// log-pmf values; when the range covers more than half the support the
// complement is summed instead, so tails near 0 keep full absolute accuracy.
double binom_range_sum(long k, long l, long n, double p);

// Standard normal CDF and upper-tail quantile. normal_quantile(a) returns the
// value z with P(X > z) = a for X ~ N(0,1); absolute error below 1e-12 over
// a in (1e-300, 1 - 1e-16).
double normal_cdf(double x);
double normal_upper_tail(double x);
double normal_quantile(double a);

// Clopper-Pearson confidence limits at one-sided level c: the upper limit
// solves S(0, k, n, U) = c (requires k < n) and the lower limit solves
// S(k, n, n, L) = c (requires k > 0). Bracketed bisection to absolute
// tolerance 1e-12.
double cp_upper_limit(long k, long n, double c);
double cp_lower_limit(long k, long n, double c);

enum class CiTag {
    wald,
    revised_wald,
    wilson,
    clopper_pearson,
    fishman,
    chen_massart,
};

const char* ci_tag_name(CiTag tag);
CiTag ci_tag_from_name(const std::string& name);

// A confidence interval family at one-sided level c (both one-sided errors
// are held at c, so two-sided coverage is at least 1 - 2c only for the
// equal-tailed constructions; sequential use only needs the inclusion test).
// `shift` is the pseudo-count used by the revised Wald family.
struct CiFamily {
    CiTag tag = CiTag::clopper_pearson;
    double level = 0.05;
    double shift = 4.0;
};

struct CiLimits {
    double lower = 0.0;
    double upper = 1.0;
};

// Confidence limits for k successes in n trials. Wald and revised-Wald limits
// are reported as computed and may leave [0,1]; the other four families are
// clamped to [0,1] by construction.
CiLimits ci_limits(const CiFamily& family, long k, long n);

}  // namespace seqprop
