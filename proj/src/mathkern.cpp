#include "seqprop/mathkern.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace seqprop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSqrt2 = 1.4142135623730951;

double log_binom_pmf(long i, long n, double log_p, double log_q) {
    return std::lgamma(double(n) + 1.0) - std::lgamma(double(i) + 1.0) -
           std::lgamma(double(n - i) + 1.0) + double(i) * log_p + double(n - i) * log_q;
}

// Sum of C(n,i) p^i (1-p)^(n-i) over i in [k, l]. Anchored at the largest
// in-range term (one lgamma evaluation); neighbors follow from the pmf
// ratio, which is exact up to rounding and decreasing away from the mode, so
// the walk can cut off once terms drop below 1e-320.
double sum_terms(long k, long l, long n, double p, double log_p, double log_q) {
    long mode = std::clamp(static_cast<long>(std::floor((double(n) + 1.0) * p)), k, l);
    double t0 = std::exp(log_binom_pmf(mode, n, log_p, log_q));
    KahanSum acc;
    acc.add(t0);
    double odds = p / (1.0 - p);
    double t = t0;
    for (long i = mode + 1; i <= l; ++i) {
        t *= odds * double(n - i + 1) / double(i);
        if (t < 1e-320) break;
        acc.add(t);
    }
    t = t0;
    for (long i = mode - 1; i >= k; --i) {
        t *= (double(i) + 1.0) / (double(n - i) * odds);
        if (t < 1e-320) break;
        acc.add(t);
    }
    return acc.value();
}

}  // namespace

double large_dev(double z, double theta) {
    if (!(z >= 0.0 && z <= 1.0)) throw std::domain_error("large_dev: z must lie in [0,1]");
    if (!(theta > 0.0 && theta < 1.0)) return -kInf;
    if (z == 0.0) return std::log1p(-theta);
    if (z == 1.0) return std::log(theta);
    return z * std::log(theta / z) + (1.0 - z) * std::log((1.0 - theta) / (1.0 - z));
}

double binom_range_sum(long k, long l, long n, double p) {
    if (!(0 <= k && k <= l && l <= n)) {
        throw std::domain_error("binom_range_sum: need 0 <= k <= l <= n");
    }
    if (!(p > 0.0 && p < 1.0)) return 0.0;
    double log_p = std::log(p);
    double log_q = std::log1p(-p);
    long count = l - k + 1;
    if (count * 2 <= n + 1) {
        return std::min(1.0, sum_terms(k, l, n, p, log_p, log_q));
    }
    // Complement is smaller: 1 - P[0, k-1] - P[l+1, n].
    double low = (k > 0) ? sum_terms(0, k - 1, n, p, log_p, log_q) : 0.0;
    double high = (l < n) ? sum_terms(l + 1, n, n, p, log_p, log_q) : 0.0;
    return std::clamp(1.0 - low - high, 0.0, 1.0);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double normal_upper_tail(double x) { return 0.5 * std::erfc(x / kSqrt2); }

namespace {

// Rational initial guess for the probit function (Acklam's coefficients),
// good to ~1e-9 relative; two Newton corrections against erfc-based tails
// push the error to a few ulps.
double probit_guess(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;
    if (p < p_low) {
        double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p <= 1.0 - p_low) {
        double q = p - 0.5;
        double r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    double q = std::sqrt(-2.0 * std::log1p(-p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

double normal_pdf(double x) {
    return 0.3989422804014327 * std::exp(-0.5 * x * x);
}

}  // namespace

double normal_quantile(double a) {
    if (!(a > 0.0 && a < 1.0)) throw std::domain_error("normal_quantile: need a in (0,1)");
    if (a > 0.5) return -normal_quantile(1.0 - a);
    if (a == 0.5) return 0.0;
    // z solves upper_tail(z) = a with a <= 1/2, so z >= 0.
    double z = -probit_guess(a);
    for (int pass = 0; pass < 2; ++pass) {
        double err = normal_upper_tail(z) - a;  // decreasing in z
        double g = normal_pdf(z);
        if (g <= 0.0) break;
        z += err / g;
    }
    return z;
}

namespace {

// Bisection for a monotone function f on (lo, hi) with f(lo) and f(hi) of
// opposite sign. Runs to absolute x-tolerance 1e-12 with a 200-iteration cap.
template <typename F>
double bisect(F&& f, double lo, double hi, const char* what) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) {
        throw std::runtime_error(std::string(what) + ": root not bracketed");
    }
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (hi - lo <= 1e-12) return mid;
        double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    throw std::runtime_error(std::string(what) + ": no convergence in 200 iterations");
}

}  // namespace

double cp_upper_limit(long k, long n, double c) {
    if (!(n >= 1 && k >= 0 && k <= n)) throw std::domain_error("cp_upper_limit: bad k/n");
    if (k == n) throw std::domain_error("cp_upper_limit: k = n has no finite root; use 1");
    if (!(c > 0.0 && c < 1.0)) throw std::domain_error("cp_upper_limit: need c in (0,1)");
    // S(0,k,n,U) falls from 1 to 0 as U goes 0 -> 1.
    return bisect([&](double u) { return binom_range_sum(0, k, n, u) - c; }, 1e-300,
                  1.0 - 1e-16, "cp_upper_limit");
}

double cp_lower_limit(long k, long n, double c) {
    if (!(n >= 1 && k >= 0 && k <= n)) throw std::domain_error("cp_lower_limit: bad k/n");
    if (k == 0) throw std::domain_error("cp_lower_limit: k = 0 has no finite root; use 0");
    if (!(c > 0.0 && c < 1.0)) throw std::domain_error("cp_lower_limit: need c in (0,1)");
    // S(k,n,n,L) rises from 0 to 1 as L goes 0 -> 1.
    return bisect([&](double l) { return binom_range_sum(k, n, n, l) - c; }, 1e-300,
                  1.0 - 1e-16, "cp_lower_limit");
}

const char* ci_tag_name(CiTag tag) {
    switch (tag) {
        case CiTag::wald: return "wald";
        case CiTag::revised_wald: return "revised-wald";
        case CiTag::wilson: return "wilson";
        case CiTag::clopper_pearson: return "clopper-pearson";
        case CiTag::fishman: return "fishman";
        case CiTag::chen_massart: return "chen-massart";
    }
    return "?";
}

CiTag ci_tag_from_name(const std::string& name) {
    for (CiTag t : {CiTag::wald, CiTag::revised_wald, CiTag::wilson, CiTag::clopper_pearson,
                    CiTag::fishman, CiTag::chen_massart}) {
        if (name == ci_tag_name(t)) return t;
    }
    throw std::invalid_argument("unknown confidence interval family '" + name + "'");
}

namespace {

CiLimits fishman_limits(long k, long n, double c) {
    double z = double(k) / double(n);
    double target = std::log(c) / double(n);
    CiLimits out;
    if (k == 0) {
        out.lower = 0.0;
    } else {
        // M(z, .) rises from -inf to 0 on (0, z].
        out.lower = bisect([&](double th) { return large_dev(z, th) - target; }, 1e-300,
                           z * (1.0 - 1e-16), "fishman lower limit");
    }
    if (k == n) {
        out.upper = 1.0;
    } else {
        // M(z, .) falls from 0 to -inf on [z, 1).
        out.upper = bisect([&](double th) { return large_dev(z, th) - target; },
                           z + (1.0 - z) * 1e-16, 1.0 - 1e-16, "fishman upper limit");
    }
    return out;
}

}  // namespace

CiLimits ci_limits(const CiFamily& family, long k, long n) {
    if (!(n >= 1 && k >= 0 && k <= n)) throw std::domain_error("ci_limits: bad k/n");
    double c = family.level;
    if (!(c > 0.0 && c < 1.0)) throw std::domain_error("ci_limits: need level in (0,1)");
    double z = double(k) / double(n);
    CiLimits out;
    switch (family.tag) {
        case CiTag::wald: {
            double zq = normal_quantile(c);
            double h = zq * std::sqrt(z * (1.0 - z) / double(n));
            out.lower = z - h;
            out.upper = z + h;
            break;
        }
        case CiTag::revised_wald: {
            // Variance taken at the shifted proportion, interval still
            // centered at the sample proportion.
            double zq = normal_quantile(c);
            double a = family.shift;
            double zt = (double(k) + a) / (double(n) + 2.0 * a);
            double h = zq * std::sqrt(zt * (1.0 - zt) / double(n));
            out.lower = z - h;
            out.upper = z + h;
            break;
        }
        case CiTag::wilson: {
            double zq = normal_quantile(c);
            double nd = double(n);
            double center = z + zq * zq / (2.0 * nd);
            double half = zq * std::sqrt(z * (1.0 - z) / nd + (zq / (2.0 * nd)) * (zq / (2.0 * nd)));
            double denom = 1.0 + zq * zq / nd;
            out.lower = std::max(0.0, (center - half) / denom);
            out.upper = std::min(1.0, (center + half) / denom);
            break;
        }
        case CiTag::clopper_pearson: {
            out.lower = (k == 0) ? 0.0 : cp_lower_limit(k, n, c);
            out.upper = (k == n) ? 1.0 : cp_upper_limit(k, n, c);
            break;
        }
        case CiTag::fishman:
            out = fishman_limits(k, n, c);
            break;
        case CiTag::chen_massart: {
            double lam = std::log(1.0 / c);
            double r = 9.0 * double(n) / (2.0 * lam);
            double root = std::sqrt(1.0 + r * z * (1.0 - z));
            double denom = 1.0 + r / 4.0;
            out.lower = std::max(0.0, z + 0.75 * (1.0 - 2.0 * z - root) / denom);
            out.upper = std::min(1.0, z + 0.75 * (1.0 - 2.0 * z + root) / denom);
            break;
        }
    }
    return out;
}

}  // namespace seqprop
