#include "seqprop/tune.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

namespace seqprop {

double zeta0(double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must be in (0, 1)");
    double z = normal_quantile(delta / 2.0);
    return std::exp(-0.5 * z * z) / delta;
}

double analytic_feasible_zeta(double eps, double delta, double rho) {
    if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("eps must be in (0, 1/2)");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must be in (0, 1)");
    if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must be in (0, 1]");
    double num = std::log(delta / 2.0) + std::log1p(-std::exp(-2.0 * eps * eps));
    return std::exp(num / (4.0 * eps * rho * (1.0 - rho * eps))) / delta;
}

std::uint64_t trace_hash(const std::vector<ProbePoint>& trace) {
    // FNV-1a over the probe sequence.
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&](const void* data, size_t n) {
        const unsigned char* b = static_cast<const unsigned char*>(data);
        for (size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ULL;
        }
    };
    for (const ProbePoint& p : trace) {
        std::uint64_t bits;
        static_assert(sizeof bits == sizeof p.zeta);
        std::memcpy(&bits, &p.zeta, sizeof bits);
        mix(&bits, sizeof bits);
        unsigned char v = static_cast<unsigned char>(p.verdict);
        mix(&v, 1);
    }
    return h;
}

Verdict probe_zeta(const DesignParams& base, double zeta, const TuneOptions& opts,
                   std::vector<ProbePoint>* trace) {
    DesignParams p = base;
    p.zeta = zeta;
    SamplingPlan plan = materialize(p);
    VerificationReport rep = verify_plan(plan, p.delta.value(), opts.verify);
    if (rep.verdict == Verdict::inconclusive) {
        std::ostringstream os;
        os.precision(12);
        os << "verification inconclusive at zeta = " << zeta;
        if (!rep.note.empty()) os << " (" << rep.note << ")";
        throw Inconclusive(os.str());
    }
    if (trace) trace->push_back(ProbePoint{zeta, rep.verdict});
    return rep.verdict;
}

Bracket initial_bracket(const DesignParams& base, const TuneOptions& opts) {
    validate_params(base);
    double delta = base.delta.value();
    double z0 = zeta0(delta);
    Bracket br;
    Verdict v0 = probe_zeta(base, z0, opts, &br.trace);

    if (v0 == Verdict::guaranteed) {
        double lo = z0;
        double z = z0;
        for (int i = 0; i < opts.max_doublings; ++i) {
            double cand = 2.0 * z;
            // zeta * delta must stay below 1; approach the wall geometrically.
            if (cand * delta >= 1.0) cand = 0.5 * (z + 1.0 / delta);
            if (!(cand > z)) break;
            if (probe_zeta(base, cand, opts, &br.trace) == Verdict::violated) {
                br.lo = lo;
                br.hi = cand;
                return br;
            }
            lo = cand;
            z = cand;
        }
        throw std::runtime_error("bracketing found no coverage-violating zeta below 1/delta");
    }

    // zeta0 already violates; halve toward the analytic feasibility floor.
    double floor = 0.0;
    if (base.family == RuleFamily::massart) {
        floor = analytic_feasible_zeta(base.eps.value(), delta, 2.0 / 3.0);
    } else if (base.family == RuleFamily::double_parabolic && base.rho > 0.0) {
        floor = analytic_feasible_zeta(base.eps.value(), delta, base.rho);
    }
    double hi = z0;
    for (int i = 1; i <= 60; ++i) {
        double z = std::ldexp(z0, -i);
        if (probe_zeta(base, z, opts, &br.trace) == Verdict::guaranteed) {
            br.lo = z;
            br.hi = hi;
            return br;
        }
        hi = z;
        if (floor > 0.0 && z < floor) {
            throw std::runtime_error(
                "coverage still violated below the analytic feasibility floor; "
                "the design parameters are inconsistent");
        }
    }
    throw std::runtime_error("bracketing found no coverage-guaranteed zeta after 60 halvings");
}

TuneResult bisection_tune(const DesignParams& base, double lo, double hi, bool lo_certified,
                          const TuneOptions& opts) {
    if (!(lo > 0.0 && lo <= hi)) throw std::invalid_argument("bracket must satisfy 0 < lo <= hi");
    TuneResult res;
    res.rel_tol = opts.rel_tol;
    if (!lo_certified) {
        if (probe_zeta(base, lo, opts, &res.trace) != Verdict::guaranteed) {
            throw std::invalid_argument("bracket low end is not coverage-guaranteed");
        }
    }
    while (hi - lo > opts.rel_tol * lo) {
        double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;
        if (probe_zeta(base, mid, opts, &res.trace) == Verdict::guaranteed) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    res.zeta_star = lo;
    res.bracket.lo = lo;
    res.bracket.hi = hi;
    return res;
}

TuneResult bisection_tune(const DesignParams& base, const TuneOptions& opts) {
    Bracket br = initial_bracket(base, opts);
    TuneResult res = bisection_tune(base, br.lo, br.hi, true, opts);
    res.trace.insert(res.trace.begin(), br.trace.begin(), br.trace.end());
    return res;
}

}  // namespace seqprop
