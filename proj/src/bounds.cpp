#include "seqprop/bounds.hpp"

#include <cmath>

namespace seqprop {

TailBoundTable stage_tail_bounds(const SamplingPlan& plan, double p) {
    auto pf = StoppingRule::from_params(plan.params).parabolic();
    if (!pf) throw std::domain_error("stage-tail bounds need a rule in parabolic form");
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("p must be in (0, 1)");
    if (p > 0.5) {
        if (!plan.symmetric) {
            throw std::domain_error("p above 1/2 needs a symmetric plan (fold manually otherwise)");
        }
        p = 1.0 - p;
    }
    double eps = plan.params.eps.value();
    int s = plan.stage_count();
    // Lower slope of the continuation region at stage l (1-based): the
    // smallest proportion that can still continue. Increasing in l.
    auto slope = [&](int l) {
        double r2 = 0.25 + eps * eps * static_cast<double>(plan.sizes[l - 1]) / (2.0 * pf->log_zd);
        return 0.5 - pf->rho * eps - std::sqrt(r2 > 0.0 ? r2 : 0.0);
    };
    TailBoundTable t;
    t.p = p;
    t.tau = s;
    for (int l = 1; l <= s - 1; ++l) {
        if (p < slope(l)) {
            t.tau = l;
            break;
        }
    }
    for (int l = t.tau; l <= s - 1; ++l) {
        double a = slope(l);
        // Continuing past stage l forces phat_l >= a with a > p; the
        // large-deviation tail gives the bound.
        double b = std::exp(static_cast<double>(plan.sizes[l - 1]) * large_dev(a, p));
        t.rows.push_back(TailBoundRow{l, plan.sizes[l - 1], a, b < 1.0 ? b : 1.0});
    }
    return t;
}

double asn_upper_bound(const SamplingPlan& plan, double p) {
    TailBoundTable t = stage_tail_bounds(plan, p);
    int s = plan.stage_count();
    if (t.tau == s) return static_cast<double>(plan.sizes[s - 1]);
    double e = static_cast<double>(plan.sizes[t.tau - 1]);
    for (const TailBoundRow& r : t.rows) {
        e += static_cast<double>(plan.sizes[r.stage] - plan.sizes[r.stage - 1]) * r.bound;
    }
    return e;
}

double asn_approx(double p, double eps, double delta, double zeta) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must be in [0, 1]");
    double zd = zeta * delta;
    if (!(zd > 0.0 && zd < 1.0)) throw std::invalid_argument("zeta * delta must be in (0, 1)");
    return 2.0 * p * (1.0 - p) * std::log(1.0 / zd) / (eps * eps);
}

long n_normal(double eps, double delta) {
    double z = normal_quantile(delta / 2.0);
    return static_cast<long>(std::ceil(0.25 * (z / eps) * (z / eps)));
}

long n_ch(double eps, double delta) {
    return static_cast<long>(std::ceil(std::log(2.0 / delta) / (2.0 * eps * eps)));
}

double asymptotic_coverage(double zeta, double delta) {
    double zd = zeta * delta;
    if (!(zd > 0.0 && zd < 1.0)) throw std::invalid_argument("zeta * delta must be in (0, 1)");
    return 2.0 * normal_cdf(std::sqrt(2.0 * std::log(1.0 / zd))) - 1.0;
}

}  // namespace seqprop
