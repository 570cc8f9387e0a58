#include "seqprop/rules.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace seqprop {

namespace {

long lceil(double x) {
    double c = std::ceil(x);
    if (c > 9e18) throw std::overflow_error("size overflows long");
    return static_cast<long>(c);
}

long long ceil_div(long long a, long long b) { return (a + b - 1) / b; }

constexpr long kSearchCap = 5'000'000;

}  // namespace

const char* rule_family_name(RuleFamily f) {
    switch (f) {
        case RuleFamily::fishman: return "fishman";
        case RuleFamily::massart: return "massart";
        case RuleFamily::clopper_pearson: return "clopper-pearson";
        case RuleFamily::wald: return "wald";
        case RuleFamily::double_parabolic: return "double-parabolic";
        case RuleFamily::revised_wald: return "revised-wald";
        case RuleFamily::wilson: return "wilson";
        case RuleFamily::inclusion: return "inclusion";
    }
    return "?";
}

RuleFamily rule_family_from_name(const std::string& name) {
    for (RuleFamily f :
         {RuleFamily::fishman, RuleFamily::massart, RuleFamily::clopper_pearson, RuleFamily::wald,
          RuleFamily::double_parabolic, RuleFamily::revised_wald, RuleFamily::wilson,
          RuleFamily::inclusion}) {
        if (name == rule_family_name(f)) return f;
    }
    throw std::invalid_argument("unknown rule family '" + name + "'");
}

const char* schedule_policy_name(SchedulePolicy p) {
    switch (p) {
        case SchedulePolicy::equal_groups: return "equal-groups";
        case SchedulePolicy::fully_sequential: return "fully-sequential";
        case SchedulePolicy::explicit_sizes: return "explicit";
    }
    return "?";
}

SchedulePolicy schedule_policy_from_name(const std::string& name) {
    for (SchedulePolicy p : {SchedulePolicy::equal_groups, SchedulePolicy::fully_sequential,
                             SchedulePolicy::explicit_sizes}) {
        if (name == schedule_policy_name(p)) return p;
    }
    throw std::invalid_argument("unknown schedule policy '" + name + "'");
}

DesignParams DesignParams::make(const std::string& eps, const std::string& delta, double rho,
                                double zeta, int stages, RuleFamily family,
                                SchedulePolicy policy) {
    DesignParams p;
    p.eps = Dec::parse(eps);
    p.delta = Dec::parse(delta);
    p.rho = rho;
    p.zeta = zeta;
    p.stages = stages;
    p.family = family;
    p.policy = policy;
    return p;
}

void validate_params(const DesignParams& p) {
    double eps = p.eps.value();
    double delta = p.delta.value();
    if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("eps must lie in (0, 1/2)");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
    if (!(p.zeta > 0.0)) throw std::invalid_argument("zeta must be positive");
    double zd = p.zeta * delta;
    if (!(zd > 0.0 && zd < 1.0)) throw std::invalid_argument("zeta * delta must lie in (0, 1)");
    if (!(p.rho >= 0.0 && p.rho <= 1.0)) throw std::invalid_argument("rho must lie in [0, 1]");
    if (p.family == RuleFamily::double_parabolic && p.rho * eps > 0.25) {
        throw std::invalid_argument("rho * eps must not exceed 1/4");
    }
    bool quantile_family =
        p.family == RuleFamily::wilson || p.family == RuleFamily::revised_wald ||
        (p.family == RuleFamily::inclusion &&
         (p.inclusion_family == CiTag::wald || p.inclusion_family == CiTag::revised_wald ||
          p.inclusion_family == CiTag::wilson));
    if (quantile_family && zd >= 0.5) {
        throw std::invalid_argument("quantile-based rules need zeta * delta below 1/2");
    }
    if (!(p.rw_shift >= 0.0)) throw std::invalid_argument("revised-Wald shift must be >= 0");
    if (p.policy == SchedulePolicy::equal_groups && p.stages < 1) {
        throw std::invalid_argument("equal-groups schedule needs at least one stage");
    }
    if (p.policy == SchedulePolicy::explicit_sizes && p.explicit_sizes.empty()) {
        throw std::invalid_argument("explicit schedule needs a size list");
    }
    if (p.wald_min_start && p.family != RuleFamily::wald) {
        throw std::invalid_argument("the minimum-size override applies to the Wald family only");
    }
}

StoppingRule StoppingRule::from_params(const DesignParams& p) {
    validate_params(p);
    StoppingRule r;
    r.family_ = p.family;
    r.eps_ = p.eps.value();
    double zd = p.zeta * p.delta.value();
    r.log_zd_ = std::log(zd);
    switch (p.family) {
        case RuleFamily::wald: r.rho_ = 0.0; break;
        case RuleFamily::massart: r.rho_ = 2.0 / 3.0; break;
        case RuleFamily::double_parabolic: r.rho_ = p.rho; break;
        case RuleFamily::wilson: r.rho_ = 1.0; break;
        default: r.rho_ = 0.0; break;
    }
    if (p.family == RuleFamily::wilson || p.family == RuleFamily::revised_wald) {
        r.zq_ = normal_quantile(zd);
    }
    if (p.family == RuleFamily::inclusion) {
        r.ci_ = CiFamily{p.inclusion_family, zd, p.rw_shift};
    }
    r.ci_.shift = p.rw_shift;
    return r;
}

bool StoppingRule::stops(long k, long n) const {
    if (!(n >= 1 && k >= 0 && k <= n)) throw std::domain_error("stops: bad k/n");
    double nd = static_cast<double>(n);
    double z = static_cast<double>(k) / nd;
    switch (family_) {
        case RuleFamily::fishman: {
            double w = 0.5 - std::fabs(0.5 - z);
            return large_dev(w, w + eps_) <= log_zd_ / nd;
        }
        case RuleFamily::clopper_pearson: {
            double zd = std::exp(log_zd_);
            return binom_range_sum(k, n, n, z - eps_) <= zd &&
                   binom_range_sum(0, k, n, z + eps_) <= zd;
        }
        case RuleFamily::wald:
            return nd >= z * (1.0 - z) * (2.0 / (eps_ * eps_)) * (-log_zd_);
        case RuleFamily::massart:
        case RuleFamily::double_parabolic: {
            double d = std::fabs(z - 0.5) - rho_ * eps_;
            return d * d >= 0.25 + eps_ * eps_ * nd / (2.0 * log_zd_);
        }
        case RuleFamily::wilson: {
            double d = std::fabs(z - 0.5) - eps_;
            double t = eps_ / zq_;
            return d * d >= 0.25 - nd * t * t;
        }
        case RuleFamily::revised_wald: {
            double pt = (static_cast<double>(k) + ci_.shift) / (nd + 2.0 * ci_.shift);
            return zq_ * std::sqrt(pt * (1.0 - pt) / nd) <= eps_;
        }
        case RuleFamily::inclusion: {
            CiLimits lm = ci_limits(ci_, k, n);
            return z - eps_ <= lm.lower && lm.upper <= z + eps_;
        }
    }
    return false;
}

std::optional<StoppingRule::ParabolicForm> StoppingRule::parabolic() const {
    switch (family_) {
        case RuleFamily::wald: return ParabolicForm{0.0, log_zd_};
        case RuleFamily::massart: return ParabolicForm{2.0 / 3.0, log_zd_};
        case RuleFamily::double_parabolic: return ParabolicForm{rho_, log_zd_};
        case RuleFamily::wilson: return ParabolicForm{1.0, -0.5 * zq_ * zq_};
        default: return std::nullopt;
    }
}

namespace {

// Definitional search: smallest n at which some count stops. Extreme counts
// stop first for every family here, so the scan exits almost immediately.
long search_n_min(const StoppingRule& rule) {
    for (long n = 1; n <= kSearchCap; ++n) {
        for (long k = 0; k <= n; ++k) {
            if (rule.stops(k, n)) return n;
        }
    }
    throw std::runtime_error("n_min search exceeded its cap; parameters look infeasible");
}

bool all_counts_stop(const StoppingRule& rule, long n) {
    // Mid counts are the last to stop, so test outward from the middle.
    long mid = n / 2;
    for (long off = 0; off <= n + 1; ++off) {
        long k = (off % 2 == 0) ? mid + off / 2 : mid - (off + 1) / 2;
        if (k < 0 || k > n) continue;
        if (!rule.stops(k, n)) return false;
    }
    return true;
}

long search_n_max(const StoppingRule& rule, long start) {
    for (long n = std::max(start, 1L); n <= kSearchCap; ++n) {
        if (!rule.stops(n / 2, n)) continue;
        if (all_counts_stop(rule, n)) return n;
    }
    throw std::runtime_error("n_max search exceeded its cap; parameters look infeasible");
}

struct RawRange {
    double raw_min = 0.0;
    double raw_max = 0.0;
    bool closed_form = false;
};

RawRange raw_range(const DesignParams& p, const StoppingRule& rule) {
    RawRange rr;
    auto pf = rule.parabolic();
    if (!pf) return rr;
    double eps = p.eps.value();
    double big_l = -pf->log_zd;
    rr.raw_min = 2.0 * pf->rho * (1.0 / eps - pf->rho) * big_l;
    if (p.family == RuleFamily::wald && p.wald_min_start) rr.raw_min = big_l / eps;
    rr.raw_max = big_l / (2.0 * eps * eps);
    rr.closed_form = true;
    return rr;
}

SizeRange size_range_impl(const DesignParams& p, const StoppingRule& rule) {
    SizeRange out;
    RawRange rr = raw_range(p, rule);
    if (rr.closed_form) {
        out.min_clamped = rr.raw_min < 1.0;
        out.n_min = std::max(1L, lceil(rr.raw_min));
        out.n_max = std::max(out.n_min, lceil(rr.raw_max));
    } else {
        out.n_min = search_n_min(rule);
        out.n_max = search_n_max(rule, out.n_min);
        out.min_clamped = false;
    }
    return out;
}

std::vector<long> schedule_impl(const DesignParams& p, const StoppingRule& rule,
                                const SizeRange& sr) {
    std::vector<long> sizes;
    switch (p.policy) {
        case SchedulePolicy::fully_sequential: {
            sizes.reserve(sr.n_max - sr.n_min + 1);
            for (long n = sr.n_min; n <= sr.n_max; ++n) sizes.push_back(n);
            return sizes;
        }
        case SchedulePolicy::equal_groups: {
            int s = p.stages;
            if (s == 1) return {sr.n_max};
            RawRange rr = raw_range(p, rule);
            if (rr.closed_form) {
                // Interpolate the unrounded extremes, then round each stage
                // up. Rounding the extremes first and interpolating after
                // would inflate the interior stages by up to one sample.
                for (int l = 1; l <= s; ++l) {
                    double raw =
                        rr.raw_min + (double(l - 1) / double(s - 1)) * (rr.raw_max - rr.raw_min);
                    sizes.push_back(std::max(1L, lceil(raw)));
                }
            } else {
                long span = sr.n_max - sr.n_min;
                for (int l = 1; l <= s; ++l) {
                    sizes.push_back(sr.n_min + static_cast<long>(ceil_div(
                                                   static_cast<long long>(l - 1) * span, s - 1)));
                }
            }
            for (size_t i = 1; i < sizes.size(); ++i) {
                if (sizes[i] <= sizes[i - 1]) {
                    throw std::invalid_argument(
                        "equal-groups schedule collides at stage " + std::to_string(i + 1) +
                        "; the feasible size span is too narrow for " + std::to_string(s) +
                        " stages");
                }
            }
            return sizes;
        }
        case SchedulePolicy::explicit_sizes: {
            sizes = p.explicit_sizes;
            for (size_t i = 0; i < sizes.size(); ++i) {
                if (sizes[i] < 1) throw std::invalid_argument("stage sizes must be positive");
                if (i > 0 && sizes[i] <= sizes[i - 1]) {
                    throw std::invalid_argument("stage sizes must be strictly increasing");
                }
            }
            if (sizes.front() < sr.n_min) {
                throw std::invalid_argument(
                    "stage 1 size " + std::to_string(sizes.front()) +
                    " is below the smallest size at which stopping is possible (" +
                    std::to_string(sr.n_min) + ")");
            }
            if (sizes.size() >= 2 && sizes[sizes.size() - 2] >= sr.n_max) {
                throw std::invalid_argument(
                    "the second-to-last stage size must stay below the guaranteed-stop size (" +
                    std::to_string(sr.n_max) + ")");
            }
            if (sizes.back() < sr.n_max) {
                throw std::invalid_argument(
                    "the final stage size " + std::to_string(sizes.back()) +
                    " is below the guaranteed-stop size (" + std::to_string(sr.n_max) + ")");
            }
            return sizes;
        }
    }
    throw std::logic_error("unreachable schedule policy");
}

std::vector<KInterval> merge_intervals(std::vector<KInterval> v) {
    std::sort(v.begin(), v.end(), [](const KInterval& a, const KInterval& b) { return a.lo < b.lo; });
    std::vector<KInterval> out;
    for (const auto& iv : v) {
        if (iv.hi < iv.lo) continue;
        if (!out.empty() && iv.lo <= out.back().hi + 1) {
            out.back().hi = std::max(out.back().hi, iv.hi);
        } else {
            out.push_back(iv);
        }
    }
    return out;
}

// Candidate continuation bands in count units (open real intervals); each is
// refined against the rule itself so the result is exactly the decide set.
std::vector<KInterval> bands_to_intervals(const StoppingRule& rule, long n,
                                          const std::vector<std::pair<double, double>>& bands) {
    std::vector<KInterval> out;
    for (const auto& band : bands) {
        long lo = std::max(0L, static_cast<long>(std::floor(band.first)) - 2);
        long hi = std::min(n, static_cast<long>(std::ceil(band.second)) + 2);
        while (lo <= hi && rule.stops(lo, n)) ++lo;
        while (hi >= lo && rule.stops(hi, n)) --hi;
        if (lo <= hi) out.push_back({lo, hi});
    }
    return merge_intervals(std::move(out));
}

std::vector<KInterval> scan_intervals(const StoppingRule& rule, long n) {
    std::vector<KInterval> out;
    bool in = false;
    long start = 0;
    for (long k = 0; k <= n; ++k) {
        bool cont = !rule.stops(k, n);
        if (cont && !in) {
            in = true;
            start = k;
        } else if (!cont && in) {
            in = false;
            out.push_back({start, k - 1});
        }
    }
    if (in) out.push_back({start, n});
    return out;
}

}  // namespace

std::vector<KInterval> continuation_set(const StoppingRule& rule, long n) {
    if (auto pf = rule.parabolic()) {
        double eps = rule.eps();
        double r2 = 0.25 + eps * eps * double(n) / (2.0 * pf->log_zd);
        if (r2 <= 0.0) return {};
        double r = std::sqrt(r2);
        double d = pf->rho * eps;
        std::vector<std::pair<double, double>> bands;
        if (d - r < 0.0) {
            bands.push_back({n * (0.5 - d - r), n * (0.5 + d + r)});
        } else {
            bands.push_back({n * (0.5 - d - r), n * (0.5 - d + r)});
            bands.push_back({n * (0.5 + d - r), n * (0.5 + d + r)});
        }
        return bands_to_intervals(rule, n, bands);
    }
    return scan_intervals(rule, n);
}

bool SamplingPlan::continues(int stage, long k) const {
    for (const auto& iv : cont[stage]) {
        if (k < iv.lo) return false;
        if (k <= iv.hi) return true;
    }
    return false;
}

namespace {

bool intervals_symmetric(const std::vector<KInterval>& v, long n) {
    size_t m = v.size();
    for (size_t i = 0; i < m; ++i) {
        const KInterval& a = v[i];
        const KInterval& b = v[m - 1 - i];
        if (a.lo != n - b.hi || a.hi != n - b.lo) return false;
    }
    return true;
}

}  // namespace

SamplingPlan SamplingPlan::from_parts(DesignParams params, std::vector<long> sizes,
                                      std::vector<std::vector<KInterval>> cont) {
    if (sizes.empty()) throw std::invalid_argument("plan needs at least one stage");
    if (cont.size() != sizes.size()) {
        throw std::invalid_argument("continuation sets must match the stage count");
    }
    for (size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] < 1 || (i > 0 && sizes[i] <= sizes[i - 1])) {
            throw std::invalid_argument("stage sizes must be positive and strictly increasing");
        }
        for (const auto& iv : cont[i]) {
            if (iv.lo < 0 || iv.hi > sizes[i] || iv.lo > iv.hi) {
                throw std::invalid_argument("continuation interval out of range at stage " +
                                            std::to_string(i + 1));
            }
        }
    }
    if (!cont.back().empty()) {
        throw std::invalid_argument("the final stage must stop at every count");
    }
    SamplingPlan plan;
    plan.params = std::move(params);
    plan.sizes = std::move(sizes);
    plan.cont = std::move(cont);
    plan.n_min = plan.sizes.front();
    plan.n_max = plan.sizes.back();
    plan.symmetric = true;
    for (size_t i = 0; i < plan.sizes.size(); ++i) {
        if (!intervals_symmetric(plan.cont[i], plan.sizes[i])) {
            plan.symmetric = false;
            break;
        }
    }
    return plan;
}

SamplingPlan materialize(const DesignParams& p) {
    validate_params(p);
    StoppingRule rule = StoppingRule::from_params(p);
    SizeRange sr = size_range_impl(p, rule);
    std::vector<long> sizes = schedule_impl(p, rule, sr);

    std::vector<std::vector<KInterval>> cont;
    cont.reserve(sizes.size());
    for (size_t i = 0; i + 1 < sizes.size(); ++i) {
        cont.push_back(continuation_set(rule, sizes[i]));
    }
    std::vector<KInterval> last = continuation_set(rule, sizes.back());
    if (!last.empty()) {
        throw std::invalid_argument("final stage size " + std::to_string(sizes.back()) +
                                    " does not stop at count " + std::to_string(last.front().lo) +
                                    "; it must be at least the guaranteed-stop size");
    }
    cont.push_back({});

    SamplingPlan plan = SamplingPlan::from_parts(p, std::move(sizes), std::move(cont));
    plan.n_min = sr.n_min;
    plan.n_max = sr.n_max;
    plan.min_clamped = sr.min_clamped;
    return plan;
}

SizeRange size_range(const DesignParams& p) {
    validate_params(p);
    StoppingRule rule = StoppingRule::from_params(p);
    return size_range_impl(p, rule);
}

long n_min(const DesignParams& p) { return size_range(p).n_min; }
long n_max(const DesignParams& p) { return size_range(p).n_max; }

std::vector<long> schedule(const DesignParams& p) {
    validate_params(p);
    StoppingRule rule = StoppingRule::from_params(p);
    SizeRange sr = size_range_impl(p, rule);
    return schedule_impl(p, rule, sr);
}

}  // namespace seqprop
