#include "seqprop/exact.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace seqprop {

namespace {

// Mass below this floor is dropped while propagating between stages; the
// dropped total is reported so conservation checks stay honest.
constexpr double kTrunc = 1e-320;

// Dense Binomial(m, p) pmf over counts 0..m, anchored at the mode so only
// one lgamma evaluation is needed.
void binom_pmf_row(long m, double p, std::vector<double>& out) {
    out.assign(m + 1, 0.0);
    if (m == 0) {
        out[0] = 1.0;
        return;
    }
    double log_p = std::log(p);
    double log_q = std::log1p(-p);
    long mode = std::clamp(static_cast<long>(std::floor((double(m) + 1.0) * p)), 0L, m);
    double log_mode = std::lgamma(double(m) + 1.0) - std::lgamma(double(mode) + 1.0) -
                      std::lgamma(double(m - mode) + 1.0) + double(mode) * log_p +
                      double(m - mode) * log_q;
    double t = std::exp(log_mode);
    out[mode] = t;
    double odds = p / (1.0 - p);
    double v = t;
    for (long i = mode + 1; i <= m; ++i) {
        v *= odds * double(m - i + 1) / double(i);
        if (v < kTrunc) break;
        out[i] = v;
    }
    v = t;
    for (long i = mode - 1; i >= 0; --i) {
        v *= (double(i) + 1.0) / (double(m - i) * odds);
        if (v < kTrunc) break;
        out[i] = v;
    }
}

struct WalkTotals {
    double stopped_total = 0.0;
    double truncated = 0.0;
};

// Forward recursion over the stages: carries the continuing-count mass
// vector, hands every stopped atom (stage, count, mass) to the callback in
// deterministic order (stages ascending, counts ascending within a stage).
template <typename AtomFn>
WalkTotals walk(const SamplingPlan& plan, double p, AtomFn&& on_atom) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("plan evaluation needs p in (0,1)");
    const auto& sizes = plan.sizes;
    const int s = plan.stage_count();

    std::vector<double> cur, next, pmf;
    binom_pmf_row(sizes[0], p, cur);
    long off = 0;

    KahanSum stopped_total;
    KahanSum truncated;

    for (int st = 0; st < s; ++st) {
        const auto& cset = plan.cont[st];
        const long lo = off;
        const long hi = off + static_cast<long>(cur.size()) - 1;

        // Stopped atoms: the span minus the continuation intervals.
        long pos = lo;
        for (const auto& iv : cset) {
            long stop_end = std::min(hi + 1, iv.lo);
            for (long k = pos; k < stop_end; ++k) {
                double mass = cur[k - off];
                on_atom(st, k, mass);
                stopped_total.add(mass);
            }
            pos = std::max(pos, std::min(hi + 1, iv.hi + 1));
        }
        for (long k = pos; k <= hi; ++k) {
            double mass = cur[k - off];
            on_atom(st, k, mass);
            stopped_total.add(mass);
        }

        if (st + 1 == s) break;
        if (cset.empty()) break;  // nothing continues

        long clo = std::max(lo, cset.front().lo);
        long chi = std::min(hi, cset.back().hi);
        if (clo > chi) break;

        long m = sizes[st + 1] - sizes[st];
        binom_pmf_row(m, p, pmf);
        next.assign(static_cast<size_t>(chi - clo + m + 1), 0.0);
        for (const auto& iv : cset) {
            long a = std::max(iv.lo, lo);
            long b = std::min(iv.hi, hi);
            for (long k = a; k <= b; ++k) {
                double mass = cur[k - off];
                if (mass < kTrunc) {
                    if (mass > 0.0) truncated.add(mass);
                    continue;
                }
                double* dst = next.data() + (k - clo);
                for (long j = 0; j <= m; ++j) dst[j] += mass * pmf[j];
            }
        }
        cur.swap(next);
        off = clo;
    }
    return {stopped_total.value(), truncated.value()};
}

// Largest k in [-1, n] with k/n <= x (-1 means none).
long count_at_or_below(long n, const Prob& x) {
    if (x.exact) {
        const Rat& r = *x.exact;
        if (r.num < 0) return -1;
        int128 k = floor_div(int128(n) * r.num, r.den);
        if (k >= n) return n;
        return static_cast<long>(k);
    }
    if (x.value < 0.0) return -1;
    if (x.value >= 1.0) return n;
    long k = static_cast<long>(std::floor(double(n) * x.value));
    while (k + 1 <= n && double(k + 1) / double(n) <= x.value) ++k;
    while (k >= 0 && double(k) / double(n) > x.value) --k;
    return std::clamp(k, -1L, n);
}

// Smallest k in [0, n+1] with k/n >= x (n+1 means none).
long count_at_or_above(long n, const Prob& x) {
    if (x.exact) {
        const Rat& r = *x.exact;
        if (r.num <= 0) return 0;
        if (Rat{r.num, r.den} > Rat{1, 1}) return n + 1;
        int128 k = -floor_div(-int128(n) * r.num, r.den);  // ceil
        if (k <= 0) return 0;
        return static_cast<long>(k);
    }
    if (x.value <= 0.0) return 0;
    if (x.value > 1.0) return n + 1;
    long k = static_cast<long>(std::ceil(double(n) * x.value));
    k = std::clamp(k, 0L, n + 1);
    while (k - 1 >= 0 && double(k - 1) / double(n) >= x.value) --k;
    while (k <= n && double(k) / double(n) < x.value) ++k;
    return std::clamp(k, 0L, n + 1);
}

// p +/- eps, exact when both sides have exact forms that fit.
Prob offset_prob(const Prob& p, const Dec& eps, int sign) {
    if (p.exact && eps.rat()) {
        auto r = sign > 0 ? Rat::add(*p.exact, *eps.rat()) : Rat::sub(*p.exact, *eps.rat());
        if (r) return Prob(*r);
    }
    return Prob(sign > 0 ? p.value + eps.value() : p.value - eps.value());
}

}  // namespace

StageDistribution stopping_distribution(const SamplingPlan& plan, const Prob& p) {
    StageDistribution out;
    out.p = p.value;
    out.stopped.resize(plan.stage_count());
    out.stage_mass.assign(plan.stage_count(), 0.0);
    std::vector<KahanSum> per_stage(plan.stage_count());
    WalkTotals t = walk(plan, p.value, [&](int st, long k, double mass) {
        out.stopped[st].emplace_back(k, mass);
        per_stage[st].add(mass);
    });
    for (int st = 0; st < plan.stage_count(); ++st) out.stage_mass[st] = per_stage[st].value();
    out.stopped_total = t.stopped_total;
    out.truncated_mass = t.truncated;
    return out;
}

double ccp(const SamplingPlan& plan, const Prob& p) {
    const int s = plan.stage_count();
    Prob xlo = offset_prob(p, plan.params.eps, -1);
    Prob xhi = offset_prob(p, plan.params.eps, +1);
    std::vector<long> klo(s), khi(s);
    for (int st = 0; st < s; ++st) {
        klo[st] = count_at_or_below(plan.sizes[st], xlo);
        khi[st] = count_at_or_above(plan.sizes[st], xhi);
    }
    KahanSum bad;
    walk(plan, p.value, [&](int st, long k, double mass) {
        if (k <= klo[st] || k >= khi[st]) bad.add(mass);
    });
    return std::clamp(bad.value(), 0.0, 1.0);
}

double coverage(const SamplingPlan& plan, const Prob& p) { return 1.0 - ccp(plan, p); }

void stopped_tails(const SamplingPlan& plan, const Prob& p, std::vector<TailQuery>& queries) {
    const int s = plan.stage_count();
    const size_t q = queries.size();
    // thresholds[i*s + st]: for query i at stage st.
    std::vector<long> thr(q * s);
    for (size_t i = 0; i < q; ++i) {
        for (int st = 0; st < s; ++st) {
            thr[i * s + st] = queries[i].low ? count_at_or_below(plan.sizes[st], queries[i].x)
                                             : count_at_or_above(plan.sizes[st], queries[i].x);
        }
    }
    std::vector<KahanSum> acc(q);
    walk(plan, p.value, [&](int st, long k, double mass) {
        for (size_t i = 0; i < q; ++i) {
            long t = thr[i * s + st];
            if (queries[i].low ? (k <= t) : (k >= t)) acc[i].add(mass);
        }
    });
    for (size_t i = 0; i < q; ++i) queries[i].result = std::clamp(acc[i].value(), 0.0, 1.0);
}

double tail_low(const SamplingPlan& plan, const Prob& x, const Prob& p) {
    std::vector<TailQuery> q{{true, x}};
    stopped_tails(plan, p, q);
    return q[0].result;
}

double tail_high(const SamplingPlan& plan, const Prob& x, const Prob& p) {
    std::vector<TailQuery> q{{false, x}};
    stopped_tails(plan, p, q);
    return q[0].result;
}

CcpBounds ccp_bounds(const SamplingPlan& plan, const Prob& a, const Prob& b) {
    if (!(a.value <= b.value)) throw std::invalid_argument("ccp_bounds: need a <= b");
    const Dec& eps = plan.params.eps;
    // At p = a: the high tail is largest at the left endpoint.
    std::vector<TailQuery> qa{{false, offset_prob(b, eps, +1)},   // lower: phat >= b+eps
                              {true, offset_prob(b, eps, -1)}};   // upper: phat <= b-eps
    std::vector<TailQuery> qb{{true, offset_prob(a, eps, -1)},    // lower: phat <= a-eps
                              {false, offset_prob(a, eps, +1)}};  // upper: phat >= a+eps
    stopped_tails(plan, a, qa);
    stopped_tails(plan, b, qb);
    CcpBounds out;
    out.lower = std::clamp(qa[0].result + qb[0].result, 0.0, 1.0);
    out.upper = std::clamp(qa[1].result + qb[1].result, 0.0, 1.0);
    return out;
}

std::vector<std::pair<long, double>> sample_number_distribution(const SamplingPlan& plan,
                                                                const Prob& p) {
    std::vector<KahanSum> per_stage(plan.stage_count());
    walk(plan, p.value, [&](int st, long, double mass) { per_stage[st].add(mass); });
    std::vector<std::pair<long, double>> out;
    out.reserve(plan.stage_count());
    for (int st = 0; st < plan.stage_count(); ++st) {
        out.emplace_back(plan.sizes[st], per_stage[st].value());
    }
    return out;
}

double asn(const SamplingPlan& plan, const Prob& p) {
    auto snd = sample_number_distribution(plan, p);
    KahanSum mean;
    for (const auto& [n, mass] : snd) mean.add(double(n) * mass);
    return mean.value();
}

std::vector<double> discontinuity_set(const SamplingPlan& plan) {
    double eps = plan.params.eps.value();
    std::vector<double> pts;
    for (long n : plan.sizes) {
        for (long k = 0; k <= n; ++k) {
            double z = double(k) / double(n);
            double lo = z - eps;
            double hi = z + eps;
            if (lo > 0.0 && lo < 1.0) pts.push_back(lo);
            if (hi > 0.0 && hi < 1.0) pts.push_back(hi);
        }
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

}  // namespace seqprop
