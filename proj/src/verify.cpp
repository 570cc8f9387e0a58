#include "seqprop/verify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace seqprop {
namespace {

double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

// Outward rounding for tail thresholds built by double arithmetic (a - eps
// and friends carry a half-ulp rounding error; four steps cover the later
// k/n comparisons as well). Enlarged tails keep upper bounds sound,
// shrunken tails keep lower bounds sound.
double pad_hi(double x) {
    for (int i = 0; i < 4; ++i) x = std::nextafter(x, HUGE_VAL);
    return x;
}
double pad_lo(double x) {
    for (int i = 0; i < 4; ++i) x = std::nextafter(x, -HUGE_VAL);
    return x;
}

struct Iv {
    double a = 0.0;
    double b = 0.0;
    double lb = 0.0;
    double ub = 1.0;
};

// Certified ccp bounds for a batch of intervals. Both non-coverage tails
// are monotone in p, so for p in [a, b]
//   lb = P(phat <= a-eps | b) + P(phat >= b+eps | a)
//   ub = P(phat <= b-eps | a) + P(phat >= a+eps | b)
// Queries are grouped per endpoint; adjacent intervals share a distribution
// evaluation that way.
class BoundEvaluator {
public:
    BoundEvaluator(const SamplingPlan& plan, long eval_cap)
        : plan_(plan), eps_(plan.params.eps.value()), cap_(eval_cap) {}

    long evals() const { return evals_; }

    void run(std::vector<Iv>& gen) {
        struct Slot {
            int iv;
            int part;  // 0: lb, 1: ub
        };
        struct Work {
            std::vector<TailQuery> queries;
            std::vector<Slot> slots;
        };
        std::map<double, Work> work;
        auto add = [&](double p, bool low, double x, int iv, int part) {
            Work& w = work[p];
            w.queries.push_back(TailQuery{low, Prob(x), 0.0});
            w.slots.push_back(Slot{iv, part});
        };
        for (int i = 0; i < static_cast<int>(gen.size()); ++i) {
            Iv& v = gen[i];
            v.lb = 0.0;
            v.ub = 0.0;
            add(v.a, false, pad_hi(v.b + eps_), i, 0);
            add(v.a, true, pad_hi(v.b - eps_), i, 1);
            add(v.b, true, pad_lo(v.a - eps_), i, 0);
            add(v.b, false, pad_lo(v.a + eps_), i, 1);
        }
        for (auto& [p, w] : work) {
            if (++evals_ > cap_) throw Inconclusive("distribution evaluation budget exhausted");
            stopped_tails(plan_, Prob(p), w.queries);
            for (size_t j = 0; j < w.queries.size(); ++j) {
                double& dst = w.slots[j].part ? gen[w.slots[j].iv].ub : gen[w.slots[j].iv].lb;
                dst += w.queries[j].result;
            }
        }
        for (Iv& v : gen) {
            v.lb = clamp01(v.lb);
            v.ub = clamp01(v.ub);
        }
    }

    Iv bounds(double a, double b) {
        std::vector<Iv> one{Iv{a, b, 0.0, 0.0}};
        run(one);
        return one[0];
    }

private:
    const SamplingPlan& plan_;
    double eps_;
    long cap_;
    long evals_ = 0;
};

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

// Points of [a, b] where the non-coverage atom set can change: every
// k/n - eps (atom k/n entering the high tail from above) and k/n + eps
// (entering the low tail), plus the endpoints. Exact rationals when eps
// has an exact form, so the tie convention is decided exactly there.
std::vector<Prob> config_break_points(const SamplingPlan& plan, double a, double b) {
    std::vector<Prob> out;
    out.emplace_back(a);
    out.emplace_back(b);
    const Dec& eps = plan.params.eps;
    double ev = eps.value();
    double w = b - a;
    auto push = [&](long k, long n, int sign) {
        if (eps.has_exact()) {
            Rat kn = Rat::make(k, n);
            auto c = sign > 0 ? Rat::add(kn, *eps.rat()) : Rat::sub(kn, *eps.rat());
            if (c) {
                double cv = c->to_double();
                if (cv >= a - w && cv <= b + w) out.push_back(Prob(*c));
                return;
            }
        }
        double cv = static_cast<double>(k) / static_cast<double>(n) + sign * ev;
        if (cv >= a - w && cv <= b + w) out.emplace_back(cv);
    };
    for (int st = 0; st < plan.stage_count(); ++st) {
        long n = plan.sizes[st];
        long klo = static_cast<long>(std::floor((a + ev) * n)) - 1;
        long khi = static_cast<long>(std::ceil((b + ev) * n)) + 1;
        for (long k = std::max(0L, klo); k <= std::min(n, khi); ++k) push(k, n, -1);
        klo = static_cast<long>(std::floor((a - ev) * n)) - 1;
        khi = static_cast<long>(std::ceil((b - ev) * n)) + 1;
        for (long k = std::max(0L, klo); k <= std::min(n, khi); ++k) push(k, n, +1);
    }
    return out;
}

// Settle a narrow interval by point evaluation. Between break points the
// atom set is fixed, every atom mass is a single monomial in p, and
// |d ccp / dp| <= N / (p (1 - p)); so sup ccp over [a, b] is within
// slack = (b - a) N / min p(1-p) of the best break-point value. A point
// value above delta is a genuine violation anywhere it occurs.
struct NarrowResult {
    enum Outcome { certified, violated, stuck } outcome;
    double at;
    double value;
};

NarrowResult resolve_narrow(const SamplingPlan& plan, double delta, double a, double b,
                            long* point_evals) {
    double w = b - a;
    double m = std::min(a * (1.0 - a), b * (1.0 - b));
    double slack = w * static_cast<double>(plan.sizes.back()) / m;
    double best = -1.0;
    double at = a;
    for (const Prob& c : config_break_points(plan, a, b)) {
        ++*point_evals;
        double v = ccp(plan, c);
        if (v > best) {
            best = v;
            at = c.value;
        }
    }
    if (best > delta) return {NarrowResult::violated, at, best};
    if (best + slack <= delta) return {NarrowResult::certified, at, best};
    return {NarrowResult::stuck, at, best};
}

// Intervals narrower than this go to point resolution; wide enough that
// the derivative slack is still tiny against any practical delta gap.
constexpr double kNarrowWidth = 1e-13;

}  // namespace

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::guaranteed: return "guaranteed";
        case Verdict::violated: return "violated";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

const char* verify_method_name(VerifyMethod m) {
    return m == VerifyMethod::bnb ? "bnb" : "amca";
}

VerifyMethod verify_method_from_name(const std::string& name) {
    if (name == "bnb") return VerifyMethod::bnb;
    if (name == "amca") return VerifyMethod::amca;
    throw std::invalid_argument("unknown verification method: " + name);
}

VerificationReport adapted_bnb(const SamplingPlan& plan, double delta, double lo, double hi,
                               const BnbOptions& opts) {
    if (!(lo > 0.0 && hi < 1.0 && lo < hi)) {
        throw std::invalid_argument("branch and bound needs 0 < lo < hi < 1");
    }
    VerificationReport rep;
    rep.method = "bnb";
    rep.eta = opts.eta;
    rep.min_width = hi - lo;

    BoundEvaluator ev(plan, opts.max_interval_evals);
    std::vector<Iv> gen{Iv{lo, hi}};
    double l = 0.0, u = 0.0;
    Iv best{lo, hi, 0.0, 1.0};
    bool resolution_exhausted = false;
    long point_evals = 0;

    try {
        ev.run(gen);
        rep.intervals_examined = 1;
        best = gen[0];
        rep.max_lower_bound = gen[0].lb;
        if (gen[0].ub <= delta) {
            gen.clear();
        } else {
            l = gen[0].lb;
            u = gen[0].ub;
        }

        while (!gen.empty() && l < delta && u > std::max(l + opts.eta, delta)) {
            std::vector<Iv> next;
            next.reserve(2 * gen.size());
            bool refined = false;
            for (const Iv& v : gen) {
                double m = v.a + 0.5 * (v.b - v.a);
                if (m > v.a && m < v.b) {
                    next.push_back(Iv{v.a, m});
                    next.push_back(Iv{m, v.b});
                    refined = true;
                } else {
                    next.push_back(Iv{v.a, v.b});
                }
            }
            if (!refined) {
                resolution_exhausted = true;
                break;
            }
            ev.run(next);
            rep.intervals_examined += static_cast<long>(next.size());

            std::vector<Iv> kept;
            kept.reserve(next.size());
            l = 0.0;
            u = 0.0;
            for (const Iv& v : next) {
                rep.min_width = std::min(rep.min_width, v.b - v.a);
                if (v.ub <= delta) continue;
                if (v.b - v.a <= kNarrowWidth) {
                    // Too narrow for the interval bounds to close over a ccp
                    // jump; settle it pointwise.
                    NarrowResult nr = resolve_narrow(plan, delta, v.a, v.b, &point_evals);
                    if (nr.outcome == NarrowResult::certified) continue;
                    if (nr.outcome == NarrowResult::violated) {
                        rep.evaluations = ev.evals() + point_evals;
                        rep.max_lower_bound = std::max(rep.max_lower_bound, nr.value);
                        rep.verdict = Verdict::violated;
                        rep.witness = Witness{nr.at, nr.at, nr.value};
                        return rep;
                    }
                }
                kept.push_back(v);
                u = std::max(u, v.ub);
                if (v.lb >= l) {
                    l = v.lb;
                    best = v;
                }
            }
            rep.max_lower_bound = std::max(rep.max_lower_bound, l);
            gen.swap(kept);
        }
    } catch (const Inconclusive& e) {
        rep.evaluations = ev.evals() + point_evals;
        rep.verdict = Verdict::inconclusive;
        rep.note = e.what();
        return rep;
    }

    rep.evaluations = ev.evals() + point_evals;
    if (gen.empty() && l < delta) {
        rep.verdict = Verdict::guaranteed;
    } else if (l > delta) {
        rep.verdict = Verdict::violated;
        rep.witness = Witness{best.a, best.b, best.lb};
    } else if (l == delta) {
        // The certified lower bound sits exactly on delta; sup ccp = delta
        // still satisfies the coverage requirement, so no violation claim.
        rep.verdict = Verdict::inconclusive;
        rep.witness = Witness{best.a, best.b, best.lb};
        rep.note = "max certified lower bound equals delta exactly";
    } else if (resolution_exhausted) {
        rep.verdict = Verdict::inconclusive;
        rep.note = "interval splitting hit double resolution with the bound gap still open";
    } else {
        rep.verdict = Verdict::inconclusive;
        rep.witness = Witness{best.a, best.b, best.lb};
        rep.note = "bound gap closed to eta with delta inside: lb " + fmt(l) + ", ub " + fmt(u) +
                   "; leaning guaranteed";
    }
    return rep;
}

int amca_backward(const std::function<double(double, double)>& upper_bound, double lo, double hi,
                  double delta, double eta, double d0, double* fail_lo, double* fail_hi) {
    if (!(lo < hi)) throw std::invalid_argument("backward scan needs lo < hi");
    if (!(d0 > eta)) throw std::invalid_argument("backward scan needs initial step > eta");
    int F = 0;
    int T = 0;
    double b = hi;
    double d = d0;
    double a = lo;
    double eval_a = lo, eval_b = hi;
    while (F == 0 && T == 0) {
        int st = 0;
        int l = 2;
        while (st == 0) {
            l -= 1;
            d = d * std::ldexp(1.0, l);
            if (b - d > lo) {
                a = b - d;
                T = 0;
            } else {
                a = lo;
                T = 1;
            }
            eval_a = a;
            eval_b = b;
            if (upper_bound(a, b) < delta) {
                st = 1;
                b = a;
            }
            if (d < eta) {
                st = 1;
                F = 1;
            }
        }
    }
    if (F == 1) {
        if (fail_lo) *fail_lo = eval_a;
        if (fail_hi) *fail_hi = eval_b;
    }
    return F;
}

namespace {

// Edge-strip certificate. For p in (0, e] with e < eps the low tail is
// empty (p - eps < 0), and P(phat >= p + eps | p) <= P(phat >= eps | e) by
// threshold and parameter monotonicity. Mirrored on the right.
double left_edge_bound(const SamplingPlan& plan, double e) {
    const Dec& eps = plan.params.eps;
    Prob thr = eps.has_exact() ? Prob(*eps.rat()) : Prob(pad_lo(eps.value()));
    return tail_high(plan, thr, Prob(e));
}

double right_edge_bound(const SamplingPlan& plan, double e) {
    const Dec& eps = plan.params.eps;
    Prob thr = Prob(pad_hi(1.0 - eps.value()));
    if (eps.has_exact()) {
        if (auto r = Rat::sub(Rat{1, 1}, *eps.rat())) thr = Prob(*r);
    }
    return tail_low(plan, thr, Prob(1.0 - e));
}

// A failed edge certificate is still only a bound; probe the strip to tell
// a real violation from slack.
bool edge_probe_violates(const SamplingPlan& plan, double delta, double p, Witness* w) {
    double c = ccp(plan, Prob(p));
    if (c > delta) {
        *w = Witness{p, p, c};
        return true;
    }
    return false;
}

}  // namespace

VerificationReport verify_plan(const SamplingPlan& plan, double delta, const VerifyOptions& opts) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must be in (0, 1)");
    double eps = plan.params.eps.value();
    double e = std::min(eps / 2.0, 1e-4);

    VerificationReport rep;
    rep.method = verify_method_name(opts.method);
    rep.eta = opts.eta;

    std::string notes;
    auto add_note = [&](const std::string& s) {
        if (!notes.empty()) notes += "; ";
        notes += s;
    };

    // Edge strips first: cheap, and they pin down the open ends where the
    // interval bounds degenerate.
    bool edges_ok = true;
    double lb_left = left_edge_bound(plan, e);
    if (lb_left > delta) {
        edges_ok = false;
        Witness w;
        if (edge_probe_violates(plan, delta, e, &w) || edge_probe_violates(plan, delta, e / 2, &w)) {
            rep.verdict = Verdict::violated;
            rep.witness = w;
            rep.note = "ccp above delta inside the left edge strip";
            return rep;
        }
        add_note("left edge certificate failed (bound " + fmt(lb_left) + ")");
    }
    if (!plan.symmetric) {
        double lb_right = right_edge_bound(plan, e);
        if (lb_right > delta) {
            edges_ok = false;
            Witness w;
            if (edge_probe_violates(plan, delta, 1.0 - e, &w) ||
                edge_probe_violates(plan, delta, 1.0 - e / 2, &w)) {
                rep.verdict = Verdict::violated;
                rep.witness = w;
                rep.note = "ccp above delta inside the right edge strip";
                return rep;
            }
            add_note("right edge certificate failed (bound " + fmt(lb_right) + ")");
        }
    }

    double lo = e;
    double hi = plan.symmetric ? 0.5 : 1.0 - e;

    if (opts.method == VerifyMethod::bnb) {
        BnbOptions bo;
        bo.eta = opts.eta;
        bo.max_interval_evals = opts.max_interval_evals;
        VerificationReport inner = adapted_bnb(plan, delta, lo, hi, bo);
        inner.method = rep.method;
        if (!notes.empty()) {
            inner.note = inner.note.empty() ? notes : notes + "; " + inner.note;
        }
        if (inner.verdict == Verdict::guaranteed && !edges_ok) {
            inner.verdict = Verdict::inconclusive;
        }
        if (plan.symmetric) inner.note = inner.note.empty()
                                             ? "interior checked on [e, 1/2] by symmetry"
                                             : inner.note + "; interior checked on [e, 1/2] by symmetry";
        return inner;
    }

    // Backward adaptive scan. When the scan stalls (its step shrank below
    // eta on a piece where the interval bound cannot clear delta, which is
    // what happens at a ccp jump straddling delta), settle that sliver by
    // point resolution and resume to its left.
    BoundEvaluator ev(plan, opts.max_interval_evals);
    long pieces = 0;
    long point_evals = 0;
    double min_width = hi - lo;
    auto ubound = [&](double a, double b) {
        ++pieces;
        min_width = std::min(min_width, b - a);
        return ev.bounds(a, b).ub;
    };
    double hi_cur = hi;
    bool done = false;
    try {
        while (!done) {
            double fa = lo, fb = hi_cur;
            int F = amca_backward(ubound, lo, hi_cur, delta, opts.eta, 0.05 * (hi_cur - lo), &fa,
                                  &fb);
            if (F == 0) {
                done = true;
                break;
            }
            NarrowResult nr = resolve_narrow(plan, delta, fa, fb, &point_evals);
            rep.max_lower_bound = std::max(rep.max_lower_bound, nr.value);
            if (nr.outcome == NarrowResult::violated) {
                rep.verdict = Verdict::violated;
                rep.witness = Witness{nr.at, nr.at, nr.value};
                rep.note = notes;
                rep.intervals_examined = pieces;
                rep.evaluations = ev.evals() + point_evals;
                rep.min_width = min_width;
                return rep;
            }
            if (nr.outcome == NarrowResult::stuck) {
                Iv fail = ev.bounds(fa, fb);
                add_note("backward scan stalled on [" + fmt(fa) + ", " + fmt(fb) +
                         "] with bounds [" + fmt(fail.lb) + ", " + fmt(fail.ub) + "]");
                rep.verdict = Verdict::inconclusive;
                rep.note = notes;
                rep.intervals_examined = pieces;
                rep.evaluations = ev.evals() + point_evals;
                rep.min_width = min_width;
                return rep;
            }
            if (fa <= lo) {
                done = true;
                break;
            }
            hi_cur = fa;
        }
    } catch (const Inconclusive& ex) {
        rep.verdict = Verdict::inconclusive;
        add_note(ex.what());
        rep.note = notes;
        rep.intervals_examined = pieces;
        rep.evaluations = ev.evals() + point_evals;
        rep.min_width = min_width;
        return rep;
    }
    rep.intervals_examined = pieces;
    rep.evaluations = ev.evals() + point_evals;
    rep.min_width = min_width;
    rep.verdict = edges_ok ? Verdict::guaranteed : Verdict::inconclusive;
    if (plan.symmetric) add_note("interior checked on [e, 1/2] by symmetry");
    rep.note = notes;
    return rep;
}

}  // namespace seqprop
