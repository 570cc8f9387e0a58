// seqprop: design, tune, verify, and operate multistage sampling plans for
// estimating a binomial proportion to within a fixed margin at a fixed
// confidence, with the coverage guarantee checked exactly rather than by
// normal approximation.
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "seqprop/bounds.hpp"
#include "seqprop/conduct.hpp"
#include "seqprop/exact.hpp"
#include "seqprop/plan_io.hpp"
#include "seqprop/tune.hpp"
#include "seqprop/verify.hpp"

namespace {

using namespace seqprop;

constexpr int kOk = 0;
constexpr int kViolated = 1;
constexpr int kInconclusive = 2;
constexpr int kUsage = 3;

int thread_count() {
    const char* s = std::getenv("SEQPROP_THREADS");
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    if (!s || !*s) return hw;
    int v = std::atoi(s);
    if (v < 1) return 1;
    return v > 256 ? 256 : v;
}

// Deterministic regardless of the thread count: every index writes only
// its own slot.
template <typename Fn>
void parallel_for(long n, Fn&& fn) {
    long t = std::min<long>(thread_count(), n);
    if (t <= 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<long> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> workers;
    workers.reserve(t);
    for (long w = 0; w < t; ++w) {
        workers.emplace_back([&] {
            try {
                for (long i; (i = next.fetch_add(1)) < n;) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!err) err = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    if (err) std::rethrow_exception(err);
}

std::string g12(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

// ---- shared option plumbing -------------------------------------------

struct DesignOpts {
    std::string plan_file;
    std::string eps, delta;
    double rho = 0.75;
    double zeta = std::numeric_limits<double>::quiet_NaN();
    int stages = 1;
    std::string family = "double-parabolic";
    std::string policy = "equal-groups";
    std::vector<long> sizes;
    double rw_shift = 4.0;
    bool wald_min_start = false;
    std::string inclusion = "clopper-pearson";
};

void add_param_options(CLI::App* cmd, DesignOpts& o, bool required) {
    auto* eps = cmd->add_option("--eps", o.eps, "margin of error, in (0, 1/2)");
    auto* delta = cmd->add_option("--delta", o.delta, "confidence risk, in (0, 1)");
    if (required) {
        eps->required();
        delta->required();
    }
    cmd->add_option("--rho", o.rho, "parabolic dilation, in [0, 1]")->capture_default_str();
    cmd->add_option("--zeta", o.zeta,
                    "risk multiplier (default: the asymptotically exact value for delta)");
    cmd->add_option("--stages", o.stages, "stage count for equal-groups schedules")
        ->capture_default_str();
    cmd->add_option("--family", o.family,
                    "stopping rule: fishman | massart | clopper-pearson | wald | "
                    "double-parabolic | revised-wald | wilson | inclusion")
        ->capture_default_str();
    cmd->add_option("--policy", o.policy, "schedule: equal-groups | fully-sequential | explicit")
        ->capture_default_str();
    cmd->add_option("--sizes", o.sizes, "explicit cumulative stage sizes (implies --policy explicit)")
        ->delimiter(',');
    cmd->add_option("--rw-shift", o.rw_shift, "revised-Wald pseudo-count")->capture_default_str();
    cmd->add_flag("--wald-min-start", o.wald_min_start,
                  "replace the degenerate Wald minimum stage size");
    cmd->add_option("--inclusion-family", o.inclusion,
                    "interval family for the inclusion rule: wald | revised-wald | wilson | "
                    "clopper-pearson | fishman | chen-massart")
        ->capture_default_str();
}

void add_plan_option(CLI::App* cmd, DesignOpts& o) {
    cmd->add_option("--plan", o.plan_file, "read the plan from a plan file instead of parameters");
}

DesignParams build_params(const DesignOpts& o) {
    if (o.eps.empty() || o.delta.empty()) {
        throw std::invalid_argument("need --eps and --delta (or --plan FILE)");
    }
    double zeta = std::isnan(o.zeta) ? zeta0(Dec::parse(o.delta).value()) : o.zeta;
    std::string policy = o.policy;
    if (!o.sizes.empty()) policy = "explicit";
    DesignParams p = DesignParams::make(o.eps, o.delta, o.rho, zeta, o.stages,
                                        rule_family_from_name(o.family),
                                        schedule_policy_from_name(policy));
    p.explicit_sizes = o.sizes;
    p.rw_shift = o.rw_shift;
    p.wald_min_start = o.wald_min_start;
    p.inclusion_family = ci_tag_from_name(o.inclusion);
    return p;
}

LoadedPlan resolve_plan(const DesignOpts& o) {
    if (!o.plan_file.empty()) {
        if (!o.eps.empty() || !o.delta.empty()) {
            throw std::invalid_argument("--plan conflicts with inline design parameters");
        }
        return load_plan(o.plan_file);
    }
    LoadedPlan lp;
    lp.plan = materialize(build_params(o));
    lp.provenance.tool = tool_id();
    return lp;
}

// ---- printing ----------------------------------------------------------

std::string interval_text(const std::vector<KInterval>& iv) {
    if (iv.empty()) return "(none: every count stops)";
    std::string s;
    for (const KInterval& k : iv) {
        if (!s.empty()) s += " ";
        s += "[" + std::to_string(k.lo) + "," + std::to_string(k.hi) + "]";
    }
    return s;
}

void print_plan(std::ostream& os, const SamplingPlan& plan, bool all_stages) {
    const DesignParams& p = plan.params;
    os << "family        " << rule_family_name(p.family);
    if (p.family == RuleFamily::double_parabolic) os << " (rho = " << p.rho << ")";
    if (p.family == RuleFamily::inclusion) os << " (" << ci_tag_name(p.inclusion_family) << ")";
    os << "\n";
    os << "eps           " << p.eps.text() << "\n";
    std::ostringstream z;
    z << std::setprecision(10) << p.zeta;
    os << "delta         " << p.delta.text() << "  (zeta " << z.str() << ", zeta*delta "
       << std::setprecision(6) << p.zeta * p.delta.value() << ")\n";
    os << "policy        " << schedule_policy_name(p.policy);
    if (p.policy == SchedulePolicy::equal_groups) os << ", " << p.stages << " stages";
    os << "\n";
    os << "size range    [" << plan.n_min << ", " << plan.n_max << "]"
       << (plan.min_clamped ? "  (raw minimum below 1, clamped)" : "") << "\n";
    os << "symmetric     " << (plan.symmetric ? "yes" : "no") << "\n";
    int s = plan.stage_count();
    os << "stages        " << s << "\n";
    int head = all_stages || s <= 12 ? s : 8;
    for (int i = 0; i < head; ++i) {
        os << "  stage " << std::setw(4) << i + 1 << "  n = " << std::setw(7) << plan.sizes[i]
           << "  continue k in " << interval_text(plan.cont[i]) << "\n";
    }
    if (head < s) {
        os << "  ... " << (s - head - 1) << " stages omitted (use --all-stages) ...\n";
        os << "  stage " << std::setw(4) << s << "  n = " << std::setw(7) << plan.sizes[s - 1]
           << "  continue k in " << interval_text(plan.cont[s - 1]) << "\n";
    }
}

void print_report(std::ostream& os, const VerificationReport& rep) {
    os << "verdict             " << verdict_name(rep.verdict) << "\n";
    os << "method              " << rep.method << "  (eta " << rep.eta << ")\n";
    os << "intervals examined  " << rep.intervals_examined << "\n";
    os << "distribution evals  " << rep.evaluations << "\n";
    os << "max lower bound     " << g12(rep.max_lower_bound) << "\n";
    if (rep.witness) {
        os << "witness             [" << g12(rep.witness->lo) << ", " << g12(rep.witness->hi)
           << "]  ccp lower bound " << g12(rep.witness->ccp_lower_bound) << "\n";
    }
    if (!rep.note.empty()) os << "note                " << rep.note << "\n";
}

int verdict_code(Verdict v) {
    switch (v) {
        case Verdict::guaranteed: return kOk;
        case Verdict::violated: return kViolated;
        case Verdict::inconclusive: return kInconclusive;
    }
    return kUsage;
}

// ---- subcommand runners -------------------------------------------------

struct VerifyOpts {
    std::string method = "bnb";
    double eta = std::numeric_limits<double>::quiet_NaN();
    long max_evals = 20'000'000;
    bool update = false;
};

VerifyOptions make_verify_options(const VerifyOpts& vo) {
    VerifyOptions o;
    o.method = verify_method_from_name(vo.method);
    o.eta = std::isnan(vo.eta) ? (o.method == VerifyMethod::bnb ? 1e-10 : 1e-15) : vo.eta;
    o.max_interval_evals = vo.max_evals;
    return o;
}

void add_verify_options(CLI::App* cmd, VerifyOpts& vo) {
    cmd->add_option("--method", vo.method, "bnb (branch and bound) | amca (backward scan)")
        ->capture_default_str();
    cmd->add_option("--eta", vo.eta, "refinement floor (default 1e-10 bnb, 1e-15 amca)");
    cmd->add_option("--max-evals", vo.max_evals, "distribution evaluation budget")
        ->capture_default_str();
}

int run_design(const DesignOpts& o, const std::string& out, bool all_stages) {
    LoadedPlan lp = resolve_plan(o);
    print_plan(std::cout, lp.plan, all_stages);
    if (!out.empty()) {
        save_plan(out, lp.plan, lp.provenance);
        std::cout << "wrote " << out << "\n";
    }
    return kOk;
}

int run_tune(const DesignOpts& o, const VerifyOpts& vo, double rel_tol, const std::string& out) {
    DesignParams base = build_params(o);
    TuneOptions topts;
    topts.rel_tol = rel_tol;
    topts.verify = make_verify_options(vo);
    TuneResult res = bisection_tune(base, topts);
    for (const ProbePoint& pp : res.trace) {
        std::cout << "probe zeta " << std::setw(14) << std::setprecision(10) << pp.zeta << "  -> "
                  << verdict_name(pp.verdict) << "\n";
    }
    std::cout << "zeta*         " << std::setprecision(10) << res.zeta_star << "\n";
    std::cout << "bracket       [" << res.bracket.lo << ", " << res.bracket.hi << "]  (rel tol "
              << res.rel_tol << ")\n";
    std::cout << "probes        " << res.trace.size() << "\n";
    if (!out.empty()) {
        DesignParams tuned = base;
        tuned.zeta = res.zeta_star;
        SamplingPlan plan = materialize(tuned);
        Provenance prov;
        prov.tool = tool_id();
        prov.tuning = TuningRecord{res.zeta_star, res.rel_tol, trace_hash(res.trace)};
        prov.verification = VerificationRecord{"guaranteed", verify_method_name(topts.verify.method),
                                               topts.verify.eta, "verified during tuning"};
        save_plan(out, plan, prov);
        std::cout << "wrote " << out << "\n";
    }
    return kOk;
}

int run_verify(const DesignOpts& o, const VerifyOpts& vo) {
    LoadedPlan lp = resolve_plan(o);
    VerifyOptions opts = make_verify_options(vo);
    VerificationReport rep = verify_plan(lp.plan, lp.plan.params.delta.value(), opts);
    print_report(std::cout, rep);
    if (vo.update) {
        if (o.plan_file.empty()) throw std::invalid_argument("--update needs --plan FILE");
        lp.provenance.verification =
            VerificationRecord{verdict_name(rep.verdict), rep.method, rep.eta, rep.note};
        save_plan(o.plan_file, lp.plan, lp.provenance);
        std::cout << "updated " << o.plan_file << "\n";
    }
    return verdict_code(rep.verdict);
}

struct SweepOpts {
    std::string quantity = "coverage";
    long points = 2000;
    bool discontinuities = false;
    std::string out;
};

int run_sweep(const DesignOpts& o, const SweepOpts& so) {
    LoadedPlan lp = resolve_plan(o);
    const SamplingPlan& plan = lp.plan;

    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!so.out.empty()) {
        file.open(so.out, std::ios::binary);
        if (!file) throw std::runtime_error("cannot open output file: " + so.out);
        os = &file;
    }

    if (so.quantity == "boundary") {
        // Stop/continue boundary in the (proportion, size) plane.
        auto pf = StoppingRule::from_params(plan.params).parabolic();
        *os << "phat,n\n";
        if (pf) {
            double eps = plan.params.eps.value();
            double l = -pf->log_zd;
            for (long i = 1; i <= so.points; ++i) {
                double x = static_cast<double>(i) / static_cast<double>(so.points + 1);
                double d = std::fabs(x - 0.5) - pf->rho * eps;
                double n = 2.0 * l / (eps * eps) * (0.25 - d * d);
                if (n < 0.0) n = 0.0;
                *os << g12(x) << "," << g12(n) << "\n";
            }
        } else {
            for (int st = 0; st < plan.stage_count(); ++st) {
                double n = static_cast<double>(plan.sizes[st]);
                for (const KInterval& iv : plan.cont[st]) {
                    *os << g12(iv.lo / n) << "," << plan.sizes[st] << "\n";
                    *os << g12(iv.hi / n) << "," << plan.sizes[st] << "\n";
                }
            }
        }
        return kOk;
    }

    double (*eval)(const SamplingPlan&, const Prob&) = nullptr;
    if (so.quantity == "coverage") {
        eval = coverage;
    } else if (so.quantity == "ccp") {
        eval = ccp;
    } else if (so.quantity == "asn") {
        eval = asn;
    } else {
        throw std::invalid_argument("unknown sweep quantity: " + so.quantity);
    }

    std::vector<Prob> ps;
    ps.reserve(so.points + 16);
    for (long i = 1; i <= so.points; ++i) ps.push_back(Prob::fraction(i, so.points + 1));
    if (so.discontinuities) {
        for (double c : discontinuity_set(plan)) {
            for (double d : {c - 1e-9, c, c + 1e-9}) {
                if (d > 0.0 && d < 1.0) ps.push_back(Prob(d));
            }
        }
    }
    std::stable_sort(ps.begin(), ps.end(),
                     [](const Prob& a, const Prob& b) { return a.value < b.value; });
    ps.erase(std::unique(ps.begin(), ps.end(),
                         [](const Prob& a, const Prob& b) { return a.value == b.value; }),
             ps.end());

    std::vector<double> vals(ps.size());
    parallel_for(static_cast<long>(ps.size()),
                 [&](long i) { vals[i] = eval(plan, ps[i]); });

    *os << "p," << so.quantity << "\n";
    for (size_t i = 0; i < ps.size(); ++i) {
        *os << g12(ps[i].value) << "," << g12(vals[i]) << "\n";
    }
    return kOk;
}

int run_conduct(const DesignOpts& o, const std::vector<long>& counts) {
    LoadedPlan lp = resolve_plan(o);
    ConductState st(lp.plan);
    for (long c : counts) {
        ConductState::StepResult r = st.advance(c);
        std::cout << "stage " << r.stage + 1 << ": group " << r.group << ", group successes " << c
                  << ", cumulative " << r.successes << "/" << r.samples << " -> "
                  << (r.stopped ? "stop" : "continue") << "\n";
    }
    if (st.stopped()) {
        std::cout << "estimate " << st.successes() << "/" << st.samples() << " = "
                  << g12(st.estimate()) << "\n";
    } else {
        std::cout << "sampling continues: next group " << st.next_group_size() << " (stage "
                  << st.next_stage() + 1 << ")\n";
    }
    return kOk;
}

int run_bounds(const DesignOpts& o, const std::vector<double>& p_list) {
    LoadedPlan lp = resolve_plan(o);
    const SamplingPlan& plan = lp.plan;
    const DesignParams& dp = plan.params;
    double eps = dp.eps.value();
    double delta = dp.delta.value();
    std::cout << "fixed-size references: normal " << n_normal(eps, delta) << ", exponential tail "
              << n_ch(eps, delta) << "\n";
    std::cout << "asymptotic coverage at zeta " << std::setprecision(10) << dp.zeta << ": "
              << g12(asymptotic_coverage(dp.zeta, delta)) << "\n";
    for (double p : p_list) {
        std::cout << "\np = " << g12(p) << "\n";
        std::cout << "  exact asn        " << g12(asn(plan, Prob(p))) << "\n";
        std::cout << "  asn upper bound  " << g12(asn_upper_bound(plan, p)) << "\n";
        std::cout << "  asn approx       " << g12(asn_approx(p, eps, delta, dp.zeta)) << "\n";
        TailBoundTable t = stage_tail_bounds(plan, p);
        std::cout << "  first unbounded stage tau = " << t.tau << "\n";
        for (const TailBoundRow& r : t.rows) {
            std::cout << "  stage " << std::setw(4) << r.stage << "  n = " << std::setw(7) << r.size
                      << "  slope " << g12(r.a) << "  P(N > n) <= " << g12(r.bound) << "\n";
        }
    }
    return kOk;
}

// Bundled reference designs: pre-tuned risk multipliers for the parabolic
// rule at dilation 3/4. stages == 0 marks a fully sequential schedule.
struct RefDesign {
    const char* eps;
    const char* delta;
    int stages;
    double zeta;
};

const RefDesign kRefDesigns[] = {
    {"0.1", "0.1", 0, 2.0427},   {"0.1", "0.05", 0, 2.4174},  {"0.1", "0.01", 0, 3.0608},
    {"0.05", "0.1", 0, 2.0503},  {"0.05", "0.05", 0, 2.5862}, {"0.05", "0.01", 0, 3.3125},
    {"0.02", "0.1", 0, 2.1078},  {"0.02", "0.05", 0, 2.5592}, {"0.02", "0.01", 0, 3.4461},
    {"0.01", "0.1", 0, 2.0906},  {"0.01", "0.05", 0, 2.5592}, {"0.01", "0.01", 0, 3.4461},
    // equal groups, delta = 0.05
    {"0.1", "0.05", 3, 2.6583},  {"0.1", "0.05", 4, 2.6583},  {"0.1", "0.05", 5, 2.5096},
    {"0.1", "0.05", 6, 2.5946},  {"0.1", "0.05", 7, 2.4459},  {"0.1", "0.05", 8, 2.6512},
    {"0.1", "0.05", 9, 2.5096},  {"0.1", "0.05", 10, 2.4459},
    {"0.05", "0.05", 3, 2.6759}, {"0.05", "0.05", 4, 2.6759}, {"0.05", "0.05", 5, 2.6759},
    {"0.05", "0.05", 6, 2.6759}, {"0.05", "0.05", 7, 2.6759}, {"0.05", "0.05", 8, 2.5914},
    {"0.05", "0.05", 9, 2.6759}, {"0.05", "0.05", 10, 2.6759},
    {"0.02", "0.05", 3, 2.6725}, {"0.02", "0.05", 4, 2.6725}, {"0.02", "0.05", 5, 2.6725},
    {"0.02", "0.05", 6, 2.6607}, {"0.02", "0.05", 7, 2.6607}, {"0.02", "0.05", 8, 2.6725},
    {"0.02", "0.05", 9, 2.6725}, {"0.02", "0.05", 10, 2.6725},
    {"0.01", "0.05", 3, 2.6796}, {"0.01", "0.05", 4, 2.6796}, {"0.01", "0.05", 5, 2.6796},
    {"0.01", "0.05", 6, 2.6796}, {"0.01", "0.05", 7, 2.6796}, {"0.01", "0.05", 8, 2.5875},
    {"0.01", "0.05", 9, 2.6796}, {"0.01", "0.05", 10, 2.6796},
    // equal groups, delta = 0.01
    {"0.1", "0.01", 3, 3.3322},  {"0.1", "0.01", 4, 3.3322},  {"0.1", "0.01", 5, 3.3322},
    {"0.1", "0.01", 6, 3.3322},  {"0.1", "0.01", 7, 3.3322},  {"0.1", "0.01", 8, 3.2709},
    {"0.1", "0.01", 9, 3.0782},  {"0.1", "0.01", 10, 3.3322},
    {"0.05", "0.01", 3, 3.5074}, {"0.05", "0.01", 4, 3.5074}, {"0.05", "0.01", 5, 3.5074},
    {"0.05", "0.01", 6, 3.5074}, {"0.05", "0.01", 7, 3.5074}, {"0.05", "0.01", 8, 3.5074},
    {"0.05", "0.01", 9, 3.5074}, {"0.05", "0.01", 10, 3.5074},
    {"0.02", "0.01", 3, 3.5430}, {"0.02", "0.01", 4, 3.5430}, {"0.02", "0.01", 5, 3.5430},
    {"0.02", "0.01", 6, 3.5430}, {"0.02", "0.01", 7, 3.5430}, {"0.02", "0.01", 8, 3.5430},
    {"0.02", "0.01", 9, 3.5430}, {"0.02", "0.01", 10, 3.5430},
    {"0.01", "0.01", 3, 3.5753}, {"0.01", "0.01", 4, 3.5753}, {"0.01", "0.01", 5, 3.5753},
    {"0.01", "0.01", 6, 3.5753}, {"0.01", "0.01", 7, 3.5753}, {"0.01", "0.01", 8, 3.5753},
    {"0.01", "0.01", 9, 3.5753}, {"0.01", "0.01", 10, 3.5753},
};

DesignParams ref_params(const RefDesign& r) {
    return DesignParams::make(r.eps, r.delta, 0.75, r.zeta, r.stages == 0 ? 1 : r.stages,
                              RuleFamily::double_parabolic,
                              r.stages == 0 ? SchedulePolicy::fully_sequential
                                            : SchedulePolicy::equal_groups);
}

struct TablesOpts {
    std::string eps, delta;
    int stages = -1;
    bool full = false;
    bool verify = false;
    bool tune = false;
};

int run_tables(const TablesOpts& to, const VerifyOpts& vo) {
    int worst = kOk;
    VerifyOpts vos = vo;
    std::cout << "eps     delta  schedule          zeta     n_min   n_max";
    if (to.verify) std::cout << "  verdict";
    if (to.tune) std::cout << "  zeta_tuned  rel_diff";
    std::cout << "\n";
    for (const RefDesign& r : kRefDesigns) {
        if (!to.eps.empty() && to.eps != r.eps) continue;
        if (!to.delta.empty() && to.delta != r.delta) continue;
        if (to.stages >= 0 && to.stages != r.stages) continue;
        if (!to.full && std::strtod(r.eps, nullptr) <= 0.02) continue;
        DesignParams p = ref_params(r);
        SamplingPlan plan = materialize(p);
        std::ostringstream sched;
        if (r.stages == 0) {
            sched << "fully sequential";
        } else {
            sched << r.stages << " equal groups";
        }
        std::cout << std::left << std::setw(7) << r.eps << " " << std::setw(6) << r.delta << " "
                  << std::setw(17) << sched.str() << " " << std::setw(8) << r.zeta << std::right
                  << std::setw(7) << plan.n_min << " " << std::setw(7) << plan.n_max;
        if (to.verify) {
            VerificationReport rep =
                verify_plan(plan, p.delta.value(), make_verify_options(vos));
            std::cout << "  " << verdict_name(rep.verdict);
            worst = std::max(worst, verdict_code(rep.verdict));
        }
        if (to.tune) {
            TuneOptions topts;
            topts.verify = make_verify_options(vos);
            TuneResult res = bisection_tune(p, topts);
            std::cout << "  " << std::setw(10) << std::setprecision(8) << res.zeta_star << "  "
                      << g12(res.zeta_star / r.zeta - 1.0);
        }
        std::cout << "\n";
    }
    return worst;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "multistage sampling plans for proportion estimation with exact, "
        "verified coverage"};
    app.require_subcommand(1);

    DesignOpts design_o, tune_o, verify_o, sweep_o, conduct_o, bounds_o;
    VerifyOpts verify_vo, tune_vo, tables_vo;
    SweepOpts sweep_so;
    TablesOpts tables_to;
    std::string design_out, tune_out;
    bool design_all_stages = false;
    double tune_rel_tol = 1e-3;
    std::vector<long> conduct_counts;
    std::vector<double> bounds_p;

    CLI::App* design = app.add_subcommand("design", "materialize a plan and print it");
    add_param_options(design, design_o, false);
    add_plan_option(design, design_o);
    design->add_option("--out", design_out, "write the plan to a plan file");
    design->add_flag("--all-stages", design_all_stages, "list every stage");

    CLI::App* tune = app.add_subcommand("tune", "find the largest verified risk multiplier");
    add_param_options(tune, tune_o, true);
    add_verify_options(tune, tune_vo);
    tune->add_option("--rel-tol", tune_rel_tol, "bisection relative tolerance")
        ->capture_default_str();
    tune->add_option("--out", tune_out, "write the tuned plan to a plan file");

    CLI::App* verify = app.add_subcommand("verify", "verify the coverage guarantee rigorously");
    add_param_options(verify, verify_o, false);
    add_plan_option(verify, verify_o);
    add_verify_options(verify, verify_vo);
    verify->add_flag("--update", verify_vo.update, "write the verdict back into the plan file");

    CLI::App* sweep = app.add_subcommand("sweep", "tabulate a quantity across p (CSV)");
    add_param_options(sweep, sweep_o, false);
    add_plan_option(sweep, sweep_o);
    sweep->add_option("--quantity", sweep_so.quantity, "coverage | ccp | asn | boundary")
        ->capture_default_str();
    sweep->add_option("--points", sweep_so.points, "uniform grid size")->capture_default_str();
    sweep->add_flag("--discontinuities", sweep_so.discontinuities,
                    "add the ccp jump points and their 1e-9 neighborhoods");
    sweep->add_option("--out", sweep_so.out, "CSV output file (default stdout)");

    CLI::App* conduct = app.add_subcommand("conduct", "replay group counts through a plan");
    add_param_options(conduct, conduct_o, false);
    add_plan_option(conduct, conduct_o);
    conduct->add_option("--counts", conduct_counts, "per-group success counts")
        ->delimiter(',')
        ->required();

    CLI::App* bounds = app.add_subcommand("bounds", "sample-number bounds and references");
    add_param_options(bounds, bounds_o, false);
    add_plan_option(bounds, bounds_o);
    bounds->add_option("--p", bounds_p, "success probabilities to evaluate")->delimiter(',');

    CLI::App* tables = app.add_subcommand("tables", "bundled reference designs");
    tables->add_option("--eps", tables_to.eps, "filter by margin");
    tables->add_option("--delta", tables_to.delta, "filter by risk");
    tables->add_option("--stages", tables_to.stages, "filter by stage count (0 = fully sequential)");
    tables->add_flag("--full", tables_to.full, "include the small-margin rows (slow)");
    tables->add_flag("--verify", tables_to.verify, "verify each listed design");
    tables->add_flag("--tune", tables_to.tune, "re-tune each listed design and compare");
    add_verify_options(tables, tables_vo);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (design->parsed()) return run_design(design_o, design_out, design_all_stages);
        if (tune->parsed()) return run_tune(tune_o, tune_vo, tune_rel_tol, tune_out);
        if (verify->parsed()) return run_verify(verify_o, verify_vo);
        if (sweep->parsed()) return run_sweep(sweep_o, sweep_so);
        if (conduct->parsed()) return run_conduct(conduct_o, conduct_counts);
        if (bounds->parsed()) return run_bounds(bounds_o, bounds_p);
        if (tables->parsed()) return run_tables(tables_to, tables_vo);
    } catch (const Inconclusive& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInconclusive;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
