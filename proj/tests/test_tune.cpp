#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "seqprop/tune.hpp"

using namespace seqprop;

namespace {

DesignParams small_base() {
    return DesignParams::make("0.1", "0.1", 0.75, 1.0, 1, RuleFamily::double_parabolic,
                              SchedulePolicy::fully_sequential);
}

}  // namespace

TEST_CASE("asymptotic calibration point") {
    CHECK(zeta0(0.05) == doctest::Approx(2.9300012897216834).epsilon(1e-12));
    CHECK(zeta0(0.1) == doctest::Approx(2.5852271228708032).epsilon(1e-12));
    CHECK(zeta0(0.3173) == doctest::Approx(1.9114953984132123).epsilon(1e-12));
    // Below the calibration multiplier the guarantee holds asymptotically;
    // the multiplier never reaches the degeneracy bound 1/delta.
    for (double d : {0.01, 0.05, 0.2}) CHECK(zeta0(d) * d < 1.0);
}

TEST_CASE("closed-form feasible risk factor") {
    CHECK(analytic_feasible_zeta(0.1, 0.05, 0.75) ==
          doctest::Approx(2.4535913943788546e-11).epsilon(1e-9));
    CHECK(analytic_feasible_zeta(0.05, 0.1, 2.0 / 3.0) ==
          doctest::Approx(1.1080580684291494e-27).epsilon(1e-9));
    CHECK_THROWS_AS(analytic_feasible_zeta(0.1, 0.05, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(analytic_feasible_zeta(0.1, 0.05, 1.5), std::invalid_argument);
}

TEST_CASE("probe settles a single risk factor") {
    TuneOptions opts;
    std::vector<ProbePoint> trace;
    CHECK(probe_zeta(small_base(), 2.0, opts, &trace) == Verdict::guaranteed);
    CHECK(probe_zeta(small_base(), 6.0, opts, &trace) == Verdict::violated);
    REQUIRE(trace.size() == 2);
    CHECK(trace[0].zeta == 2.0);
    CHECK(trace[1].verdict == Verdict::violated);
}

TEST_CASE("a starved probe refuses to guess") {
    TuneOptions opts;
    opts.verify.max_interval_evals = 4;
    CHECK_THROWS_AS(probe_zeta(small_base(), 2.0, opts), Inconclusive);
}

TEST_CASE("bracketing starts at the calibration point and straddles the boundary") {
    Bracket br = initial_bracket(small_base());
    REQUIRE(!br.trace.empty());
    CHECK(br.trace[0].zeta == doctest::Approx(zeta0(0.1)).epsilon(1e-15));
    CHECK(br.lo < br.hi);
    CHECK(br.hi * 0.1 < 1.0);
    CHECK(probe_zeta(small_base(), br.lo, TuneOptions{}) == Verdict::guaranteed);
    CHECK(probe_zeta(small_base(), br.hi, TuneOptions{}) == Verdict::violated);
}

TEST_CASE("bisection lands within tolerance of the coverage boundary") {
    TuneResult r = bisection_tune(small_base());
    CHECK(r.zeta_star == r.bracket.lo);
    CHECK(r.bracket.hi - r.bracket.lo <= r.rel_tol * r.bracket.lo * (1 + 1e-12));
    // Independent reference value for this configuration.
    CHECK(std::abs(r.zeta_star - 2.0427) / 2.0427 < 0.05);
    CHECK(probe_zeta(small_base(), r.zeta_star, TuneOptions{}) == Verdict::guaranteed);
    // The trace records every probe, beginning with the bracket.
    CHECK(r.trace.size() >= 3);
    CHECK(trace_hash(r.trace) != 0);
}

TEST_CASE("caller-supplied brackets are honored") {
    TuneResult r = bisection_tune(small_base(), 1.8, 3.0, false);
    CHECK(r.zeta_star >= 1.8);
    CHECK(r.bracket.hi <= 3.0);
    CHECK(r.bracket.hi - r.bracket.lo <= r.rel_tol * r.bracket.lo * (1 + 1e-12));

    TuneResult fixed = bisection_tune(small_base(), 2.0, 2.0, true);
    CHECK(fixed.zeta_star == 2.0);

    // An uncertified low end that fails verification is rejected.
    CHECK_THROWS_AS(bisection_tune(small_base(), 6.0, 7.0, false), std::invalid_argument);
}

TEST_CASE("trace hashing distinguishes verdicts and orders") {
    std::vector<ProbePoint> a{{2.0, Verdict::guaranteed}, {4.0, Verdict::violated}};
    std::vector<ProbePoint> b{{2.0, Verdict::violated}, {4.0, Verdict::violated}};
    std::vector<ProbePoint> c{{4.0, Verdict::violated}, {2.0, Verdict::guaranteed}};
    CHECK(trace_hash(a) == trace_hash(a));
    CHECK(trace_hash(a) != trace_hash(b));
    CHECK(trace_hash(a) != trace_hash(c));
}
