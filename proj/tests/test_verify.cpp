#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "seqprop/tune.hpp"
#include "seqprop/verify.hpp"

using namespace seqprop;

namespace {

DesignParams guaranteed_params() {
    return DesignParams::make("0.1", "0.1", 0.75, 2.0427, 1, RuleFamily::double_parabolic,
                              SchedulePolicy::fully_sequential);
}

// Small dilation with the asymptotically-calibrated risk factor overshoots
// delta at moderate p; a known violating configuration.
DesignParams violating_params() {
    return DesignParams::make("0.1", "0.05", 0.1, 2.9300012897216834, 1,
                              RuleFamily::double_parabolic, SchedulePolicy::fully_sequential);
}

double grid_max_ccp(const SamplingPlan& plan, int points) {
    double best = 0.0;
    for (int i = 1; i <= points; ++i) {
        best = std::max(best, ccp(plan, Prob::fraction(i, points + 1)));
    }
    for (double c : discontinuity_set(plan)) {
        for (double p : {c - 1e-9, c, c + 1e-9}) {
            if (p > 0.0 && p < 1.0) best = std::max(best, ccp(plan, p));
        }
    }
    return best;
}

}  // namespace

TEST_CASE("names round-trip") {
    CHECK(verdict_name(Verdict::guaranteed) == std::string("guaranteed"));
    CHECK(verdict_name(Verdict::violated) == std::string("violated"));
    CHECK(verdict_name(Verdict::inconclusive) == std::string("inconclusive"));
    CHECK(verify_method_from_name("bnb") == VerifyMethod::bnb);
    CHECK(verify_method_from_name("amca") == VerifyMethod::amca);
    CHECK_THROWS_AS(verify_method_from_name("grid"), std::invalid_argument);
}

TEST_CASE("a sound design verifies as guaranteed under both certifiers") {
    SamplingPlan plan = materialize(guaranteed_params());
    for (VerifyMethod m : {VerifyMethod::bnb, VerifyMethod::amca}) {
        VerifyOptions o;
        o.method = m;
        VerificationReport rep = verify_plan(plan, 0.1, o);
        CHECK(rep.verdict == Verdict::guaranteed);
        CHECK(!rep.witness.has_value());
        CHECK(rep.evaluations > 0);
        CHECK(rep.method == verify_method_name(m));
    }
    // Consistency: no grid point, including the jump neighborhoods, exceeds delta.
    CHECK(grid_max_ccp(plan, 400) <= 0.1);
}

TEST_CASE("a broken design verifies as violated with a checkable witness") {
    SamplingPlan plan = materialize(violating_params());
    for (VerifyMethod m : {VerifyMethod::bnb, VerifyMethod::amca}) {
        VerifyOptions o;
        o.method = m;
        VerificationReport rep = verify_plan(plan, 0.05, o);
        CHECK(rep.verdict == Verdict::violated);
        REQUIRE(rep.witness.has_value());
        CHECK(rep.witness->ccp_lower_bound > 0.05);
        // Recheck the witness against the exact evaluator.
        double lo = rep.witness->lo, hi = rep.witness->hi;
        double certified =
            lo == hi ? ccp(plan, lo) : ccp_bounds(plan, Prob(lo), Prob(hi)).lower;
        CHECK(certified > 0.05);
    }
    CHECK(grid_max_ccp(plan, 400) > 0.05);
}

TEST_CASE("the symmetric shortcut is recorded in the report") {
    SamplingPlan plan = materialize(guaranteed_params());
    REQUIRE(plan.symmetric);
    VerificationReport rep = verify_plan(plan, 0.1, {});
    CHECK(rep.note.find("symmetry") != std::string::npos);
}

TEST_CASE("a starved evaluation budget yields inconclusive, never a verdict") {
    SamplingPlan plan = materialize(guaranteed_params());
    VerifyOptions o;
    o.max_interval_evals = 8;
    VerificationReport rep = verify_plan(plan, 0.1, o);
    CHECK(rep.verdict == Verdict::inconclusive);
    CHECK(!rep.note.empty());
}

TEST_CASE("interval certification rejects a degenerate domain") {
    SamplingPlan plan = materialize(guaranteed_params());
    CHECK_THROWS_AS(adapted_bnb(plan, 0.1, 0.7, 0.3), std::invalid_argument);
    CHECK_THROWS_AS(verify_plan(plan, 1.5, {}), std::invalid_argument);
}

TEST_CASE("branch and bound reports its interval statistics") {
    SamplingPlan plan = materialize(guaranteed_params());
    VerificationReport rep = adapted_bnb(plan, 0.1, 0.01, 0.5);
    CHECK(rep.verdict == Verdict::guaranteed);
    CHECK(rep.intervals_examined > 0);
    CHECK(rep.min_width > 0.0);
    CHECK(rep.min_width <= 0.49);
    CHECK(rep.max_lower_bound <= 0.1);
    CHECK(rep.eta == 1e-10);
}

TEST_CASE("backward scan certifies exactly when the bound function allows") {
    // Bound that certifies any interval narrower than 0.01: the scan must
    // cover [0.1, 0.9] without stalling.
    auto easy = [](double a, double b) { return b - a <= 0.01 ? 0.0 : 1.0; };
    CHECK(amca_backward(easy, 0.1, 0.9, 0.5, 1e-9, 0.04) == 0);

    // Bound that never certifies: the scan must fail and report a piece.
    double fl = 0.0, fh = 0.0;
    auto hard = [](double, double) { return 1.0; };
    CHECK(amca_backward(hard, 0.1, 0.9, 0.5, 1e-9, 0.04) == 1);
    CHECK(amca_backward(hard, 0.1, 0.9, 0.5, 1e-9, 0.04, &fl, &fh) == 1);
    CHECK(fl < fh);
    CHECK(fh <= 0.9);
    CHECK(fh - fl <= 0.04);

    CHECK_THROWS_AS(amca_backward(easy, 0.9, 0.1, 0.5, 1e-9, 0.04), std::invalid_argument);
    CHECK_THROWS_AS(amca_backward(easy, 0.1, 0.9, 0.5, 1e-3, 1e-4), std::invalid_argument);
}

TEST_CASE("verdicts agree between the certifiers across risk levels") {
    // Scan delta downward until the design stops verifying; both certifiers
    // must flip at the same point and never disagree.
    SamplingPlan plan = materialize(guaranteed_params());
    for (double delta : {0.2, 0.1, 0.09, 0.075}) {
        VerifyOptions bo;
        bo.method = VerifyMethod::bnb;
        VerifyOptions ao;
        ao.method = VerifyMethod::amca;
        Verdict vb = verify_plan(plan, delta, bo).verdict;
        Verdict va = verify_plan(plan, delta, ao).verdict;
        CHECK(vb == va);
        CHECK(vb != Verdict::inconclusive);
    }
}
