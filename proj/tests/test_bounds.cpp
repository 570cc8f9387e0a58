#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "seqprop/bounds.hpp"
#include "seqprop/tune.hpp"

using namespace seqprop;

namespace {

SamplingPlan seven_stage() {
    return materialize(DesignParams::make("0.05", "0.05", 0.75, 2.6759, 7));
}

// Exact P(N > size) from the stopping distribution.
double exceed_prob(const SamplingPlan& plan, double p, long size) {
    double acc = 0.0;
    for (const auto& [n, mass] : sample_number_distribution(plan, p)) {
        if (n > size) acc += mass;
    }
    return acc;
}

}  // namespace

TEST_CASE("fixed-size baselines") {
    CHECK(n_normal(0.05, 0.05) == 385);
    CHECK(n_ch(0.05, 0.05) == 738);
    CHECK(n_normal(0.1, 0.1) == 68);
    CHECK(n_ch(0.1, 0.1) == 150);
}

TEST_CASE("limiting coverage at the calibration multiplier is exact") {
    CHECK(std::abs(asymptotic_coverage(zeta0(0.05), 0.05) - 0.95) < 1e-10);
    CHECK(std::abs(asymptotic_coverage(zeta0(0.1), 0.1) - 0.9) < 1e-10);
    CHECK(std::abs(asymptotic_coverage(zeta0(0.01), 0.01) - 0.99) < 1e-10);
    // Larger multipliers lose coverage.
    CHECK(asymptotic_coverage(2.0, 0.05) > asymptotic_coverage(2.5, 0.05));
}

TEST_CASE("large-sample mean-size approximation formula") {
    double want = 2.0 * 0.3 * 0.7 * std::log(1.0 / (2.0 * 0.05)) / (0.1 * 0.1);
    CHECK(asn_approx(0.3, 0.1, 0.05, 2.0) == doctest::Approx(want).epsilon(1e-15));
    CHECK_THROWS_AS(asn_approx(1.5, 0.1, 0.05, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(asn_approx(0.3, 0.1, 0.05, 30.0), std::invalid_argument);
}

TEST_CASE("stage-tail table dominates the exact exceedance probabilities") {
    SamplingPlan plan = seven_stage();
    for (double p : {0.05, 0.2, 0.35, 0.45}) {
        TailBoundTable t = stage_tail_bounds(plan, p);
        CHECK(t.p == p);
        for (const TailBoundRow& row : t.rows) {
            CHECK(row.bound > 0.0);
            CHECK(row.bound <= 1.0);
            CHECK(exceed_prob(plan, p, row.size) <= row.bound + 1e-12);
        }
    }
}

TEST_CASE("mean-size upper bound dominates the exact mean") {
    SamplingPlan plan = seven_stage();
    for (double p : {0.05, 0.2, 0.35, 0.5, 0.65, 0.95}) {
        CHECK(asn_upper_bound(plan, p) >= asn(plan, p) - 1e-9);
        CHECK(asn_upper_bound(plan, p) <= plan.sizes.back());
    }
}

TEST_CASE("probabilities above one half fold through the symmetry") {
    SamplingPlan plan = seven_stage();
    REQUIRE(plan.symmetric);
    TailBoundTable lo = stage_tail_bounds(plan, 1.0 - 0.7);
    TailBoundTable hi = stage_tail_bounds(plan, 0.7);
    CHECK(hi.p == 1.0 - 0.7);
    CHECK(hi.tau == lo.tau);
    REQUIRE(hi.rows.size() == lo.rows.size());
    for (size_t i = 0; i < lo.rows.size(); ++i) {
        CHECK(hi.rows[i].bound == lo.rows[i].bound);
        CHECK(hi.rows[i].a == lo.rows[i].a);
    }
}

TEST_CASE("near one half every stage may be needed") {
    SamplingPlan plan = seven_stage();
    TailBoundTable t = stage_tail_bounds(plan, 0.5);
    CHECK(t.tau == plan.stage_count());
    CHECK(t.rows.empty());
    CHECK(asn_upper_bound(plan, 0.5) == doctest::Approx(403.0).epsilon(1e-15));
}

TEST_CASE("slopes rise with the stage size and gate the entry stage") {
    // The lower continuation slope climbs toward 1/2 - rho * eps as the
    // stage size approaches the guaranteed-stop size.
    SamplingPlan plan = seven_stage();
    TailBoundTable t = stage_tail_bounds(plan, 0.1);
    CHECK(t.tau >= 1);
    REQUIRE(!t.rows.empty());
    for (size_t i = 1; i < t.rows.size(); ++i) CHECK(t.rows[i].a > t.rows[i - 1].a);
    for (const TailBoundRow& row : t.rows) {
        CHECK(0.1 < row.a);
        CHECK(row.a < 0.5 - 0.75 * 0.05 + 1e-12);
    }
}

TEST_CASE("the table requires a parabolic rule and an in-range probability") {
    SamplingPlan plan = seven_stage();
    CHECK_THROWS_AS(stage_tail_bounds(plan, 0.0), std::domain_error);
    CHECK_THROWS_AS(stage_tail_bounds(plan, 1.0), std::domain_error);

    DesignParams ip = DesignParams::make("0.1", "0.1", 0.75, 2.0, 3, RuleFamily::inclusion);
    ip.inclusion_family = CiTag::clopper_pearson;
    SamplingPlan inc = materialize(ip);
    CHECK_THROWS_AS(stage_tail_bounds(inc, 0.3), std::domain_error);

    // Asymmetric plans cannot be folded implicitly.
    DesignParams pp = DesignParams::make("0.1", "0.1", 0.75, 2.0, 1);
    SamplingPlan skew = SamplingPlan::from_parts(pp, {30, 60}, {{{0, 10}}, {}});
    CHECK(!skew.symmetric);
    CHECK_THROWS_AS(stage_tail_bounds(skew, 0.7), std::domain_error);
}
