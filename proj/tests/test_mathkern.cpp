#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "seqprop/mathkern.hpp"

using namespace seqprop;

TEST_CASE("large deviation exponent matches reference points") {
    CHECK(large_dev(0.5, 0.6) == doctest::Approx(-0.020410997260127565).epsilon(1e-14));
    CHECK(large_dev(0.3, 0.5) == doctest::Approx(-0.082282878505051846).epsilon(1e-14));
    CHECK(large_dev(0.0, 0.25) == doctest::Approx(std::log(0.75)).epsilon(1e-15));
    CHECK(large_dev(1.0, 0.25) == doctest::Approx(std::log(0.25)).epsilon(1e-15));
}

TEST_CASE("large deviation exponent maximizes at z = theta") {
    for (double t : {0.1, 0.3, 0.5, 0.8}) {
        CHECK(large_dev(t, t) == doctest::Approx(0.0).epsilon(1e-15));
        for (double z : {0.05, 0.2, 0.45, 0.7, 0.95}) {
            if (z != t) CHECK(large_dev(z, t) < 0.0);
        }
    }
}

TEST_CASE("large deviation exponent is minus infinity off the open unit interval") {
    CHECK(large_dev(0.5, 0.0) == -std::numeric_limits<double>::infinity());
    CHECK(large_dev(0.5, 1.0) == -std::numeric_limits<double>::infinity());
    CHECK(large_dev(0.5, -0.2) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("binomial range sum matches exact references") {
    CHECK(binom_range_sum(1, 2, 2, 0.5) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(binom_range_sum(3, 9, 20, 0.3) == doctest::Approx(0.91655497037018784).epsilon(1e-13));
    CHECK(binom_range_sum(0, 2, 40, 0.02) == doctest::Approx(0.95432976955928335).epsilon(1e-13));
    CHECK(binom_range_sum(190, 210, 400, 0.5) ==
          doctest::Approx(0.70629188183821792).epsilon(1e-12));
    CHECK(binom_range_sum(390, 400, 400, 0.98) ==
          doctest::Approx(0.81790124672669050).epsilon(1e-12));
}

TEST_CASE("binomial range sum obeys completeness and symmetry") {
    for (long n : {1L, 7L, 33L, 150L}) {
        for (double p : {0.02, 0.3, 0.5, 0.97}) {
            CHECK(binom_range_sum(0, n, n, p) == doctest::Approx(1.0).epsilon(1e-13));
            long k = n / 3, l = 2 * n / 3;
            double lhs = binom_range_sum(k, l, n, p);
            double rhs = binom_range_sum(n - l, n - k, n, 1.0 - p);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
        }
    }
    CHECK(binom_range_sum(0, 3, 10, 0.0) == 0.0);
    CHECK(binom_range_sum(0, 3, 10, 1.0) == 0.0);
}

TEST_CASE("binomial range sum splits additively") {
    double whole = binom_range_sum(2, 18, 25, 0.4);
    double parts = binom_range_sum(2, 9, 25, 0.4) + binom_range_sum(10, 18, 25, 0.4);
    CHECK(whole == doctest::Approx(parts).epsilon(1e-13));
}

TEST_CASE("normal quantile hits reference points and round-trips") {
    CHECK(normal_quantile(0.025) == doctest::Approx(1.9599639845400542).epsilon(1e-14));
    CHECK(normal_quantile(0.05) == doctest::Approx(1.6448536269514727).epsilon(1e-14));
    CHECK(normal_quantile(1e-6) == doctest::Approx(4.7534243088228989).epsilon(1e-14));
    CHECK(normal_quantile(0.5) == 0.0);
    for (double a : {1e-12, 1e-8, 1e-4, 0.01, 0.2, 0.4, 0.6, 0.99}) {
        double z = normal_quantile(a);
        CHECK(normal_upper_tail(z) == doctest::Approx(a).epsilon(1e-12));
    }
    // Antisymmetry is only testable where 1 - a stays exact enough; in the
    // far tail the complement itself loses the low bits of a.
    for (double a : {0.01, 0.2, 0.4, 0.45}) {
        CHECK(normal_quantile(1.0 - a) == doctest::Approx(-normal_quantile(a)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(normal_quantile(0.0), std::domain_error);
    CHECK_THROWS_AS(normal_quantile(1.0), std::domain_error);
}

TEST_CASE("normal cdf and upper tail are complementary") {
    for (double x : {-3.0, -0.7, 0.0, 1.2, 5.5}) {
        CHECK(normal_cdf(x) + normal_upper_tail(x) == doctest::Approx(1.0).epsilon(1e-14));
    }
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("clopper-pearson limits invert the binomial tails") {
    CHECK(cp_upper_limit(0, 1, 0.05) == doctest::Approx(0.95).epsilon(1e-10));
    struct Case {
        long k, n;
    };
    for (Case c : std::vector<Case>{{0, 10}, {3, 10}, {9, 10}, {17, 60}, {120, 200}}) {
        for (double level : {0.025, 0.1}) {
            if (c.k < c.n) {
                double u = cp_upper_limit(c.k, c.n, level);
                CHECK(binom_range_sum(0, c.k, c.n, u) == doctest::Approx(level).epsilon(1e-8));
            }
            if (c.k > 0) {
                double l = cp_lower_limit(c.k, c.n, level);
                CHECK(binom_range_sum(c.k, c.n, c.n, l) == doctest::Approx(level).epsilon(1e-8));
            }
        }
    }
}

TEST_CASE("clopper-pearson limits bracket the point estimate and grow with k") {
    long n = 40;
    double prev_u = 0.0;
    for (long k = 0; k <= n; ++k) {
        double u = k < n ? cp_upper_limit(k, n, 0.025) : 1.0;
        double l = k > 0 ? cp_lower_limit(k, n, 0.025) : 0.0;
        double phat = static_cast<double>(k) / n;
        CHECK(l <= phat + 1e-12);
        CHECK(u >= phat - 1e-12);
        CHECK(u >= prev_u - 1e-12);
        prev_u = u;
    }
}

TEST_CASE("interval family names round-trip") {
    for (CiTag t : {CiTag::wald, CiTag::revised_wald, CiTag::wilson, CiTag::clopper_pearson,
                    CiTag::fishman, CiTag::chen_massart}) {
        CHECK(ci_tag_from_name(ci_tag_name(t)) == t);
    }
    CHECK_THROWS_AS(ci_tag_from_name("nope"), std::invalid_argument);
}

TEST_CASE("confidence limits are ordered and shrink with the sample size") {
    for (CiTag t : {CiTag::wald, CiTag::revised_wald, CiTag::wilson, CiTag::clopper_pearson,
                    CiTag::fishman, CiTag::chen_massart}) {
        CiFamily fam{t, 0.025, 4.0};
        double prev_width = 2.0;
        for (long n : {20L, 80L, 320L}) {
            long k = (2 * n) / 5;
            CiLimits ci = ci_limits(fam, k, n);
            CHECK(ci.lower <= ci.upper);
            double width = ci.upper - ci.lower;
            CHECK(width < prev_width);
            prev_width = width;
        }
    }
}

TEST_CASE("clamped families stay inside the unit interval at the corners") {
    for (CiTag t : {CiTag::wilson, CiTag::clopper_pearson, CiTag::fishman, CiTag::chen_massart}) {
        CiFamily fam{t, 0.05, 4.0};
        for (long n : {5L, 50L}) {
            for (long k : {0L, n}) {
                CiLimits ci = ci_limits(fam, k, n);
                CHECK(ci.lower >= 0.0);
                CHECK(ci.upper <= 1.0);
                CHECK(ci.lower <= ci.upper);
            }
        }
    }
}

TEST_CASE("wilson interval matches its closed form") {
    double z = normal_quantile(0.05);
    for (long n : {10L, 73L, 250L}) {
        for (long k : {0L, 2L, n / 2, n}) {
            CiLimits ci = ci_limits(CiFamily{CiTag::wilson, 0.05, 4.0}, k, n);
            double phat = static_cast<double>(k) / n;
            double center = (phat + z * z / (2 * n)) / (1 + z * z / n);
            double half = z * std::sqrt(phat * (1 - phat) / n + z * z / (4.0 * n * n)) /
                          (1 + z * z / n);
            CHECK(ci.lower == doctest::Approx(center - half).epsilon(1e-12));
            CHECK(ci.upper == doctest::Approx(center + half).epsilon(1e-12));
        }
    }
}
