// Exact evaluation of a sampling plan's operating characteristics at a fixed
// success probability: the stopping distribution, the complementary coverage
// probability (ccp), stopped-proportion tails, interval ccp bounds, and the
// sample-number distribution. All results come from one forward recursion
// over the plan's stages; nothing here is a normal approximation.
//
// Knife-edge conventions: the event |phat - p| = eps counts as non-coverage,
// and tail events use closed inequalities (phat <= x, phat >= x). When both
// p and eps carry exact rational forms the classification is decided in
// integer arithmetic; otherwise it is a strict double comparison.
#pragma once

#include <utility>
#include <vector>

#include "seqprop/rules.hpp"

namespace seqprop {

struct StageDistribution {
    double p = 0.0;
    // Per stage: stopped atoms (count, mass), counts ascending.
    std::vector<std::vector<std::pair<long, double>>> stopped;
    std::vector<double> stage_mass;  // total mass stopping at each stage
    double stopped_total = 0.0;      // should be 1 up to truncation
    double truncated_mass = 0.0;     // mass dropped below the underflow floor
};

StageDistribution stopping_distribution(const SamplingPlan& plan, const Prob& p);

// P(|phat - p| >= eps) at the stopped proportion phat; accumulated directly
// from the stopped atoms. coverage() is its complement.
double ccp(const SamplingPlan& plan, const Prob& p);
double coverage(const SamplingPlan& plan, const Prob& p);

// P(phat <= x | p) and P(phat >= x | p) over the stopped proportion.
double tail_low(const SamplingPlan& plan, const Prob& x, const Prob& p);
double tail_high(const SamplingPlan& plan, const Prob& x, const Prob& p);

// Batched tails against a single distribution evaluation at p.
struct TailQuery {
    bool low = true;  // true: phat <= x, false: phat >= x
    Prob x;
    double result = 0.0;
};
void stopped_tails(const SamplingPlan& plan, const Prob& p, std::vector<TailQuery>& queries);

struct CcpBounds {
    double lower = 0.0;
    double upper = 1.0;
};

// Bounds valid for every p in [a, b], from the monotonicity of the two
// non-coverage tails in p. Two distribution evaluations (at a and at b).
CcpBounds ccp_bounds(const SamplingPlan& plan, const Prob& a, const Prob& b);

// Distribution of the total sample size at stopping, and its mean.
std::vector<std::pair<long, double>> sample_number_distribution(const SamplingPlan& plan,
                                                                const Prob& p);
double asn(const SamplingPlan& plan, const Prob& p);

// Sorted candidate jump points of p -> ccp(p): every k/n +/- eps that lands
// in (0, 1), over all stage sizes n and counts k.
std::vector<double> discontinuity_set(const SamplingPlan& plan);

}  // namespace seqprop
