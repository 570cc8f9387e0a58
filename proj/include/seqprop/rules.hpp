// Stopping rules and sampling-plan construction. A plan is a strictly
// increasing schedule of cumulative sample sizes together with, per stage,
// the set of success counts at which sampling continues; the final stage
// always stops. Coverage analysis of a finished plan only needs the sizes
// and the continuation sets, so those are the plan's primary data.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "seqprop/mathkern.hpp"
#include "seqprop/numeric.hpp"

namespace seqprop {

enum class RuleFamily {
    fishman,           // large-deviation bound on the worse-case tail
    massart,           // parabolic dilation 2/3
    clopper_pearson,   // exact binomial tails at the shifted proportions
    wald,              // sample-variance threshold (parabolic dilation 0)
    double_parabolic,  // general dilation rho in [0,1]
    revised_wald,      // Wald with pseudo-count-shifted variance
    wilson,            // score-interval closed form
    inclusion,         // generic: stop when the chosen CI fits in phat +/- eps
};

const char* rule_family_name(RuleFamily f);
RuleFamily rule_family_from_name(const std::string& name);

enum class SchedulePolicy { equal_groups, fully_sequential, explicit_sizes };

const char* schedule_policy_name(SchedulePolicy p);
SchedulePolicy schedule_policy_from_name(const std::string& name);

struct DesignParams {
    Dec eps;    // margin of error, in (0, 1/2)
    Dec delta;  // confidence risk, in (0, 1)
    double rho = 0.75;  // parabolic dilation, in [0, 1]
    double zeta = 1.0;  // risk-tuning factor, zeta * delta in (0, 1)
    int stages = 1;     // ignored for fully_sequential / explicit_sizes
    RuleFamily family = RuleFamily::double_parabolic;
    SchedulePolicy policy = SchedulePolicy::equal_groups;
    std::vector<long> explicit_sizes;
    double rw_shift = 4.0;        // revised-Wald pseudo-count
    bool wald_min_start = false;  // replace the degenerate Wald minimum size
    CiTag inclusion_family = CiTag::clopper_pearson;

    static DesignParams make(const std::string& eps, const std::string& delta, double rho,
                             double zeta, int stages,
                             RuleFamily family = RuleFamily::double_parabolic,
                             SchedulePolicy policy = SchedulePolicy::equal_groups);
};

// Throws std::invalid_argument when a basic parameter constraint is broken.
void validate_params(const DesignParams& p);

// A stopping rule evaluated at cumulative count k out of n samples.
class StoppingRule {
public:
    static StoppingRule from_params(const DesignParams& p);

    // true = stop (the decision is to accept the current estimate).
    bool stops(long k, long n) const;

    // The rule in parabolic normal form, when it has one:
    // stop iff (|k/n - 1/2| - rho*eps)^2 >= 1/4 + eps^2 n / (2 log_zd).
    struct ParabolicForm {
        double rho;
        double log_zd;  // log of the effective risk level, < 0
    };
    std::optional<ParabolicForm> parabolic() const;

    double eps() const { return eps_; }

private:
    RuleFamily family_ = RuleFamily::double_parabolic;
    double eps_ = 0.0;
    double log_zd_ = 0.0;    // ln(zeta * delta)
    double rho_ = 0.0;
    double zq_ = 0.0;        // normal_quantile(zeta * delta), quantile families
    CiFamily ci_{};          // inclusion family
};

struct SizeRange {
    long n_min = 1;
    long n_max = 1;
    bool min_clamped = false;  // true when the raw minimum was < 1 (rho = 0)
};

// Smallest size at which stopping is possible and smallest size at which
// every count stops. Closed forms for the parabolic-form families, a
// definitional search for the rest.
SizeRange size_range(const DesignParams& p);
long n_min(const DesignParams& p);
long n_max(const DesignParams& p);

// Cumulative stage sizes for the requested policy. Equal-groups schedules
// interpolate between the unrounded size extremes and round each stage up,
// which keeps stage 1 and stage s at the extremes' ceilings.
std::vector<long> schedule(const DesignParams& p);

struct KInterval {
    long lo = 0;
    long hi = -1;  // inclusive; empty when hi < lo
};

struct SamplingPlan {
    DesignParams params;
    std::vector<long> sizes;                       // n_1 < ... < n_s
    std::vector<std::vector<KInterval>> cont;      // continuation sets; cont[s-1] empty
    long n_min = 1;
    long n_max = 1;
    bool min_clamped = false;
    bool symmetric = false;  // every continuation set invariant under k <-> n-k

    int stage_count() const { return static_cast<int>(sizes.size()); }
    bool continues(int stage, long k) const;  // stage is 0-based
    long group_size(int stage) const { return stage == 0 ? sizes[0] : sizes[stage] - sizes[stage - 1]; }

    // Assemble a plan from explicit parts (used by file loading and tests).
    // Validates monotone sizes, in-range intervals, and an empty final set.
    static SamplingPlan from_parts(DesignParams params, std::vector<long> sizes,
                                   std::vector<std::vector<KInterval>> cont);
};

// Builds the full plan for the given parameters: schedule, continuation
// sets, and symmetry. Throws if the final stage fails to stop everywhere.
SamplingPlan materialize(const DesignParams& p);

// Continuation set of the rule at sample size n, as sorted disjoint
// inclusive intervals of counts.
std::vector<KInterval> continuation_set(const StoppingRule& rule, long n);

}  // namespace seqprop
