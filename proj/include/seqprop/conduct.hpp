// Stage-by-stage execution of a sampling plan: feed each stage's observed
// group success count, get back the stop/continue decision and the running
// totals. Refuses out-of-range counts and any input after stopping.
#pragma once

#include "seqprop/rules.hpp"

namespace seqprop {

class ConductState {
public:
    explicit ConductState(SamplingPlan plan);

    bool stopped() const { return stopped_; }
    int next_stage() const;        // 0-based stage awaiting its group
    long next_group_size() const;
    long successes() const { return k_; }
    long samples() const { return n_; }

    struct StepResult {
        int stage = 0;        // 0-based stage just completed
        long group = 0;       // samples taken in this group
        long successes = 0;   // cumulative
        long samples = 0;     // cumulative
        bool stopped = false;
    };
    StepResult advance(long group_successes);

    double estimate() const;  // phat at stopping time

private:
    SamplingPlan plan_;
    int stage_ = 0;
    long k_ = 0;
    long n_ = 0;
    bool stopped_ = false;
};

}  // namespace seqprop
