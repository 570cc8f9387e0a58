#include "seqprop/conduct.hpp"

#include <stdexcept>
#include <string>
#include <utility>

namespace seqprop {

ConductState::ConductState(SamplingPlan plan) : plan_(std::move(plan)) {}

int ConductState::next_stage() const {
    if (stopped_) throw std::logic_error("sampling already stopped");
    return stage_;
}

long ConductState::next_group_size() const {
    if (stopped_) throw std::logic_error("sampling already stopped");
    return plan_.group_size(stage_);
}

ConductState::StepResult ConductState::advance(long group_successes) {
    if (stopped_) throw std::logic_error("sampling already stopped; no further groups accepted");
    long g = plan_.group_size(stage_);
    if (group_successes < 0 || group_successes > g) {
        throw std::invalid_argument("group successes " + std::to_string(group_successes) +
                                    " outside [0, " + std::to_string(g) + "]");
    }
    k_ += group_successes;
    n_ = plan_.sizes[stage_];
    stopped_ = !plan_.continues(stage_, k_);
    StepResult r{stage_, g, k_, n_, stopped_};
    ++stage_;
    return r;
}

double ConductState::estimate() const {
    if (!stopped_) throw std::logic_error("sampling still in progress");
    return static_cast<double>(k_) / static_cast<double>(n_);
}

}  // namespace seqprop
