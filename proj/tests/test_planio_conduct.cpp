#include <cstdio>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "seqprop/conduct.hpp"
#include "seqprop/plan_io.hpp"

using namespace seqprop;

namespace {

SamplingPlan seven_stage() {
    return materialize(DesignParams::make("0.05", "0.05", 0.75, 2.6759, 7));
}

Provenance full_provenance() {
    Provenance prov;
    prov.tool = tool_id();
    prov.tuning = TuningRecord{2.6759, 1e-3, 0x9e3779b97f4a7c15ULL};
    prov.verification = VerificationRecord{"guaranteed", "bnb", 1e-10, "verified during tuning"};
    return prov;
}

}  // namespace

TEST_CASE("serialization round-trips byte for byte") {
    SamplingPlan plan = seven_stage();
    std::string text = serialize_plan(plan, full_provenance());
    LoadedPlan back = parse_plan(text);
    CHECK(serialize_plan(back.plan, back.provenance) == text);

    CHECK(back.plan.sizes == plan.sizes);
    CHECK(back.plan.n_min == plan.n_min);
    CHECK(back.plan.n_max == plan.n_max);
    CHECK(back.plan.min_clamped == plan.min_clamped);
    CHECK(back.plan.symmetric == plan.symmetric);
    CHECK(back.plan.params.eps.text() == "0.05");
    CHECK(back.plan.params.delta.text() == "0.05");
    CHECK(back.plan.params.zeta == plan.params.zeta);
    REQUIRE(back.plan.cont.size() == plan.cont.size());
    for (size_t i = 0; i < plan.cont.size(); ++i) {
        REQUIRE(back.plan.cont[i].size() == plan.cont[i].size());
        for (size_t j = 0; j < plan.cont[i].size(); ++j) {
            CHECK(back.plan.cont[i][j].lo == plan.cont[i][j].lo);
            CHECK(back.plan.cont[i][j].hi == plan.cont[i][j].hi);
        }
    }
    REQUIRE(back.provenance.tuning.has_value());
    CHECK(back.provenance.tuning->zeta_star == 2.6759);
    CHECK(back.provenance.tuning->rel_tol == 1e-3);
    CHECK(back.provenance.tuning->trace_hash == 0x9e3779b97f4a7c15ULL);
    REQUIRE(back.provenance.verification.has_value());
    CHECK(back.provenance.verification->verdict == "guaranteed");
    CHECK(back.provenance.verification->method == "bnb");
    CHECK(back.provenance.verification->eta == 1e-10);
    CHECK(back.provenance.verification->note == "verified during tuning");
}

TEST_CASE("provenance records are optional") {
    SamplingPlan plan = seven_stage();
    Provenance bare;
    bare.tool = tool_id();
    LoadedPlan back = parse_plan(serialize_plan(plan, bare));
    CHECK(!back.provenance.tuning.has_value());
    CHECK(!back.provenance.verification.has_value());
    CHECK(back.provenance.tool == tool_id());
}

TEST_CASE("exact decimal parameters survive the file format verbatim") {
    DesignParams p = DesignParams::make("1e-1", "0.050", 0.75, 2.4174, 3);
    SamplingPlan plan = materialize(p);
    LoadedPlan back = parse_plan(serialize_plan(plan, Provenance{tool_id(), {}, {}}));
    CHECK(back.plan.params.eps.text() == "1e-1");
    CHECK(back.plan.params.delta.text() == "0.050");
    REQUIRE(back.plan.params.eps.has_exact());
    CHECK(*back.plan.params.eps.rat() == Rat::make(1, 10));
}

TEST_CASE("tampered plan files are rejected") {
    SamplingPlan plan = seven_stage();
    REQUIRE(plan.symmetric);
    std::string text = serialize_plan(plan, Provenance{tool_id(), {}, {}});

    std::string flipped = text;
    size_t pos = flipped.find("\"symmetric\": true");
    REQUIRE(pos != std::string::npos);
    flipped.replace(pos, 17, "\"symmetric\": false");
    CHECK_THROWS_AS(parse_plan(flipped), std::runtime_error);

    std::string wrong_schema = text;
    pos = wrong_schema.find("\"schema_version\": 1");
    REQUIRE(pos != std::string::npos);
    wrong_schema.replace(pos, 19, "\"schema_version\": 9");
    CHECK_THROWS_AS(parse_plan(wrong_schema), std::runtime_error);

    CHECK_THROWS(parse_plan("not json at all"));
}

TEST_CASE("plan files round-trip through disk under the advisory lock") {
    SamplingPlan plan = seven_stage();
    std::string path = "/tmp/seqprop_test_plan.json";
    save_plan(path, plan, full_provenance());
    LoadedPlan back = load_plan(path);
    CHECK(back.plan.sizes == plan.sizes);
    CHECK(serialize_plan(back.plan, back.provenance) ==
          serialize_plan(plan, full_provenance()));
    // Saving over an existing file replaces it cleanly.
    save_plan(path, plan, full_provenance());
    CHECK(load_plan(path).plan.sizes == plan.sizes);
    std::remove(path.c_str());
    CHECK_THROWS(load_plan(path));
}

TEST_CASE("replaying group counts walks the plan to its stopping stage") {
    ConductState st(seven_stage());
    CHECK(!st.stopped());
    CHECK(st.next_stage() == 0);
    CHECK(st.next_group_size() == 59);

    long groups[] = {12, 5, 14, 15, 6};
    long want_k[] = {12, 17, 31, 46, 52};
    long want_n[] = {59, 116, 173, 231, 288};
    for (int i = 0; i < 5; ++i) {
        auto r = st.advance(groups[i]);
        CHECK(r.stage == i);
        CHECK(r.successes == want_k[i]);
        CHECK(r.samples == want_n[i]);
        CHECK(r.stopped == (i == 4));
    }
    CHECK(st.stopped());
    CHECK(st.successes() == 52);
    CHECK(st.samples() == 288);
    CHECK(st.estimate() == doctest::Approx(52.0 / 288.0).epsilon(1e-15));
}

TEST_CASE("conduct refuses out-of-range and post-stop input") {
    ConductState st(seven_stage());
    CHECK_THROWS_AS(st.estimate(), std::logic_error);
    CHECK_THROWS_AS(st.advance(-1), std::invalid_argument);
    CHECK_THROWS_AS(st.advance(60), std::invalid_argument);  // group is 59

    // Stop immediately: 0 successes at stage 1 falls outside [1, 58].
    auto r = st.advance(0);
    CHECK(r.stopped);
    CHECK(st.stopped());
    CHECK(st.estimate() == 0.0);
    CHECK_THROWS_AS(st.advance(3), std::logic_error);
    CHECK_THROWS_AS(st.next_stage(), std::logic_error);
    CHECK_THROWS_AS(st.next_group_size(), std::logic_error);
}

TEST_CASE("a run that never stops early uses every stage") {
    SamplingPlan plan = seven_stage();
    ConductState st(plan);
    // Stay at the center of each continuation band.
    long prev = 0;
    for (int i = 0; i < plan.stage_count() && !st.stopped(); ++i) {
        long target = plan.sizes[i] / 2;
        long g = target - prev;
        auto r = st.advance(g);
        prev = r.successes;
        if (i + 1 < plan.stage_count()) CHECK(!r.stopped);
    }
    CHECK(st.stopped());
    CHECK(st.samples() == plan.sizes.back());
}