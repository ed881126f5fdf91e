#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bel/metrics.hpp"
#include "bel/phantom.hpp"

using namespace bel;

TEST_CASE("branch counts and radii") {
    TreeSpec s;
    s.depth = 0;
    CHECK(generate(s).branches.size() == 1);
    s.depth = 2;
    CHECK(generate(s).branches.size() == 7);
    s.depth = 3;
    const PhantomTruth t = generate(s);
    REQUIRE(t.branches.size() == 15);
    for (const auto& b : t.branches) {
        CHECK(b.generation == (b.id == 0 ? 0 : t.branches[b.parent].generation + 1));
        CHECK(b.radius >= 1.0);
        if (b.generation == 3) {
            CHECK(std::abs(b.radius - 4.0 * 0.75 * 0.75 * 0.75) <= 1e-12);
            CHECK(b.owned_voxels > 0);
        }
    }
    // the root enters from the +z side
    CHECK(t.branches[0].start[2] > t.branches[0].end[2]);
}

TEST_CASE("determinism") {
    TreeSpec s;
    s.seed = 17;
    const PhantomTruth a = generate(s), b = generate(s);
    CHECK(a.mask == b.mask);
    CHECK(a.centerline == b.centerline);
    CHECK(a.owner == b.owner);
    CHECK(truth_to_json(a).dump() == truth_to_json(b).dump());
    s.seed = 18;
    CHECK_FALSE(generate(s).mask == a.mask);
}

TEST_CASE("truth bookkeeping") {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        TreeSpec s;
        s.seed = seed;
        const PhantomTruth t = generate(s);
        CHECK(is_subset(t.centerline, t.mask));
        std::int64_t per_branch = 0, owned = 0;
        for (const auto& b : t.branches) {
            per_branch += static_cast<std::int64_t>(b.centerline.size());
            owned += b.owned_voxels;
        }
        CHECK(per_branch == t.total_centerline());
        CHECK(count_foreground(t.centerline) == t.total_centerline());
        CHECK(owned == count_foreground(t.mask));
        for (std::int64_t i = 0; i < t.mask.size(); ++i)
            REQUIRE((t.owner[i] > 0) == (t.mask[i] != 0));
        CHECK(t.graph().centerline() == t.centerline);
        CHECK(t.graph().branches.size() == t.branches.size());
    }
}

TEST_CASE("tree that leaves the grid names the branch") {
    TreeSpec s;
    s.dims = {40, 40, 40};
    try {
        generate(s);
        FAIL("expected ParameterError");
    } catch (const ParameterError& e) {
        CHECK(std::string(e.what()).find("branch") != std::string::npos);
    }
    TreeSpec bad;
    bad.radius_decay = 1.5;
    CHECK_THROWS_AS(generate(bad), ParameterError);
}

TEST_CASE("spec json round trip") {
    TreeSpec s;
    s.depth = 2;
    s.seed = 99;
    s.branching_angle = 75.0;
    s.spacing = {0.5, 0.5, 0.8};
    const TreeSpec r = tree_spec_from_json(tree_spec_to_json(s));
    CHECK(tree_spec_to_json(r) == tree_spec_to_json(s));
    CHECK(r.seed == 99);
    CHECK(r.spacing.sz == 0.8);
    CHECK(tree_spec_from_json(nlohmann::json::object()).depth == TreeSpec{}.depth);
    CHECK_THROWS_AS(tree_spec_from_json(nlohmann::json{{"depth", "three"}}), ParameterError);
}

TEST_CASE("break_branch") {
    const PhantomTruth t = generate(TreeSpec{});
    const double L = static_cast<double>(t.total_centerline());
    EvalOptions o;
    o.lcc = false;
    const SkeletonGraph g = t.graph();

    const Degradation none = break_branch(t, 3, 0.0);
    CHECK(none.mask == t.mask);
    CHECK(none.removed_voxels == 0);

    // generation-1 branches are about 19 voxels long
    const Degradation gap = break_branch(t, 1, 5.0);
    CHECK(gap.removed_voxels > 0);
    CHECK_FALSE(gap.erased_centerline.empty());
    CHECK(count_foreground(t.mask) - count_foreground(gap.mask) == gap.removed_voxels);
    const MetricsReport r = evaluate(gap.mask, t.mask, g, o);
    CHECK(r.dlr == doctest::Approx(1.0 - double(gap.erased_centerline.size()) / L).epsilon(1e-15));
    CHECK(r.counts.fn == gap.removed_voxels);

    const Degradation whole = break_branch(t, 10, 1e9);
    const MetricsReport w = evaluate(whole.mask, t.mask, g, o);
    CHECK(w.dbr == doctest::Approx(14.0 / 15.0).epsilon(1e-15));
    for (auto v : whole.erased_centerline) CHECK(t.centerline[v] == 1);

    CHECK_THROWS_AS(break_branch(t, 15, 2.0), ParameterError);
}

TEST_CASE("add_leak") {
    const PhantomTruth t = generate(TreeSpec{});
    const Index3 c = leak_site(t, 5);
    CHECK(t.mask.contains(c[0], c[1], c[2]));
    CHECK(add_leak(t, c, 0.0).mask == t.mask);

    const Degradation d = add_leak(t, c, 3.0);
    CHECK(d.added_voxels > 0);
    EvalOptions o;
    o.lcc = false;
    const SkeletonGraph g = t.graph();
    const MetricsReport base = evaluate(t.mask, t.mask, g, o);
    const MetricsReport r = evaluate(d.mask, t.mask, g, o);
    CHECK(r.counts.fp - base.counts.fp == d.added_voxels);
    const double gt_volume = double(count_foreground(t.mask));
    CHECK(r.leakage - base.leakage == doctest::Approx(double(d.added_voxels) / gt_volume).epsilon(1e-15));
    CHECK(r.dlr == 1.0);

    CHECK_THROWS_AS(add_leak(t, c, -1.0), ParameterError);
}

TEST_CASE("truth json") {
    const PhantomTruth t = generate(TreeSpec{});
    const nlohmann::json j = truth_to_json(t);
    CHECK(j["tubes"].size() == 15);
    CHECK(j["branches"].size() == 15);
    CHECK(j["total_centerline_voxels"] == t.total_centerline());
    CHECK(j["spec"]["depth"] == 3);
}
