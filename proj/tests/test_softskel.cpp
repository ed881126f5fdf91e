#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bel/morphology.hpp"
#include "bel/phantom.hpp"
#include "bel/softskel.hpp"
#include "oracles.hpp"

using namespace bel;

namespace {

BinaryMask support(const RealVolume& v) {
    BinaryMask m = BinaryMask::like(v);
    for (std::int64_t i = 0; i < v.size(); ++i) m[i] = v[i] > 0.0;
    return m;
}

PhantomTruth straight_tube(double radius) {
    TreeSpec s;
    s.depth = 0;
    s.root_radius = radius;
    s.root_length = 20;
    s.dims = {24, 24, 32};
    return generate(s);
}

}  // namespace

TEST_CASE("soft pools match the per-voxel scan") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const RealVolume x = oracle::random_real(rng, {8, 8, 8});
        CHECK(soft_erode(x) == oracle::min6(x));
        CHECK(soft_dilate(x) == oracle::max6(x));
        const RealVolume lo = soft_erode(x), hi = soft_dilate(x);
        for (std::int64_t i = 0; i < x.size(); ++i) {
            CHECK(lo[i] <= x[i]);
            CHECK(x[i] <= hi[i]);
        }
    }
}

TEST_CASE("soft pools on constant and empty volumes") {
    const RealVolume ones(Dims{4, 4, 4}, 1.0);
    const RealVolume e = soft_erode(ones);
    CHECK(e.at(1, 2, 1) == 1.0);
    CHECK(e.at(0, 2, 1) == 0.0);
    CHECK(e.at(3, 3, 3) == 0.0);
    const RealVolume zeros(Dims{4, 4, 4}, 0.0);
    CHECK(soft_dilate(zeros) == zeros);
}

TEST_CASE("soft pools on binary input equal discrete cross morphology") {
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 30; ++trial) {
        const BinaryMask m = oracle::random_mask(rng, oracle::random_dims(rng, 1, 10), 0.6);
        CHECK(soft_erode(to_real(m)) == to_real(erode(m)));
        CHECK(soft_dilate(to_real(m)) == to_real(dilate(m)));
    }
}

TEST_CASE("soft skeleton basics") {
    RealVolume line(Dims{9, 9, 9});
    for (int z = 1; z < 8; ++z) line.at(4, 4, z) = 1.0;
    CHECK(soft_skel(line, 3) == line);
    const RealVolume zeros(Dims{5, 5, 5});
    CHECK(soft_skel(zeros) == zeros);
    CHECK_THROWS_AS(soft_skel(line, 0), ParameterError);

    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 10; ++trial) {
        RealVolume x = oracle::random_real(rng, {8, 8, 8});
        for (std::int64_t i = 0; i < x.size(); i += 3) x[i] = 0.0;
        const RealVolume s = soft_skel(x, 4);
        for (std::int64_t i = 0; i < x.size(); ++i) {
            CHECK(s[i] >= 0.0);
            CHECK(s[i] <= 1.0);
            if (x[i] == 0.0) CHECK(s[i] == 0.0);
        }
    }
}

TEST_CASE("soft skeleton of a radius-3 tube is a thin core along the axis") {
    const PhantomTruth t = straight_tube(3.0);
    const RealVolume s = soft_skel(to_real(t.mask), 5);
    const BinaryMask core = support(s);
    CHECK(is_subset(core, t.mask));
    CHECK(count_foreground(core) < count_foreground(t.mask) / 4);
    CHECK(connected_components(core).count == 1);
    // every axis voxel away from the caps has core within one voxel
    const auto& axis = t.branches[0].centerline;
    for (std::size_t k = 3; k + 3 < axis.size(); ++k) {
        const auto [x, y, z] = t.mask.coords(axis[k]);
        bool near = false;
        for (int dz = -1; dz <= 1; ++dz)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) near |= core.at(x + dx, y + dy, z + dz) != 0;
        CHECK(near);
    }
}

TEST_CASE("breakage map") {
    const PhantomTruth t = straight_tube(2.0);
    CHECK(count_foreground(support(breakage_map(t.mask, to_real(t.mask)))) == 0);

    CHECK_THROWS_AS(breakage_map(t.mask, RealVolume(Dims{3, 3, 3})), ParameterError);

    BinaryMask line(Dims{7, 7, 7});
    for (int x = 1; x < 6; ++x) line.at(x, 3, 3) = 1;
    CHECK(breakage_map(line, RealVolume::like(line)) == to_real(line));

    // everything the prediction covers after skeletonization gives no breakage
    std::mt19937_64 rng(34);
    for (int trial = 0; trial < 10; ++trial) {
        const BinaryMask g = oracle::random_mask(rng, {8, 8, 8}, 0.5);
        const RealVolume b = breakage_map(g, oracle::random_real(rng, {8, 8, 8}));
        for (std::int64_t i = 0; i < b.size(); ++i) {
            CHECK(b[i] >= 0.0);
            CHECK(b[i] <= 1.0);
        }
    }
}

TEST_CASE("breakage of a phantom with one erased branch stays near that branch") {
    TreeSpec s;
    s.depth = 2;
    s.dims = {80, 80, 80};
    s.root_length = 20;
    const PhantomTruth t = generate(s);
    const std::int32_t id = 4;
    const Degradation d = break_branch(t, id, 1e9);
    const RealVolume b = breakage_map(t.mask, to_real(d.mask));
    BinaryMask erased = mask_and_not(t.mask, d.mask);
    const BinaryMask near = dilate(dilate(erased, StructuringElement::cube26), StructuringElement::cube26);
    std::int64_t positive = 0;
    for (std::int64_t i = 0; i < b.size(); ++i)
        if (b[i] > 0.0) {
            ++positive;
            CHECK(near[i] == 1);
        }
    CHECK(positive > 0);
}
