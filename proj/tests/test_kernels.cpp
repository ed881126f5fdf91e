#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <omp.h>

#include <cstring>

#include "bel/kernels/kernels.hpp"
#include "oracles.hpp"

using namespace bel;
namespace k = bel::kernels;

namespace {

template <class T>
bool bit_equal(const Volume3<T>& a, const Volume3<T>& b) {
    return a.dims() == b.dims() &&
           std::memcmp(a.values().data(), b.values().data(), sizeof(T) * static_cast<std::size_t>(a.size())) == 0;
}

bool sums_equal(const k::LossSums& a, const k::LossSums& b) {
    return std::memcmp(&a, &b, sizeof a) == 0;
}

const int kThreads[] = {1, 2, 3, 7};

}  // namespace

TEST_CASE("stencils: serial matches the per-voxel oracle, omp matches serial bit for bit") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 30; ++trial) {
        const Dims d = oracle::random_dims(rng, 1, 14);
        const BinaryMask m = oracle::random_mask(rng, d, 0.6);
        const RealVolume x = oracle::random_real(rng, d);
        for (auto st : {k::Stencil::cross6, k::Stencil::cube26}) {
            const bool cube = st == k::Stencil::cube26;
            const BinaryMask e = k::serial::erode(m, st), dl = k::serial::dilate(m, st);
            REQUIRE(e == oracle::erode(m, cube));
            REQUIRE(dl == oracle::dilate(m, cube));
            for (int t : kThreads) {
                omp_set_num_threads(t);
                CHECK(k::omp::erode(m, st) == e);
                CHECK(k::omp::dilate(m, st) == dl);
            }
        }
        const RealVolume lo = k::serial::min_pool6(x), hi = k::serial::max_pool6(x);
        REQUIRE(bit_equal(lo, oracle::min6(x)));
        REQUIRE(bit_equal(hi, oracle::max6(x)));
        for (int t : kThreads) {
            omp_set_num_threads(t);
            CHECK(bit_equal(k::omp::min_pool6(x), lo));
            CHECK(bit_equal(k::omp::max_pool6(x), hi));
        }
    }
}

TEST_CASE("labeled distance transform: serial and omp agree") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 30; ++trial) {
        const Dims d = oracle::random_dims(rng, 1, 16);
        LabelVolume seeds(d);
        std::bernoulli_distribution coin(0.08);
        std::uniform_int_distribution<int> lab(1, 5);
        for (std::int64_t i = 0; i < seeds.size(); ++i)
            if (coin(rng)) seeds[i] = lab(rng);
        const std::array<double, 3> w = trial % 2 ? std::array<double, 3>{1.0, 1.0, 1.0}
                                                  : std::array<double, 3>{0.25, 1.0, 6.25};
        const auto ref = k::serial::labeled_sqdist(seeds, w);
        for (int t : kThreads) {
            omp_set_num_threads(t);
            const auto got = k::omp::labeled_sqdist(seeds, w);
            CHECK(bit_equal(got.sqdist, ref.sqdist));
            CHECK(got.nearest == ref.nearest);
        }
    }
}

TEST_CASE("nearest labels are the smallest among equidistant seeds") {
    LabelVolume seeds(Dims{5, 1, 1});
    seeds[0] = 4;
    seeds[4] = 2;
    const auto r = k::serial::labeled_sqdist(seeds, {1.0, 1.0, 1.0});
    CHECK(r.sqdist[2] == 4.0);
    CHECK(r.nearest[2] == 2);
    CHECK(r.nearest[1] == 4);
    CHECK(r.nearest[3] == 2);

    // brute force on random label fields
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 40; ++trial) {
        const Dims d = oracle::random_dims(rng, 1, 7);
        LabelVolume s(d);
        std::bernoulli_distribution coin(0.2);
        std::uniform_int_distribution<int> lab(1, 4);
        for (std::int64_t i = 0; i < s.size(); ++i)
            if (coin(rng)) s[i] = lab(rng);
        const auto got = k::omp::labeled_sqdist(s, {1.0, 1.0, 1.0});
        for (std::int64_t i = 0; i < s.size(); ++i) {
            const auto a = s.coords(i);
            double best = std::numeric_limits<double>::infinity();
            int best_lab = 0;
            for (std::int64_t j = 0; j < s.size(); ++j) {
                if (!s[j]) continue;
                const auto b = s.coords(j);
                const double dd = double((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) +
                                         (a[2] - b[2]) * (a[2] - b[2]));
                if (dd < best || (dd == best && s[j] < best_lab)) {
                    best = dd;
                    best_lab = s[j];
                }
            }
            REQUIRE(got.sqdist[i] == best);
            if (best_lab) REQUIRE(got.nearest[i] == best_lab);
        }
    }
}

TEST_CASE("loss sums are independent of the thread count") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const Dims d = trial < 10 ? oracle::random_dims(rng, 1, 12) : Dims{40, 37, 23};
        const RealVolume p = oracle::random_real(rng, d);
        const BinaryMask g = oracle::random_mask(rng, d, 0.3);
        const RealVolume w = oracle::random_real(rng, d, 0.25, 1.05);
        k::LossSumArgs a;
        a.p = p.values();
        a.g = g.values();
        if (trial % 2) a.w = w.values();
        a.r = 0.7;
        a.alpha = 0.2;
        a.beta = 0.8;
        const auto ref = k::serial::loss_sums(a);
        const auto lin = oracle::loss_sums(p, g, trial % 2 ? &w : nullptr, 0.7, 0.2, 0.8);
        CHECK(oracle::rel_err(ref.numerator, lin.num) < 1e-12);
        CHECK(oracle::rel_err(ref.denominator, lin.den) < 1e-12);
        for (int t : kThreads) {
            omp_set_num_threads(t);
            CHECK(sums_equal(k::omp::loss_sums(a), ref));
        }
    }
}

TEST_CASE("lower envelope of a single sample") {
    const double f[4] = {std::numeric_limits<double>::infinity(), 0.0, std::numeric_limits<double>::infinity(),
                         std::numeric_limits<double>::infinity()};
    const std::int32_t lab[4] = {0, 9, 0, 0};
    double d[4];
    std::int32_t out[4];
    k::EnvelopeScratch s;
    k::lower_envelope(4, 1.0, f, lab, d, out, s);
    CHECK(d[0] == 1.0);
    CHECK(d[1] == 0.0);
    CHECK(d[3] == 4.0);
    CHECK(out[3] == 9);
}
