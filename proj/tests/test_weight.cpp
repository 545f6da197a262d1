#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "morreylab/corpus.hpp"
#include "morreylab/weight.hpp"

using namespace morreylab;

namespace {
Domain lab(int N = 4096) { return Domain(1, 8.0, N); }
} // namespace

TEST_CASE("weight construction validates parameters") {
    CHECK_THROWS_AS(Weight::constant(0.0), param_error);
    CHECK_THROWS_AS(Weight::power(-1.0, 1), param_error);
    CHECK_THROWS_AS(Weight::power(-2.5, 2), param_error);
    CHECK_NOTHROW(Weight::power(-0.9, 1));
    Domain d(1, 1.0, 64);
    GridFunction bad(d);
    CHECK_THROWS_AS(Weight::grid(bad), param_error); // zeros not allowed
}

TEST_CASE("weight_measure closed-form examples") {
    Domain d = lab();
    const DyadicCube unit = DyadicCube::half_open(0, 0); // [0,1)
    const DyadicCube sym = DyadicCube::closed(0, 0);     // [-1,1]

    CHECK(weight_measure(Weight::constant(1.0), d, sym) == Catch::Approx(2.0).margin(1e-12));

    const Weight w = Weight::power(0.5, 1);
    CHECK(weight_measure(w, d, unit) == Catch::Approx(2.0 / 3.0).margin(1e-3));
    CHECK(weight_measure(w, d, sym) == Catch::Approx(4.0 / 3.0).margin(1e-3));

    // w not in L_1 proxy: measure strictly increasing in L, ratio away from 1
    double prev = 0;
    for (double L : {2.0, 4.0, 8.0}) {
        Domain dl(1, L, 1024);
        const double m = weight_measure(w, dl);
        if (prev > 0) CHECK(m / prev > 1.5);
        CHECK(m > prev);
        prev = m;
    }
}

TEST_CASE("exact singular cells matter for power weights") {
    Domain d = lab(1024);
    const Weight exact = Weight::power(-0.5, 1, true);
    const Weight mid = Weight::power(-0.5, 1, false);
    const DyadicCube q = DyadicCube::half_open(3, 0); // [0, 1/8)
    const double oracle = 2.0 * std::sqrt(1.0 / 8.0);
    const double err_exact = std::fabs(weight_measure(exact, d, q) - oracle);
    const double err_mid = std::fabs(weight_measure(mid, d, q) - oracle);
    CHECK(err_exact < err_mid / 5.0);
}

TEST_CASE("ap_constant is exactly 1 for the Lebesgue weight") {
    Domain d = lab();
    auto fam = enumerate_cubes(d, -3, 6);
    for (double p : {1.5, 2.0, 3.0}) {
        const auto est = ap_constant(Weight::constant(1.0), p, fam);
        CHECK(est.value == 1.0);
        CHECK(!est.overflow);
    }
}

TEST_CASE("ap_constant of |x|^{1/2} at p=2 stabilizes under family refinement") {
    Domain d = lab();
    const Weight w = Weight::power(0.5, 1);
    std::vector<double> vals;
    for (int jm : {5, 6, 7}) vals.push_back(ap_constant(w, 2.0, enumerate_cubes(d, -2, jm)).value);
    CHECK(vals[0] >= 1.0);
    CHECK(std::fabs(vals[1] / vals[0] - 1.0) < 0.02);
    CHECK(std::fabs(vals[2] / vals[1] - 1.0) < 0.02);
    // continuum supremum for this weight over origin cubes is 4/3
    CHECK(vals[2] == Catch::Approx(4.0 / 3.0).margin(0.01));

    // dense oracle dominates the dyadic lower estimate
    const double dense = ap_constant_dense(w, 2.0, Domain(1, 8.0, 1024));
    const double dyad = ap_constant(w, 2.0, enumerate_cubes(Domain(1, 8.0, 1024), -2, 5)).value;
    CHECK(dyad <= dense * (1.0 + 1e-9));
    CHECK(dense <= 4.0 * dyad);
}

TEST_CASE("ap_constant of |x|^{3/2} at p=2 grows under family refinement") {
    Domain d = lab();
    const Weight w = Weight::power(1.5, 1);
    CHECK_FALSE(w.dual(2.0).integrable());
    std::vector<double> vals;
    for (int jm : {5, 6, 7}) vals.push_back(ap_constant(w, 2.0, enumerate_cubes(d, -3, jm)).value);
    CHECK(vals[1] > vals[0]);
    CHECK(vals[2] > vals[1]);
    // rate approaches 2^{alpha - p + 1} = sqrt(2) from above
    CHECK(vals[1] / vals[0] >= 1.25);
    CHECK(vals[2] / vals[1] >= 1.25);
    const auto est = ap_constant(w, 2.0, enumerate_cubes(d, -3, 7));
    CHECK(est.dual_nonintegrable);
}

TEST_CASE("ap_constant >= 1 for arbitrary positive grid weights") {
    Domain d(1, 2.0, 256);
    auto fam = enumerate_cubes(d, -1, 4);
    for (std::uint64_t seed : {7ull, 8ull, 9ull, 10ull, 11ull}) {
        Rng rng(seed);
        GridFunction g(d);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = 0.1 + rng.uniform(0.0, 5.0);
        for (double p : {1.5, 2.0, 3.0})
            CHECK(ap_constant(Weight::grid(g), p, fam).value >= 1.0 - 1e-12);
    }
}

TEST_CASE("ap_constant is monotone as the family grows") {
    Domain d = lab(1024);
    const Weight w = Weight::power(0.5, 1);
    double prev = 0;
    for (int jm : {3, 4, 5, 6}) {
        const double v = ap_constant(w, 2.0, enumerate_cubes(d, -2, jm)).value;
        CHECK(v >= prev - 1e-12);
        prev = v;
    }
}

TEST_CASE("dual weights: constants, exponents, involution") {
    const Weight one = Weight::constant(1.0);
    CHECK(weight_measure(one.dual(2.0), lab(256), DyadicCube::closed(0, 0)) ==
          Catch::Approx(2.0).margin(1e-12));

    const Weight w = Weight::power(0.5, 1);
    const Weight dw = w.dual(2.0); // |x|^{-1/2}
    CHECK(dw.power_exponent() == Catch::Approx(-0.5));
    CHECK(dw.integrable());

    // involution at general p: exponent alpha (1-p')(1-p) = alpha
    const double p = 1.7;
    const Weight back = w.dual(p).dual(p / (p - 1.0));
    CHECK(back.power_exponent() == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("doubling check: Lebesgue halving and the antiderivative oracle") {
    Domain d = lab();
    const DyadicCube Q = DyadicCube::half_open(0, 0); // [0,1)
    const DyadicCube S = DyadicCube::half_open(1, 0); // [0,1/2)
    {
        const auto rep = check_doubling(Weight::constant(1.0), d, Q, S, 2.0, 1.0);
        CHECK(rep.left == Catch::Approx(2.0).margin(1e-12));
        CHECK(rep.pass);
    }
    {
        const Weight w = Weight::power(0.5, 1);
        const double c = ap_constant(w, 2.0, enumerate_cubes(d, -2, 6)).value;
        const auto rep = check_doubling(w, d, Q, S, 2.0, c);
        CHECK(rep.left == Catch::Approx(std::pow(2.0, 1.5)).margin(2e-3));
        CHECK(rep.pass);
    }
    {
        const auto rep = check_doubling(Weight::power(0.5, 1), d, Q, Q, 2.0, 2.0);
        CHECK(rep.left == Catch::Approx(1.0));
        CHECK(rep.pass);
    }
    CHECK_THROWS_AS(check_doubling(Weight::constant(1.0), d, S, Q, 2.0, 1.0), param_error);
}

TEST_CASE("reverse doubling: exact halving constants and witness cubes") {
    {
        Domain d = lab(1024);
        auto fam = enumerate_cubes(d, 0, 3);
        CubeFamily interior = fam;
        interior.cubes.clear();
        for (const auto& q : fam.cubes)
            if (std::fabs(q.center(0)) + q.side() <= d.half_width) interior.cubes.push_back(q);
        const auto rep = check_reverse_doubling(Weight::constant(1.0), interior);
        CHECK(rep.left == Catch::Approx(0.5).margin(1e-12));
        CHECK(rep.pass);
    }
    {
        Domain d2(2, 4.0, 128);
        auto fam = enumerate_cubes(d2, 0, 2);
        CubeFamily interior = fam;
        interior.cubes.clear();
        for (const auto& q : fam.cubes) {
            bool ok = true;
            for (int a = 0; a < 2; ++a)
                if (std::fabs(q.center(a)) + q.side() > d2.half_width) ok = false;
            if (ok) interior.cubes.push_back(q);
        }
        const auto rep = check_reverse_doubling(Weight::constant(1.0, 2), interior);
        CHECK(rep.left == Catch::Approx(0.25).margin(1e-12));
        CHECK(rep.pass);
    }
    {
        // the disjoint-cube pattern: all ratios < 1 for |x|^{1/2}
        Domain d = lab();
        CubeFamily fam{d, 2, 6, CubeVariant::half_open, false, {}};
        for (int l = 2; l <= 6; ++l) fam.cubes.push_back(DyadicCube::half_open(l, 2));
        const auto rep = check_reverse_doubling(Weight::power(0.5, 1), fam);
        CHECK(rep.left < 1.0);
        CHECK(rep.constant > 0.0);
        CHECK(rep.pass);
    }
}

TEST_CASE("radial power in the plane integrates near the singularity") {
    Domain d(2, 1.0, 64);
    const Weight w = Weight::power(-1.0, 2); // integrable in the plane
    // closed form over [-1,1]^2 of 1/|x|: 8 ln(1 + sqrt 2)
    const double oracle = 8.0 * std::log(1.0 + std::sqrt(2.0));
    const double got = weight_measure(w, d);
    CHECK(got == Catch::Approx(oracle).epsilon(0.02));
}
