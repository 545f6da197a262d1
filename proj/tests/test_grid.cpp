#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "morreylab/grid.hpp"

using namespace morreylab;

namespace {
Domain small1d() { return Domain(1, 1.0, 64); }
Domain lab1d() { return Domain(1, 8.0, 2048); }
} // namespace

TEST_CASE("domain invariants are enforced") {
    CHECK_THROWS_AS(Domain(3, 1.0, 64), param_error);
    CHECK_THROWS_AS(Domain(1, -1.0, 64), param_error);
    CHECK_THROWS_AS(Domain(1, 1.0, 48), param_error); // not a power of two
    CHECK_THROWS_AS(Domain(1, 1.0, 4), param_error);  // below 8
    Domain d(2, 2.0, 16);
    CHECK(d.spacing() * d.points_per_axis == 2.0 * d.half_width);
}

TEST_CASE("cube geometry matches the defining formulas") {
    auto g0 = cube_geometry(DyadicCube::closed(0, 0));
    CHECK(g0.center[0] == 0.0);
    CHECK(g0.side == 2.0);

    auto g1 = cube_geometry(DyadicCube::closed(1, 0));
    CHECK(g1.center[0] == 0.0);
    CHECK(g1.side == 1.0);

    // the disjoint witness cube at scale l: half-open, center 2^-l * 2.5, side 2^-l
    for (int l : {2, 3, 5}) {
        auto gl = cube_geometry(DyadicCube::half_open2(l, 2, 2));
        const double s = std::ldexp(1.0, -l);
        CHECK(gl.side == s);
        CHECK(gl.center[0] == 2.5 * s);
        CHECK(gl.center[1] == 2.5 * s);
    }
}

TEST_CASE("enumerate_cubes matches a brute-force scan at J=0") {
    Domain d = small1d();
    auto fam = enumerate_cubes(d, 0, 0, CubeVariant::closed);
    // brute force over M in [-4,4]: interior (M-1, M+1) must meet [-1,1]
    std::vector<long long> expect;
    for (long long m = -4; m <= 4; ++m)
        if (m - 1 < 1 && m + 1 > -1) expect.push_back(m);
    REQUIRE(fam.cubes.size() == expect.size());
    CHECK(expect.size() == 3); // M in {-1, 0, 1}
    for (std::size_t i = 0; i < expect.size(); ++i) CHECK(fam.cubes[i].M[0] == expect[i]);

    auto half = enumerate_cubes(d, 0, 0, CubeVariant::half_open);
    REQUIRE(half.cubes.size() == 2); // M in {-1, 0}; M=1 has empty interior meet
    CHECK(half.cubes[0].M[0] == -1);
    CHECK(half.cubes[1].M[0] == 0);
}

TEST_CASE("family is never empty and ordering is deterministic") {
    Domain d = lab1d();
    auto fam = enumerate_cubes(d, -2, 5);
    REQUIRE(!fam.cubes.empty());
    for (std::size_t i = 1; i < fam.cubes.size(); ++i) {
        CHECK(fam.cubes[i - 1].J <= fam.cubes[i].J);
        if (fam.cubes[i - 1].J == fam.cubes[i].J)
            CHECK(fam.cubes[i - 1].M[0] < fam.cubes[i].M[0]);
    }
}

TEST_CASE("scale-too-fine request is rejected") {
    Domain d = small1d(); // h = 1/32
    CHECK_THROWS_AS(enumerate_cubes(d, 0, 7), scale_error); // 2^-6 < 2h = 1/16
    CHECK_NOTHROW(enumerate_cubes(d, 0, 4));
}

TEST_CASE("integrate: constants, odd symmetry, indicators") {
    Domain d = lab1d();
    auto one = GridFunction::from_function(d, [](double, double) { return 1.0; });
    CHECK(integrate(one, DyadicCube::closed(0, 0)) == Catch::Approx(2.0).margin(d.spacing()));

    auto lin = GridFunction::from_function(d, [](double x, double) { return x; });
    CHECK(integrate(lin, DyadicCube::closed(0, 0)) == Catch::Approx(0.0).margin(1e-12));

    auto chi = GridFunction::indicator(d, DyadicCube::half_open(0, 0)); // [0,1)
    CHECK(integrate(chi, DyadicCube::closed(0, 0)) == Catch::Approx(1.0).margin(d.spacing()));
}

TEST_CASE("integrate rejects regions without cell centers") {
    Domain d = lab1d();
    CHECK_THROWS_AS(integrate(GridFunction(d), Ball(1, {20.0, 0.0}, 0.5)), region_error);
}

TEST_CASE("restrict: identity on covering cube, zero function, overlap mass") {
    Domain d = lab1d();
    auto f = GridFunction::from_function(d, [](double x, double) { return std::cos(x); });
    auto g = restrict(f, covering_cube(d));
    for (std::size_t i = 0; i < f.size(); ++i) REQUIRE(g[i] == f[i]);

    GridFunction z(d);
    CHECK(restrict(z, DyadicCube::closed(2, 1)).is_zero());

    // chi_{[-1,1]} restricted to [0,2]: overlap [0,1] has mass 1
    auto chi = GridFunction::indicator(d, DyadicCube::closed(0, 0));
    auto r = restrict(chi, DyadicCube::closed(0, 1));
    CHECK(integrate(r) == Catch::Approx(1.0).margin(d.spacing()));
}

TEST_CASE("quadrature is linear and monotone") {
    Domain d = small1d();
    auto f = GridFunction::from_function(d, [](double x, double) { return std::sin(3 * x) + 2; });
    auto g = GridFunction::from_function(d, [](double x, double) { return x * x; });
    const DyadicCube q = DyadicCube::closed(1, 0);
    GridFunction lc = 2.5 * f - g; // -1*g via scalar
    GridFunction mg = g;
    mg *= -1.0;
    lc = 2.5 * f + mg;
    CHECK(integrate(lc, q) ==
          Catch::Approx(2.5 * integrate(f, q) - integrate(g, q)).epsilon(1e-12));

    // monotone: f >= 0, nested regions
    const double inner = integrate(g, DyadicCube::closed(2, 0));
    const double outer = integrate(g, DyadicCube::closed(1, 0));
    CHECK(inner <= outer + 1e-15);
}

TEST_CASE("cube nesting in the closed lattice") {
    for (int J : {-1, 0, 2}) {
        for (long long M : {-3LL, 0LL, 5LL}) {
            const DyadicCube parent = DyadicCube::closed(J, M);
            const DyadicCube child = DyadicCube::closed(J + 1, 2 * M);
            CHECK(child.geometrically_inside(parent));
        }
    }
}

TEST_CASE("refinement convergence of the quadrature") {
    // integrate a smooth function over [-1,1]; error decays with slope >= 0.9
    auto exact = 2.0 * std::sin(1.0); // integral of cos over [-1,1]
    std::vector<double> errs, hs;
    for (int N : {256, 512, 1024, 2048}) {
        Domain d(1, 8.0, N);
        auto f = GridFunction::from_function(d, [](double x, double) { return std::cos(x); });
        errs.push_back(std::fabs(integrate(f, DyadicCube::closed(0, 0)) - exact));
        hs.push_back(d.spacing());
    }
    for (std::size_t i = 1; i < errs.size(); ++i) {
        const double slope = std::log(errs[i - 1] / errs[i]) / std::log(hs[i - 1] / hs[i]);
        CHECK(slope >= 0.9);
    }
}

TEST_CASE("dense centered family flags and prefix sums") {
    Domain d(2, 2.0, 32);
    auto fam = dense_centered_family(d, 0, 2);
    CHECK(fam.dense_centered);
    CHECK(fam.cubes.empty());

    std::vector<double> cells(d.cell_count(), 1.0);
    PrefixTable t(d, cells);
    IndexBox b;
    b.lo = {4, 8};
    b.hi = {10, 12};
    CHECK(t.box_sum(b) == Catch::Approx(6.0 * 4.0));
}
