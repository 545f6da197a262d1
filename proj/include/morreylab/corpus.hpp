#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "morreylab/grid.hpp"
#include "morreylab/predual.hpp"

namespace morreylab {

/// Seeded generator with implementation-independent value mapping (the
/// standard distributions are not bit-stable across libraries).
struct Rng {
    std::mt19937_64 g;
    explicit Rng(std::uint64_t seed) : g(seed) {}
    double uniform() { return static_cast<double>(g() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    int uniform_int(int lo, int hi) { // inclusive
        return lo + static_cast<int>(g() % static_cast<std::uint64_t>(hi - lo + 1));
    }
    int sign() { return (g() & 1) ? 1 : -1; }
};

struct CorpusSpec {
    std::uint64_t seed = 1;
    int size = 20;
    bool indicators = true;
    bool bumps = true;
    bool piecewise = true;
    bool witnesses = true;
};

namespace detail {

// Scale range is fixed so one seed names the same cubes at every resolution
// (refinement studies compare like with like).
inline DyadicCube random_interior_cube(Rng& rng, const Domain& d) {
    const int J = rng.uniform_int(0, 5);
    const double s = std::ldexp(1.0, -J);
    const std::int64_t mmax = static_cast<std::int64_t>(d.half_width / s) - 1;
    auto pick = [&] { return static_cast<std::int64_t>(rng.uniform_int(static_cast<int>(-mmax), static_cast<int>(mmax))); };
    return d.n == 1 ? DyadicCube::closed(J, pick()) : DyadicCube::closed2(J, pick(), pick());
}

} // namespace detail

/// Mixture standing in for the test functions of the theory: cube indicators,
/// compactly supported (1-|x|^2)^2 bumps, random piecewise constants, and
/// sign-alternating witness profiles. Reproducible from the seed.
inline std::vector<GridFunction> generate_corpus(const Domain& d, const CorpusSpec& spec) {
    Rng rng(spec.seed);
    std::vector<GridFunction> out;
    out.reserve(static_cast<std::size_t>(spec.size));
    std::vector<int> kinds;
    if (spec.indicators) kinds.push_back(0);
    if (spec.bumps) kinds.push_back(1);
    if (spec.piecewise) kinds.push_back(2);
    if (spec.witnesses) kinds.push_back(3);
    if (kinds.empty()) kinds.push_back(0);
    for (int t = 0; t < spec.size; ++t) {
        switch (kinds[static_cast<std::size_t>(t) % kinds.size()]) {
            case 0:
                out.push_back(GridFunction::indicator(d, detail::random_interior_cube(rng, d)));
                break;
            case 1: {
                const double rad = rng.uniform(0.25, 2.0);
                std::array<double, 2> c{rng.uniform(-d.half_width / 2, d.half_width / 2),
                                        d.n == 2 ? rng.uniform(-d.half_width / 2, d.half_width / 2)
                                                 : 0.0};
                out.push_back(GridFunction::from_function(d, [=](double x, double y) {
                    const double r2 = d.n == 1
                                          ? (x - c[0]) * (x - c[0])
                                          : (x - c[0]) * (x - c[0]) + (y - c[1]) * (y - c[1]);
                    const double t2 = 1.0 - r2 / (rad * rad);
                    return t2 > 0 ? t2 * t2 : 0.0;
                }));
                break;
            }
            case 2: {
                GridFunction g(d);
                const int k = rng.uniform_int(3, 8);
                for (int piece = 0; piece < k; ++piece) {
                    const double amp = rng.uniform(-2.0, 2.0);
                    const DyadicCube q = detail::random_interior_cube(rng, d);
                    const IndexBox box = cell_index_box(d, q);
                    const int N = d.points_per_axis;
                    for (int j = box.lo[1]; j < box.hi[1]; ++j)
                        for (int i = box.lo[0]; i < box.hi[0]; ++i)
                            g[d.n == 1 ? static_cast<std::size_t>(i)
                                       : static_cast<std::size_t>(j) * N + i] += amp;
                }
                out.push_back(std::move(g));
                break;
            }
            default: {
                // sign-alternating profile on the disjoint cubes Q_l
                GridFunction g(d);
                const int lmax = std::min(5, witness_max_depth(d));
                for (int l = 2; l <= lmax; ++l) {
                    const DyadicCube q = witness_cube(l, d.n);
                    const double amp =
                        rng.sign() * std::pow(quadrature_volume(d, q), -0.25);
                    const IndexBox box = cell_index_box(d, q);
                    const int N = d.points_per_axis;
                    for (int j = box.lo[1]; j < box.hi[1]; ++j)
                        for (int i = box.lo[0]; i < box.hi[0]; ++i)
                            g[d.n == 1 ? static_cast<std::size_t>(i)
                                       : static_cast<std::size_t>(j) * N + i] = amp;
                }
                out.push_back(std::move(g));
                break;
            }
        }
    }
    return out;
}

inline std::string corpus_hash(const std::vector<GridFunction>& corpus) {
    std::vector<double> all;
    for (const auto& f : corpus) all.insert(all.end(), f.samples().begin(), f.samples().end());
    return fnv1a_hex(all);
}

} // namespace morreylab
