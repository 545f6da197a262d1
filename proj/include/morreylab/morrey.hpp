#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "morreylab/errors.hpp"
#include "morreylab/grid.hpp"
#include "morreylab/report.hpp"
#include "morreylab/weight.hpp"

namespace morreylab {

/// Parameters of the weighted Morrey norm
///   sup_Q w(Q)^{-(1/p + r/n)} ( int_Q |f|^p w )^{1/p},
/// 1 < p < inf, -n/p <= r < 0. r = -n/p collapses to the global L_{p,w} norm.
struct MorreyParams {
    double p = 2.0;
    double r = -0.5;
    int n = 1;

    MorreyParams() = default;
    MorreyParams(double p_, double r_, int n_) : p(p_), r(r_), n(n_) { validate(); }
    void validate() const {
        if (!(p > 1) || !std::isfinite(p)) throw param_error("MorreyParams: need 1 < p < inf");
        if (!(r >= -static_cast<double>(n) / p) || !(r < 0))
            throw param_error("MorreyParams: need -n/p <= r < 0");
        if (n != 1 && n != 2) throw param_error("MorreyParams: n must be 1 or 2");
    }
    /// -(1/p + r/n), the weight-measure exponent; lies in (-1/p, 0].
    double measure_exponent() const { return -(1.0 / p + r / n); }
    double conjugate() const { return p / (p - 1.0); }
};

/// Parameters of the atomic predual norm: pieces supported in dyadic cubes,
/// cost sum_Q w(Q)^{-(1/p + vr/n)} || piece w^{-1/p'} | L_p ||,
/// -n < vr < -n/p, weight in A_{p'}. Pairs with MorreyParams{p', -n - vr}.
struct PredualParams {
    double p = 2.0;
    double varrho = -0.6;
    int n = 1;

    PredualParams() = default;
    PredualParams(double p_, double vr, int n_) : p(p_), varrho(vr), n(n_) { validate(); }
    void validate() const {
        if (!(p > 1) || !std::isfinite(p)) throw param_error("PredualParams: need 1 < p < inf");
        if (!(varrho > -static_cast<double>(n)) || !(varrho < -static_cast<double>(n) / p))
            throw param_error("PredualParams: need -n < varrho < -n/p");
        if (n != 1 && n != 2) throw param_error("PredualParams: n must be 1 or 2");
    }
    double cost_exponent() const { return -(1.0 / p + varrho / n); }
    double conjugate() const { return p / (p - 1.0); }
    /// Morrey parameters of the paired space (r + vr = -n, conjugate exponent).
    MorreyParams paired_morrey() const { return MorreyParams(conjugate(), -n - varrho, n); }
};

struct NormResult {
    double value = 0.0;
    DyadicCube attained;
    bool attained_valid = false;
};

namespace detail {

// Scan max_Q w(Q)^e (F(Q))^{1/p} over explicit cubes. Cubes with no cell
// centers contribute nothing.
inline NormResult norm_scan(const Domain& d, const std::vector<DyadicCube>& cubes, double e,
                            double p, const PrefixTable& tw, const PrefixTable& tf) {
    NormResult res;
    if (cubes.empty()) throw param_error("morrey_norm: empty family");
    std::vector<double> vals(cubes.size(), 0.0);
    par::for_chunks(cubes.size(), [&](std::size_t b, std::size_t en) {
        for (std::size_t i = b; i < en; ++i) {
            const IndexBox box = cell_index_box(d, cubes[i]);
            if (box.empty()) continue;
            const double wq = tw.box_sum(box);
            const double fq = tf.box_sum(box);
            if (wq <= 0) continue;
            vals[i] = (e == 0.0 ? 1.0 : std::pow(wq, e)) * std::pow(fq, 1.0 / p);
        }
    });
    auto [best, arg] = par::max_reduce(vals.size(), [&](std::size_t i) { return vals[i]; });
    res.value = best;
    res.attained = cubes[arg];
    res.attained_valid = true;
    return res;
}

inline std::vector<double> p_weighted_cells(const GridFunction& f, double p,
                                            const std::vector<double>& wcells) {
    std::vector<double> out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        out[i] = std::pow(std::fabs(f[i]), p) * wcells[i];
    return out;
}

} // namespace detail

/// Weighted Morrey norm over the family; reports the attained cube
/// (ties broken by enumeration order).
inline NormResult morrey_norm(const GridFunction& f, const Weight& w, const MorreyParams& mp,
                              const CubeFamily& fam) {
    mp.validate();
    const Domain& d = f.domain();
    if (mp.n != d.n) throw param_error("morrey_norm: dimension mismatch");
    if (fam.dense_centered) throw param_error("morrey_norm: use morrey_norm_centered");
    const auto wcells = w.cell_integrals(d);
    const PrefixTable tw(d, wcells);
    const PrefixTable tf(d, detail::p_weighted_cells(f, mp.p, wcells));
    return detail::norm_scan(d, fam.cubes, mp.measure_exponent(), mp.p, tw, tf);
}

/// Half-open variant of the norm (the family must carry half-open cubes).
inline NormResult morrey_norm_halfopen(const GridFunction& f, const Weight& w,
                                       const MorreyParams& mp, const CubeFamily& fam) {
    if (fam.variant != CubeVariant::half_open)
        throw param_error("morrey_norm_halfopen: family is not half-open");
    return morrey_norm(f, w, mp, fam);
}

/// Centered variant over Q(x,J) for x in the given centers, J in [j_min, j_max].
inline NormResult morrey_norm_centered(const GridFunction& f, const Weight& w,
                                       const MorreyParams& mp,
                                       const std::vector<std::array<double, 2>>& centers,
                                       int j_min, int j_max) {
    mp.validate();
    const Domain& d = f.domain();
    if (centers.empty()) throw param_error("morrey_norm_centered: no centers");
    if (std::ldexp(1.0, -j_max + 1) < 2.0 * d.spacing())
        throw scale_error("morrey_norm_centered: finest cube below 2 cells");
    std::vector<DyadicCube> cubes;
    cubes.reserve(centers.size() * (j_max - j_min + 1));
    for (int J = j_min; J <= j_max; ++J)
        for (const auto& x : centers) cubes.push_back(DyadicCube::centered(x, J, d.n));
    const auto wcells = w.cell_integrals(d);
    const PrefixTable tw(d, wcells);
    const PrefixTable tf(d, detail::p_weighted_cells(f, mp.p, wcells));
    return detail::norm_scan(d, cubes, mp.measure_exponent(), mp.p, tw, tf);
}

/// Ball variant over an explicit ball list. In one dimension balls are
/// intervals and use prefix sums; the plane scans cells in the bounding box.
inline double morrey_norm_balls(const GridFunction& f, const Weight& w, const MorreyParams& mp,
                                const std::vector<Ball>& balls) {
    mp.validate();
    const Domain& d = f.domain();
    if (balls.empty()) throw param_error("morrey_norm_balls: no balls");
    const auto wcells = w.cell_integrals(d);
    const auto fcells = detail::p_weighted_cells(f, mp.p, wcells);
    const double e = mp.measure_exponent();
    std::vector<double> vals(balls.size(), 0.0);
    if (d.n == 1) {
        const PrefixTable tw(d, wcells), tf(d, fcells);
        par::for_chunks(balls.size(), [&](std::size_t b, std::size_t en) {
            for (std::size_t bi = b; bi < en; ++bi) {
                const Ball& ball = balls[bi];
                IndexBox box;
                box.lo = {std::max(0, morreylab::detail::first_center_at_or_above(
                                          d, ball.center[0] - ball.radius)),
                          0};
                box.hi = {std::min(d.points_per_axis,
                                   morreylab::detail::last_center_below(
                                       d, ball.center[0] + ball.radius, true) +
                                       1),
                          1};
                if (box.empty()) continue;
                const double wq = tw.box_sum(box);
                if (wq > 0)
                    vals[bi] = (e == 0.0 ? 1.0 : std::pow(wq, e)) * std::pow(tf.box_sum(box), 1.0 / mp.p);
            }
        });
    } else {
        par::for_chunks(balls.size(), [&](std::size_t b, std::size_t en) {
            for (std::size_t bi = b; bi < en; ++bi) {
                const Ball& ball = balls[bi];
                double wq = 0, fq = 0;
                for (std::size_t i = 0; i < fcells.size(); ++i) {
                    auto c = d.cell_center(i);
                    const double r2 = (c[0] - ball.center[0]) * (c[0] - ball.center[0]) +
                                      (c[1] - ball.center[1]) * (c[1] - ball.center[1]);
                    if (r2 <= ball.radius * ball.radius) { wq += wcells[i]; fq += fcells[i]; }
                }
                if (wq > 0) vals[bi] = (e == 0.0 ? 1.0 : std::pow(wq, e)) * std::pow(fq, 1.0 / mp.p);
            }
        });
    }
    double best = 0;
    for (double v : vals) best = std::max(best, v);
    return best;
}

/// Cell centers at the given stride, standing in for the dense rational
/// centers of the centered norm variant.
inline std::vector<std::array<double, 2>> default_rational_centers(const Domain& d, int stride = 4) {
    std::vector<std::array<double, 2>> out;
    if (d.n == 1) {
        for (int i = 0; i < d.points_per_axis; i += stride) out.push_back({d.axis_center(i), 0.0});
    } else {
        for (int j = 0; j < d.points_per_axis; j += stride)
            for (int i = 0; i < d.points_per_axis; i += stride)
                out.push_back({d.axis_center(i), d.axis_center(j)});
    }
    return out;
}

/// Global weighted L_u norm with the same per-cell quadrature as the Morrey
/// scans.
inline double lp_norm_weighted(const GridFunction& f, const Weight& w, double p) {
    const auto wcells = w.cell_integrals(f.domain());
    double s = 0;
    for (std::size_t i = 0; i < f.size(); ++i) s += std::pow(std::fabs(f[i]), p) * wcells[i];
    return std::pow(s, 1.0 / p);
}

/// Chain || f | L^r_p(w) || <= || f | L^r_pt(w) || <= || f | L_{u,w} ||,
/// u = -n/r. Requires p <= pt and -n/p <= -n/pt <= r < 0.
inline VerificationReport embedding_check(const GridFunction& f, const Weight& w,
                                          const MorreyParams& mp, double p_tilde,
                                          const CubeFamily& fam) {
    mp.validate();
    if (!(mp.p <= p_tilde)) throw param_error("embedding_check: need p <= p_tilde");
    if (!(-static_cast<double>(mp.n) / p_tilde <= mp.r))
        throw param_error("embedding_check: need -n/p_tilde <= r");
    const double u = -static_cast<double>(mp.n) / mp.r;
    const double n1 = morrey_norm(f, w, mp, fam).value;
    const double n2 = morrey_norm(f, w, MorreyParams(p_tilde, mp.r, mp.n), fam).value;
    const double n3 = lp_norm_weighted(f, w, u);
    const double tol = 1e-9 * (1.0 + n3);
    VerificationReport rep;
    rep.check_id = "embedding_chain";
    rep.anchor = "morrey-embedding";
    rep.left = n1;
    rep.right = n3;
    rep.constant = n2;
    rep.pass = n1 <= n2 + tol && n2 <= n3 + tol;
    rep.witnesses["norm_p"] = fmt17(n1);
    rep.witnesses["norm_p_tilde"] = fmt17(n2);
    rep.witnesses["norm_Lu"] = fmt17(n3);
    rep.witnesses["u"] = fmt17(u);
    return rep;
}

// ---- non-separability witnesses --------------------------------------------

/// Witness cube Q_l = 2^{-l}((2,...,2) + [0,1]^n), l >= 2 (half-open, disjoint,
/// all inside [-1,1]^n).
inline DyadicCube witness_cube(int l, int n) {
    if (l < 2) throw param_error("witness_cube: l >= 2 required");
    return n == 1 ? DyadicCube::half_open(l, 2) : DyadicCube::half_open2(l, 2, 2);
}

/// Largest admissible witness depth: the smallest cube spans >= 2 cells.
inline int witness_max_depth(const Domain& d) {
    int l = 2;
    while (std::ldexp(1.0, -(l + 1)) >= 2.0 * d.spacing()) ++l;
    return l;
}

/// f^lambda = sum_l lambda_l w(Q_l)^{r/n} chi_{Q_l} for signs lambda_l = +-1
/// over l = 2 .. 1+signs.size(). Endpoint r = -n/p is rejected.
inline GridFunction nonseparability_witness(const std::vector<int>& signs, const Weight& w,
                                            const MorreyParams& mp, const Domain& d) {
    mp.validate();
    if (!(mp.r > -static_cast<double>(mp.n) / mp.p))
        throw param_error("nonseparability_witness: endpoint r = -n/p excluded");
    if (signs.empty()) throw param_error("nonseparability_witness: empty sign sequence");
    const int l_max = 1 + static_cast<int>(signs.size());
    if (l_max > witness_max_depth(d))
        throw scale_error("nonseparability_witness: resolution too coarse for requested depth");
    const auto wcells = w.cell_integrals(d);
    GridFunction f(d);
    for (int l = 2; l <= l_max; ++l) {
        const int s = signs[static_cast<std::size_t>(l - 2)];
        if (s != 1 && s != -1) throw param_error("nonseparability_witness: signs must be +-1");
        const DyadicCube q = witness_cube(l, d.n);
        const IndexBox box = cell_index_box(d, q);
        double wq = 0;
        const int N = d.points_per_axis;
        for (int j = box.lo[1]; j < box.hi[1]; ++j)
            for (int i = box.lo[0]; i < box.hi[0]; ++i)
                wq += wcells[d.n == 1 ? static_cast<std::size_t>(i)
                                      : static_cast<std::size_t>(j) * N + i];
        const double amp = s * std::pow(wq, mp.r / mp.n);
        for (int j = box.lo[1]; j < box.hi[1]; ++j)
            for (int i = box.lo[0]; i < box.hi[0]; ++i)
                f[d.n == 1 ? static_cast<std::size_t>(i) : static_cast<std::size_t>(j) * N + i] = amp;
    }
    f.check_finite("nonseparability_witness");
    return f;
}

} // namespace morreylab
