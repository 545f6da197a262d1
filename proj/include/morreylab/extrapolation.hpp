#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "morreylab/errors.hpp"
#include "morreylab/grid.hpp"
#include "morreylab/morrey.hpp"
#include "morreylab/operators.hpp"
#include "morreylab/predual.hpp"
#include "morreylab/report.hpp"
#include "morreylab/weight.hpp"

namespace morreylab {

/// Ordered pairs (g, f) of nonnegative functions; the operator-free family of
/// the extrapolation theorem ((|T phi|, |phi|) being the canonical source).
struct PairFamily {
    std::vector<std::pair<GridFunction, GridFunction>> pairs;
    std::string provenance;
};

struct RdFConfig {
    int K = 12;           // truncation depth of the geometric series
    double M_norm = 2.0;  // operator norm bound for M in the working space
    CubeFamily family;    // family driving the maximal operator

    void validate() const {
        if (K < 1) throw param_error("RdFConfig: K >= 1");
        if (!(M_norm >= 1.0)) throw param_error("RdFConfig: M_norm >= 1");
    }
};

/// R|h| = sum_{k=0}^{K} M^k|h| / (2 M_norm)^k, M^0 the identity.
/// Dominates |h| pointwise and is finite everywhere.
inline GridFunction rubio_de_francia(const GridFunction& h, const RdFConfig& cfg) {
    cfg.validate();
    GridFunction iter = h.abs();
    GridFunction sum = iter;
    double scale = 1.0;
    for (int k = 1; k <= cfg.K; ++k) {
        iter = maximal(iter, cfg.family);
        scale /= 2.0 * cfg.M_norm;
        GridFunction term = iter;
        term *= scale;
        sum += term;
    }
    sum.check_finite("rubio_de_francia");
    return sum;
}

struct RdFDiagnostics {
    GridFunction R;    // the majorant
    GridFunction MR;   // M(R|h|)
    GridFunction tail; // M^{K+1}|h| / (2 M_norm)^K, the series remainder
};

inline RdFDiagnostics rubio_de_francia_diagnostics(const GridFunction& h, const RdFConfig& cfg) {
    cfg.validate();
    GridFunction iter = h.abs();
    GridFunction sum = iter;
    double scale = 1.0;
    for (int k = 1; k <= cfg.K; ++k) {
        iter = maximal(iter, cfg.family);
        scale /= 2.0 * cfg.M_norm;
        GridFunction term = iter;
        term *= scale;
        sum += term;
    }
    GridFunction m_next = maximal(iter, cfg.family); // M^{K+1}|h|
    GridFunction tail = m_next;
    tail *= scale; // (2 M_norm)^{-K}
    RdFDiagnostics diag{std::move(sum), maximal(sum, cfg.family), std::move(tail)};
    return diag;
}

// ---- empirical operator norms ------------------------------------------------

enum class NormSpace { weighted_lp, weighted_morrey, predual_bracket };

struct NormSpec {
    NormSpace space = NormSpace::weighted_lp;
    Weight w = Weight::constant(1.0, 1);
    double lp = 2.0;                       // weighted_lp exponent
    MorreyParams mp{2.0, -0.5, 1};         // weighted_morrey parameters
    PredualParams pp{2.0, -0.6, 1};        // predual_bracket parameters
    CubeFamily fam;                        // scans and lower brackets
    std::vector<GridFunction> dual_corpus; // pairing corpus for lower brackets
    int search_depth = 8;
};

struct OperatorNormEstimate {
    double estimate = 0.0;        // max ratio in the space's computable norm
    double certified_lower = 0.0; // predual: max lower(Tf)/upper(f)
    double reported_upper = 0.0;  // predual: max upper(Tf)/lower(f)
};

using Operator = std::function<GridFunction(const GridFunction&)>;

/// max over the corpus of ||Tf|| / ||f|| in the named norm. For the predual
/// bracket the upper bound is the norm stand-in on both sides, with the
/// certified lower and reported upper cross-ratios carried alongside.
inline OperatorNormEstimate estimate_operator_norm(const Operator& T, const NormSpec& spec,
                                                   const std::vector<GridFunction>& corpus) {
    if (corpus.empty()) throw param_error("estimate_operator_norm: empty corpus");
    OperatorNormEstimate est;
    for (const auto& f : corpus) {
        if (f.is_zero()) throw param_error("estimate_operator_norm: zero corpus function");
        const GridFunction tf = T(f);
        switch (spec.space) {
            case NormSpace::weighted_lp: {
                const double nf = lp_norm_weighted(f, spec.w, spec.lp);
                const double nt = lp_norm_weighted(tf, spec.w, spec.lp);
                if (nf <= 0) throw error("estimate_operator_norm: norm vanished on nonzero f");
                est.estimate = std::max(est.estimate, nt / nf);
                break;
            }
            case NormSpace::weighted_morrey: {
                const double nf = morrey_norm(f, spec.w, spec.mp, spec.fam).value;
                const double nt = morrey_norm(tf, spec.w, spec.mp, spec.fam).value;
                if (nf <= 0) throw error("estimate_operator_norm: norm vanished on nonzero f");
                est.estimate = std::max(est.estimate, nt / nf);
                break;
            }
            case NormSpace::predual_bracket: {
                const auto bf = predual_bracket(f, spec.pp, spec.w, spec.dual_corpus, spec.fam,
                                                spec.search_depth);
                const auto bt = predual_bracket(tf, spec.pp, spec.w, spec.dual_corpus, spec.fam,
                                                spec.search_depth);
                if (bf.upper <= 0) throw error("estimate_operator_norm: norm vanished on nonzero f");
                est.estimate = std::max(est.estimate, bt.upper / bf.upper);
                est.certified_lower = std::max(est.certified_lower, bt.lower / bf.upper);
                if (bf.lower > 0) est.reported_upper = std::max(est.reported_upper, bt.upper / bf.lower);
                break;
            }
        }
    }
    return est;
}

// ---- extrapolation harness ----------------------------------------------------

struct ExtrapolationTarget {
    double p;
    double r;
    Weight w;
    std::string label;
};

/// Hypothesis side: c1 = max pair ratio in L_{p1, w~} for each probe weight;
/// conclusion side: c2 = max pair Morrey-norm ratio for each target. Pairs
/// with f = 0 and g != 0 are rejected (the hypothesis is unverifiable there).
inline VerificationReport extrapolation_check(const PairFamily& F, double p1,
                                              const std::vector<ExtrapolationTarget>& targets,
                                              const std::vector<Weight>& hypothesis_weights,
                                              const CubeFamily& fam) {
    if (F.pairs.empty()) throw param_error("extrapolation_check: empty pair family");
    if (!(p1 > 1)) throw param_error("extrapolation_check: need p1 > 1");
    for (const auto& [g, f] : F.pairs)
        if (f.is_zero() && !g.is_zero())
            throw param_error("extrapolation_check: pair with f = 0, g != 0");

    VerificationReport rep;
    rep.check_id = "extrapolation";
    rep.anchor = "extrapolation-pairs";
    double c1_max = 0.0;
    for (const auto& w : hypothesis_weights) {
        double c1 = 0.0;
        for (const auto& [g, f] : F.pairs) {
            if (f.is_zero()) continue;
            const double nf = lp_norm_weighted(f, w, p1);
            if (nf <= 0) continue;
            c1 = std::max(c1, lp_norm_weighted(g, w, p1) / nf);
        }
        rep.witnesses["c1[" + w.describe() + "]"] = fmt17(c1);
        c1_max = std::max(c1_max, c1);
    }
    double c2_max = 0.0;
    bool all_finite = true;
    for (const auto& t : targets) {
        const MorreyParams mp(t.p, t.r, fam.domain.n);
        double c2 = 0.0;
        for (const auto& [g, f] : F.pairs) {
            if (f.is_zero()) continue;
            const double nf = morrey_norm(f, t.w, mp, fam).value;
            if (nf <= 0) continue;
            c2 = std::max(c2, morrey_norm(g, t.w, mp, fam).value / nf);
        }
        all_finite = all_finite && std::isfinite(c2);
        rep.witnesses["c2[" + t.label + "]"] = fmt17(c2);
        c2_max = std::max(c2_max, c2);
    }
    rep.left = c1_max;
    rep.right = c2_max;
    rep.constant = c1_max > 0 ? c2_max / c1_max : 0.0;
    rep.pass = all_finite && std::isfinite(c1_max);
    rep.witnesses["provenance"] = F.provenance;
    return rep;
}

/// Boundedness of T on the predual bracket plus the annular decay of T h for
/// h an indicator: across the annuli 2^{l+1}Q0 minus 2^l Q0the values of
/// |Th| obey the size law size_constant * integral|h| / |2^l Q0|, probed at
/// distance |2^l Q0| from the cube's center and gated within 25% for
/// l = 1..3. Supported operators: maximal, hilbert, hilbert_max (resolved by
/// the caller into a callable; size_constant 1/pi for the Hilbert kernel,
/// 1 for the maximal operator).
inline VerificationReport predual_boundedness_check(const Operator& T, const std::string& op_name,
                                                    const PredualParams& pp, const Weight& w,
                                                    const std::vector<GridFunction>& corpus,
                                                    const CubeFamily& fam,
                                                    const DyadicCube& indicator_cube,
                                                    double size_constant = 1.0,
                                                    int search_depth = 8) {
    pp.validate();
    const Domain& d = fam.domain;
    VerificationReport rep;
    rep.check_id = "predual_boundedness:" + op_name;
    rep.anchor = "predual-operator-bound";

    double max_ratio = 0.0;
    for (const auto& h : corpus) {
        if (h.is_zero()) continue;
        const auto bh = predual_bracket(h, pp, w, corpus, fam, search_depth);
        if (bh.upper <= 0) continue;
        const auto bt = predual_norm_lower(T(h), pp, w, corpus, fam);
        max_ratio = std::max(max_ratio, bt.value / bh.upper);
    }
    rep.constant = max_ratio;

    const GridFunction h0 = GridFunction::indicator(d, indicator_cube);
    const GridFunction th = T(h0);
    const double mass = integrate(h0.abs());
    bool annuli_ok = true;
    double worst_dev = 0.0;
    for (int l = 1; l <= 3; ++l) {
        const DyadicCube inner = indicator_cube.dilated(std::ldexp(1.0, l));
        const double inner_vol = quadrature_volume(d, inner);
        // probe the outer face of the annulus: distance side(2^l Q0) from the
        // center along the first axis, on whichever side stays in the box
        const double dist = inner.side();
        double y = indicator_cube.center(0) - dist;
        if (y < -d.half_width + d.spacing()) y = indicator_cube.center(0) + dist;
        if (std::fabs(y) > d.half_width - d.spacing()) { annuli_ok = false; continue; }
        std::size_t idx = static_cast<std::size_t>(
            std::min<double>(d.points_per_axis - 1.0,
                             std::max(0.0, std::floor((y + d.half_width) / d.spacing()))));
        if (d.n == 2) {
            const double yc = indicator_cube.center(1);
            const std::size_t row = static_cast<std::size_t>(
                std::min<double>(d.points_per_axis - 1.0,
                                 std::max(0.0, std::floor((yc + d.half_width) / d.spacing()))));
            idx = row * d.points_per_axis + idx;
        }
        const double probe = std::fabs(th[idx]);
        const double law = size_constant * mass / inner_vol;
        const double dev = std::fabs(probe / law - 1.0);
        worst_dev = std::max(worst_dev, dev);
        annuli_ok = annuli_ok && dev <= 0.25;
        rep.witnesses["annulus_l" + std::to_string(l) + "_value"] = fmt17(probe);
        rep.witnesses["annulus_l" + std::to_string(l) + "_law"] = fmt17(law);
    }
    rep.left = max_ratio;
    rep.right = worst_dev;
    rep.pass = std::isfinite(max_ratio) && annuli_ok;
    rep.witnesses["indicator_cube"] = indicator_cube.id();
    return rep;
}

} // namespace morreylab
