#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "morreylab/errors.hpp"
#include "morreylab/grid.hpp"
#include "morreylab/morrey.hpp"
#include "morreylab/report.hpp"
#include "morreylab/weight.hpp"

namespace morreylab {

inline std::string fnv1a_hex(const std::vector<double>& v) {
    std::uint64_t h = 1469598103934665603ull;
    for (double x : v) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(x));
        __builtin_memcpy(&bits, &x, sizeof(bits));
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xffu;
            h *= 1099511628211ull;
        }
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Finite atomic representation h = sum pieces, supp(piece) inside its cube.
struct Decomposition {
    std::vector<std::pair<DyadicCube, GridFunction>> pieces;
    PredualParams params;

    /// Every nonzero sample's cell center lies inside the piece's cube.
    void validate_supports(const Domain& d) const {
        for (const auto& [q, g] : pieces) {
            const IndexBox box = cell_index_box(d, q);
            const int N = d.points_per_axis;
            for (std::size_t i = 0; i < g.size(); ++i) {
                if (g[i] == 0.0) continue;
                const int ix = d.n == 1 ? static_cast<int>(i) : static_cast<int>(i % N);
                const int iy = d.n == 1 ? 0 : static_cast<int>(i / N);
                if (ix < box.lo[0] || ix >= box.hi[0] || iy < box.lo[1] || iy >= box.hi[1])
                    throw param_error("Decomposition: piece support escapes its cube");
            }
        }
    }

    GridFunction reconstruct(const Domain& d) const {
        GridFunction g(d);
        for (const auto& [q, piece] : pieces) g += piece;
        return g;
    }

    std::string to_json(const Domain& d) const {
        std::string j = "{\n  \"pieces\": [";
        std::vector<double> all;
        bool first = true;
        for (const auto& [q, piece] : pieces) {
            j += first ? "\n" : ",\n";
            first = false;
            j += "    {\"J\": " + std::to_string(q.J) + ", \"M\": [" + std::to_string(q.M[0]);
            if (d.n == 2) j += ", " + std::to_string(q.M[1]);
            j += "], \"samples_ref\": \"" + fnv1a_hex(piece.samples()) + "\"}";
            all.insert(all.end(), piece.samples().begin(), piece.samples().end());
        }
        j += pieces.empty() ? "],\n" : "\n  ],\n";
        j += "  \"content_hash\": \"" + fnv1a_hex(all) + "\"\n}\n";
        return j;
    }
};

namespace detail {

// Cost machinery shared by the searches: per-cell integrals of w and of
// w^{1-p} (the weight of || piece w^{-1/p'} | L_p ||^p).
struct CostTables {
    const Domain& d;
    std::vector<double> wcells;
    std::vector<double> dcells; // cell integrals of w^{1-p}
    PrefixTable tw;
    double exp_cost;
    double p;

    CostTables(const Domain& dom, const Weight& w, const PredualParams& pp)
        : d(dom),
          wcells(w.cell_integrals(dom)),
          dcells(w.dual(pp.conjugate()).cell_integrals(dom)), // (1 - p'') with p''=p' gives 1-p
          tw(dom, wcells),
          exp_cost(pp.cost_exponent()),
          p(pp.p) {}

    double piece_cost_cells(const std::vector<std::size_t>& cells, const GridFunction& h,
                            const DyadicCube& q) const {
        const IndexBox box = cell_index_box(d, q);
        const double wq = tw.box_sum(box);
        if (wq <= 0) throw region_error("decomposition cost: cube carries no weight mass");
        double s = 0;
        for (std::size_t i : cells) s += std::pow(std::fabs(h[i]), p) * dcells[i];
        return std::pow(wq, exp_cost) * std::pow(s, 1.0 / p);
    }
};

inline std::vector<std::size_t> support_cells(const GridFunction& h) {
    std::vector<std::size_t> cells;
    for (std::size_t i = 0; i < h.size(); ++i)
        if (h[i] != 0.0) cells.push_back(i);
    return cells;
}

// Smallest closed dyadic cube containing all listed cell closures; falls back
// to the domain-covering cube.
inline DyadicCube smallest_covering_cube(const Domain& d, const std::vector<std::size_t>& cells) {
    double lo0 = 1e300, hi0 = -1e300, lo1 = 1e300, hi1 = -1e300;
    const double h = d.spacing();
    for (std::size_t i : cells) {
        auto c = d.cell_center(i);
        lo0 = std::min(lo0, c[0] - 0.5 * h);
        hi0 = std::max(hi0, c[0] + 0.5 * h);
        if (d.n == 2) { lo1 = std::min(lo1, c[1] - 0.5 * h); hi1 = std::max(hi1, c[1] + 0.5 * h); }
    }
    if (d.n == 1) { lo1 = -1; hi1 = 1; }
    const int j_fine = static_cast<int>(std::floor(std::log2(1.0 / d.spacing())));
    for (int J = j_fine; J >= covering_cube(d).J; --J) {
        const double s = std::ldexp(1.0, -J);
        auto axis_m = [&](double lo, double hi, std::int64_t& m) {
            const double mlo = hi / s - 1.0, mhi = lo / s + 1.0;
            const std::int64_t cand = static_cast<std::int64_t>(std::ceil(mlo));
            if (cand <= std::floor(mhi)) { m = cand; return true; }
            return false;
        };
        std::int64_t m0, m1 = 0;
        if (!axis_m(lo0, hi0, m0)) continue;
        if (d.n == 2 && !axis_m(lo1, hi1, m1)) continue;
        return d.n == 1 ? DyadicCube::closed(J, m0) : DyadicCube::closed2(J, m0, m1);
    }
    return covering_cube(d);
}

struct SearchNode {
    double cost;
    std::vector<std::pair<DyadicCube, std::vector<std::size_t>>> parts;
};

// Exact min over the binary/quad dyadic split tree down to the given depth.
// Deeper searches include all shallower candidates, so the result is
// nonincreasing in depth.
inline SearchNode split_search(const CostTables& ct, const GridFunction& h, const DyadicCube& q,
                               const std::vector<std::size_t>& cells, int depth) {
    SearchNode single{ct.piece_cost_cells(cells, h, q), {{q, cells}}};
    const double child_side = q.side() / 2.0;
    if (depth <= 0 || cells.empty() || child_side < 2.0 * ct.d.spacing()) return single;

    const double mid0 = q.center(0);
    const double mid1 = ct.d.n == 2 ? q.center(1) : 0.0;
    const int nchild = ct.d.n == 1 ? 2 : 4;
    std::vector<std::vector<std::size_t>> parts(nchild);
    for (std::size_t i : cells) {
        auto c = ct.d.cell_center(i);
        int which = c[0] > mid0 ? 1 : 0;
        if (ct.d.n == 2 && c[1] > mid1) which += 2;
        parts[static_cast<std::size_t>(which)].push_back(i);
    }
    auto child_cube = [&](int which) {
        const std::int64_t m0 = 2 * q.M[0] + ((which & 1) ? 1 : -1);
        if (ct.d.n == 1) return DyadicCube::closed(q.J + 1, m0);
        const std::int64_t m1 = 2 * q.M[1] + ((which & 2) ? 1 : -1);
        return DyadicCube::closed2(q.J + 1, m0, m1);
    };
    SearchNode split{0.0, {}};
    for (int c = 0; c < nchild; ++c) {
        if (parts[static_cast<std::size_t>(c)].empty()) continue;
        SearchNode sub = split_search(ct, h, child_cube(c), parts[static_cast<std::size_t>(c)], depth - 1);
        split.cost += sub.cost;
        for (auto& pc : sub.parts) split.parts.push_back(std::move(pc));
    }
    return split.cost < single.cost ? split : single;
}

} // namespace detail

/// Cost of a decomposition:
///   sum_pieces w(Q)^{-(1/p + vr/n)} || piece w^{-1/p'} | L_p ||.
inline double decomposition_cost(const Decomposition& dec, const Weight& w, const Domain& d) {
    dec.params.validate();
    dec.validate_supports(d);
    const detail::CostTables ct(d, w, dec.params);
    double total = 0;
    for (const auto& [q, piece] : dec.pieces) {
        const auto cells = detail::support_cells(piece);
        if (cells.empty()) continue;
        total += ct.piece_cost_cells(cells, piece, q);
    }
    return total;
}

struct UpperBound {
    double value = 0.0;
    Decomposition witness;
};

/// Upper bound on the predual norm: cheapest decomposition found by the
/// dyadic split search, seeded at the smallest closed dyadic cube covering
/// supp(h). Nonincreasing in search_depth.
inline UpperBound predual_norm_upper(const GridFunction& h, const PredualParams& pp,
                                     const Weight& w, int search_depth = 10) {
    pp.validate();
    const Domain& d = h.domain();
    if (pp.n != d.n) throw param_error("predual_norm_upper: dimension mismatch");
    UpperBound ub;
    ub.witness.params = pp;
    const auto cells = detail::support_cells(h);
    if (cells.empty()) return ub;
    const detail::CostTables ct(d, w, pp);
    const DyadicCube root = detail::smallest_covering_cube(d, cells);
    detail::SearchNode best = detail::split_search(ct, h, root, cells, search_depth);
    ub.value = best.cost;
    for (auto& [q, part] : best.parts) {
        GridFunction piece(d);
        for (std::size_t i : part) piece[i] = h[i];
        ub.witness.pieces.emplace_back(q, std::move(piece));
    }
    return ub;
}

struct LowerBound {
    double value = 0.0;
    std::size_t witness_index = 0; // corpus index attaining the pairing sup
};

/// Certified lower bound via duality: max_g |int h g| over corpus members
/// normalized to morrey_norm(g) <= 1 in the paired Morrey space.
inline LowerBound predual_norm_lower(const GridFunction& h, const PredualParams& pp,
                                     const Weight& w, const std::vector<GridFunction>& corpus,
                                     const CubeFamily& fam) {
    pp.validate();
    if (corpus.empty()) throw param_error("predual_norm_lower: empty corpus");
    const MorreyParams mp = pp.paired_morrey();
    const Domain& d = h.domain();
    const double hn = d.cell_volume();
    LowerBound lb;
    for (std::size_t k = 0; k < corpus.size(); ++k) {
        const GridFunction& g = corpus[k];
        if (!g.domain().same_as(d)) throw param_error("predual_norm_lower: corpus domain mismatch");
        const double nrm = morrey_norm(g, w, mp, fam).value;
        if (nrm <= 0) continue;
        double s = 0;
        for (std::size_t i = 0; i < g.size(); ++i) s += h[i] * g[i];
        const double pairing = std::fabs(s) * hn / nrm;
        if (pairing > lb.value) { lb.value = pairing; lb.witness_index = k; }
    }
    return lb;
}

struct PredualNormBracket {
    double upper = 0.0;
    double lower = 0.0;
    Decomposition witness_upper;
    std::size_t lower_witness_index = 0;
};

/// lower <= upper is an internal consistency invariant; violation beyond
/// rounding is flagged as an error.
inline PredualNormBracket predual_bracket(const GridFunction& h, const PredualParams& pp,
                                          const Weight& w, const std::vector<GridFunction>& corpus,
                                          const CubeFamily& fam, int search_depth = 10) {
    PredualNormBracket b;
    auto up = predual_norm_upper(h, pp, w, search_depth);
    auto lo = predual_norm_lower(h, pp, w, corpus, fam);
    b.upper = up.value;
    b.lower = lo.value;
    b.witness_upper = std::move(up.witness);
    b.lower_witness_index = lo.witness_index;
    if (b.lower > b.upper * (1.0 + 1e-6) + 1e-12)
        throw bracket_violation("predual bracket: lower bound exceeds upper bound");
    return b;
}

/// int |g h| <= morrey_norm(g) * predual_norm_upper(h), enforced at conjugate
/// exponents with r + varrho = -n.
inline VerificationReport holder_pairing_check(const GridFunction& g, const GridFunction& h,
                                               const MorreyParams& mp, const PredualParams& pp,
                                               const Weight& w, const CubeFamily& fam,
                                               int search_depth = 10) {
    mp.validate();
    pp.validate();
    if (std::fabs(mp.r + pp.varrho + mp.n) > 1e-12)
        throw param_error("holder_pairing_check: need r + varrho = -n");
    if (std::fabs(pp.p - mp.conjugate()) > 1e-12)
        throw param_error("holder_pairing_check: exponents must be conjugate");
    const Domain& d = g.domain();
    double s = 0;
    for (std::size_t i = 0; i < g.size(); ++i) s += std::fabs(g[i] * h[i]);
    const double lhs = s * d.cell_volume();
    const double ng = morrey_norm(g, w, mp, fam).value;
    const double nh = predual_norm_upper(h, pp, w, search_depth).value;
    const double rhs = ng * nh;
    VerificationReport rep;
    rep.check_id = "holder_pairing";
    rep.anchor = "duality-pairing";
    rep.left = lhs;
    rep.right = rhs;
    rep.constant = rhs > 0 ? lhs / rhs : 0.0;
    rep.pass = lhs <= rhs * (1.0 + 1e-9) + 1e-12;
    rep.witnesses["morrey_norm_g"] = fmt17(ng);
    rep.witnesses["predual_upper_h"] = fmt17(nh);
    return rep;
}

/// Lattice property: |f| <= |g| implies bracket(f) <= C bracket(g); also
/// || |f| || and || f || agree. Reports the empirical constants.
inline VerificationReport lattice_check(const GridFunction& f, const GridFunction& g,
                                        const PredualParams& pp, const Weight& w,
                                        const std::vector<GridFunction>& corpus,
                                        const CubeFamily& fam, int search_depth = 10) {
    for (std::size_t i = 0; i < f.size(); ++i)
        if (std::fabs(f[i]) > std::fabs(g[i]) + 1e-15)
            throw param_error("lattice_check: |f| <= |g| violated");
    const double lo_f = predual_norm_lower(f, pp, w, corpus, fam).value;
    const double up_g = predual_norm_upper(g, pp, w, search_depth).value;
    const double up_f = predual_norm_upper(f, pp, w, search_depth).value;
    const double up_absf = predual_norm_upper(f.abs(), pp, w, search_depth).value;
    VerificationReport rep;
    rep.check_id = "lattice_property";
    rep.anchor = "predual-lattice";
    rep.left = lo_f;
    rep.right = up_g;
    rep.constant = up_g > 0 ? lo_f / up_g : 0.0;
    const bool dominated = lo_f <= up_g * (1.0 + 1e-6) + 1e-12;
    const bool abs_equiv = up_f <= 0 ? up_absf <= 0
                                     : std::fabs(up_absf / up_f - 1.0) <= 1e-9;
    rep.pass = dominated && abs_equiv;
    rep.witnesses["upper_f"] = fmt17(up_f);
    rep.witnesses["upper_abs_f"] = fmt17(up_absf);
    return rep;
}

/// sup of int |f g| over corpus normalized in the Morrey norm; the associated
/// norm of the Morrey space (compares against the predual bracket of f).
inline double associated_norm_morrey(const GridFunction& f, const Weight& w,
                                     const MorreyParams& mp,
                                     const std::vector<GridFunction>& corpus,
                                     const CubeFamily& fam) {
    mp.validate();
    if (corpus.empty()) throw param_error("associated_norm_morrey: empty corpus");
    const double hn = f.domain().cell_volume();
    double best = 0;
    for (const auto& g : corpus) {
        const double nrm = morrey_norm(g, w, mp, fam).value;
        if (nrm <= 0) continue;
        double s = 0;
        for (std::size_t i = 0; i < g.size(); ++i) s += std::fabs(f[i] * g[i]);
        best = std::max(best, s * hn / nrm);
    }
    return best;
}

/// sup of int |f g| over corpus normalized in the predual upper bracket; the
/// associated norm of the predual space (compares against morrey_norm(f)).
inline double associated_norm_predual(const GridFunction& f, const Weight& w,
                                      const PredualParams& pp,
                                      const std::vector<GridFunction>& corpus,
                                      int search_depth = 8) {
    pp.validate();
    if (corpus.empty()) throw param_error("associated_norm_predual: empty corpus");
    const double hn = f.domain().cell_volume();
    double best = 0;
    for (const auto& g : corpus) {
        const double nrm = predual_norm_upper(g, pp, w, search_depth).value;
        if (nrm <= 0) continue;
        double s = 0;
        for (std::size_t i = 0; i < g.size(); ++i) s += std::fabs(f[i] * g[i]);
        best = std::max(best, s * hn / nrm);
    }
    return best;
}

} // namespace morreylab
