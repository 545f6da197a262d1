#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "morreylab/errors.hpp"
#include "morreylab/grid.hpp"
#include "morreylab/report.hpp"

namespace morreylab {

enum class WeightKind { constant, power, axis_power, grid };

/// Positive a.e. weight with closed-form or grid evaluation. Power kinds keep
/// exact per-cell integration rules on cells touching the singular set; all
/// other cells use cell-center quadrature. Weights are immutable.
class Weight {
  public:
    static Weight constant(double c, int n = 1) {
        if (!(c > 0)) throw param_error("Weight: constant must be positive");
        Weight w(n, WeightKind::constant);
        w.c_ = c;
        return w;
    }
    /// w(x) = |x|^alpha (radial), locally integrable iff alpha > -n.
    static Weight power(double alpha, int n = 1, bool exact_cells = true) {
        if (!(alpha > -n)) throw param_error("Weight: power exponent must exceed -n");
        Weight w(n, WeightKind::power);
        w.alpha_ = alpha;
        w.exact_cells_ = exact_cells;
        return w;
    }
    /// w(x) = prod |x_i|^{alpha_i}, integrable iff every alpha_i > -1.
    static Weight axis_power(std::array<double, 2> alphas, int n, bool exact_cells = true) {
        for (int a = 0; a < n; ++a)
            if (!(alphas[a] > -1)) throw param_error("Weight: axis exponent must exceed -1");
        Weight w(n, WeightKind::axis_power);
        w.alphas_ = alphas;
        w.exact_cells_ = exact_cells;
        return w;
    }
    static Weight grid(const GridFunction& g) {
        for (std::size_t i = 0; i < g.size(); ++i)
            if (!(g[i] > 0)) throw param_error("Weight: grid weight must be positive everywhere");
        Weight w(g.domain().n, WeightKind::grid);
        w.grid_ = std::make_shared<GridFunction>(g);
        return w;
    }

    int dim() const { return n_; }
    WeightKind kind() const { return kind_; }
    bool integrable() const { return integrable_; }
    bool exact_cells() const { return exact_cells_; }
    double power_exponent() const { return alpha_; }

    double value(double x0, double x1 = 0.0) const {
        switch (kind_) {
            case WeightKind::constant: return c_;
            case WeightKind::power: {
                const double r = n_ == 1 ? std::fabs(x0) : std::hypot(x0, x1);
                return std::pow(r, alpha_);
            }
            case WeightKind::axis_power: {
                double v = std::pow(std::fabs(x0), alphas_[0]);
                if (n_ == 2) v *= std::pow(std::fabs(x1), alphas_[1]);
                return v;
            }
            case WeightKind::grid: return 0; // grid weights are cell data, not pointwise rules
        }
        return 0;
    }

    /// w^{1-p'}. Non-integrable dual exponents are flagged (integrable() ==
    /// false), not rejected; their singular cells fall back to cell-center
    /// quadrature.
    Weight dual(double p) const {
        if (!(p > 1) || !std::isfinite(p)) throw param_error("dual weight: need 1 < p < inf");
        const double e = 1.0 - p / (p - 1.0); // 1 - p'
        Weight w(n_, kind_);
        w.exact_cells_ = exact_cells_;
        switch (kind_) {
            case WeightKind::constant: w.c_ = std::pow(c_, e); break;
            case WeightKind::power:
                w.alpha_ = alpha_ * e;
                w.integrable_ = w.alpha_ > -n_;
                break;
            case WeightKind::axis_power:
                w.alphas_ = {alphas_[0] * e, n_ == 2 ? alphas_[1] * e : 0.0};
                w.integrable_ = w.alphas_[0] > -1 && (n_ == 1 || w.alphas_[1] > -1);
                break;
            case WeightKind::grid: {
                GridFunction g(grid_->domain());
                for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::pow((*grid_)[i], e);
                w.grid_ = std::make_shared<GridFunction>(std::move(g));
                break;
            }
        }
        return w;
    }

    /// Per-cell integrals of the weight over the domain lattice. Power kinds
    /// with exact_cells use the closed-form antiderivative on cells touching
    /// the singular set (when the exponent is integrable there); everything
    /// else is cell-center quadrature.
    std::vector<double> cell_integrals(const Domain& d) const {
        if (d.n != n_) throw param_error("Weight: domain dimension mismatch");
        std::vector<double> out(d.cell_count(), 0.0);
        const double h = d.spacing();
        const double hn = d.cell_volume();
        switch (kind_) {
            case WeightKind::constant:
                for (auto& v : out) v = c_ * hn;
                return out;
            case WeightKind::grid: {
                if (!grid_->domain().same_as(d)) throw param_error("Weight: grid/domain mismatch");
                for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*grid_)[i] * hn;
                return out;
            }
            case WeightKind::power: {
                if (n_ == 1) {
                    for (int i = 0; i < d.points_per_axis; ++i)
                        out[i] = axis_factor(d, i, alpha_);
                    return out;
                }
                for (std::size_t idx = 0; idx < out.size(); ++idx) {
                    const int i = static_cast<int>(idx % d.points_per_axis);
                    const int j = static_cast<int>(idx / d.points_per_axis);
                    const double a0 = -d.half_width + i * h, a1 = -d.half_width + j * h;
                    const bool singular = a0 <= 0 && a0 + h >= 0 && a1 <= 0 && a1 + h >= 0;
                    if (exact_cells_ && singular)
                        out[idx] = radial_corner_cell(a0, a1, h, alpha_);
                    else {
                        auto c = d.cell_center(idx);
                        out[idx] = value(c[0], c[1]) * hn;
                    }
                }
                return out;
            }
            case WeightKind::axis_power: {
                std::vector<double> f0(d.points_per_axis), f1;
                for (int i = 0; i < d.points_per_axis; ++i) f0[i] = axis_factor(d, i, alphas_[0]);
                if (n_ == 1) return f0;
                f1.resize(d.points_per_axis);
                for (int j = 0; j < d.points_per_axis; ++j) f1[j] = axis_factor(d, j, alphas_[1]);
                for (std::size_t idx = 0; idx < out.size(); ++idx)
                    out[idx] = f0[idx % d.points_per_axis] * f1[idx / d.points_per_axis];
                return out;
            }
        }
        return out;
    }

    /// Closed-form integral of the weight over (Q cap domain) minus the
    /// rho-neighbourhood of the singular set. Supports power (n=1) and
    /// axis_power kinds; used by the A_p scan for non-integrable duals.
    double truncated_cube_measure(const Domain& d, const DyadicCube& q, double rho) const {
        if (kind_ == WeightKind::power && n_ == 1)
            return truncated_interval(std::max(q.lo(0), -d.half_width),
                                      std::min(q.hi(0), d.half_width), alpha_, rho);
        if (kind_ == WeightKind::axis_power) {
            double v = 1.0;
            for (int a = 0; a < n_; ++a) {
                const double lo = std::max(q.lo(a), -d.half_width);
                const double hi = std::min(q.hi(a), d.half_width);
                const double e = alphas_[a];
                v *= e > -1 ? interval_integral(lo, hi, e) : truncated_interval(lo, hi, e, rho);
            }
            return v;
        }
        throw param_error("truncated_cube_measure: unsupported weight kind");
    }

    std::string describe() const {
        switch (kind_) {
            case WeightKind::constant: return "constant " + std::to_string(c_);
            case WeightKind::power: return "|x|^" + std::to_string(alpha_);
            case WeightKind::axis_power:
                return "axis_power(" + std::to_string(alphas_[0]) +
                       (n_ == 2 ? "," + std::to_string(alphas_[1]) : "") + ")";
            case WeightKind::grid: return "grid";
        }
        return "?";
    }

  private:
    Weight(int n, WeightKind k) : n_(n), kind_(k) {
        if (n != 1 && n != 2) throw param_error("Weight: dimension must be 1 or 2");
    }

    // integral of |t|^e over [a,b], e > -1
    static double interval_integral(double a, double b, double e) {
        if (b <= a) return 0.0;
        auto F = [e](double t) { return std::pow(t, e + 1.0) / (e + 1.0); };
        if (a >= 0) return F(b) - F(a);
        if (b <= 0) return F(-a) - F(-b);
        return F(-a) + F(b);
    }
    // integral of |t|^e over [a,b] minus (-rho, rho); valid for any e
    static double truncated_interval(double a, double b, double e, double rho) {
        if (b <= a) return 0.0;
        auto F = [e](double t) {
            return e == -1.0 ? std::log(t) : std::pow(t, e + 1.0) / (e + 1.0);
        };
        double v = 0.0;
        const double pl = std::max(a, rho);
        if (b > pl) v += F(b) - F(pl);
        const double nh = std::min(b, -rho);
        if (nh > a) v += F(-a) - F(-nh);
        return v;
    }
    // one axis factor of a cell integral: closed form on the cell touching 0
    double axis_factor(const Domain& d, int i, double e) const {
        const double h = d.spacing();
        const double a = -d.half_width + i * h, b = a + h;
        const bool singular = a <= 0 && b >= 0;
        if (singular && exact_cells_) {
            if (e > -1) return interval_integral(a, b, e);
            // non-integrable: finite cell-center fallback
        }
        return std::pow(std::fabs(a + 0.5 * h), e) * h;
    }
    // recursive 4-way subdivision for the radial cell at the origin corner
    static double radial_corner_cell(double a0, double a1, double h, double alpha, int depth = 22) {
        if (depth == 0 || !(alpha < 0)) {
            const double x = a0 + 0.5 * h, y = a1 + 0.5 * h;
            return std::pow(std::hypot(x, y), alpha) * h * h;
        }
        const double hh = 0.5 * h;
        double s = 0;
        for (int q = 0; q < 4; ++q) {
            const double b0 = a0 + (q & 1) * hh, b1 = a1 + (q >> 1) * hh;
            const bool sing = b0 <= 0 && b0 + hh >= 0 && b1 <= 0 && b1 + hh >= 0;
            if (sing)
                s += radial_corner_cell(b0, b1, hh, alpha, depth - 1);
            else {
                const double x = b0 + 0.5 * hh, y = b1 + 0.5 * hh;
                s += std::pow(std::hypot(x, y), alpha) * hh * hh;
            }
        }
        return s;
    }

    int n_;
    WeightKind kind_;
    double c_ = 1.0;
    double alpha_ = 0.0;
    std::array<double, 2> alphas_{0.0, 0.0};
    std::shared_ptr<const GridFunction> grid_;
    bool exact_cells_ = true;
    bool integrable_ = true;
};

/// w(region) = integral of w over region (clipped to the domain).
inline double weight_measure(const Weight& w, const Domain& d, const DyadicCube& q) {
    const auto cells = w.cell_integrals(d);
    const IndexBox b = cell_index_box(d, q);
    if (b.empty()) throw region_error("weight_measure: cube contains no cell centers");
    double s = 0;
    for (int j = b.lo[1]; j < b.hi[1]; ++j)
        for (int i = b.lo[0]; i < b.hi[0]; ++i)
            s += cells[d.n == 1 ? static_cast<std::size_t>(i)
                                : static_cast<std::size_t>(j) * d.points_per_axis + i];
    return s;
}

inline double weight_measure(const Weight& w, const Domain& d, const Ball& ball) {
    const auto cells = w.cell_integrals(d);
    double s = 0;
    std::size_t hit = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        auto c = d.cell_center(i);
        double r2 = (c[0] - ball.center[0]) * (c[0] - ball.center[0]);
        if (d.n == 2) r2 += (c[1] - ball.center[1]) * (c[1] - ball.center[1]);
        if (r2 <= ball.radius * ball.radius) { s += cells[i]; ++hit; }
    }
    if (hit == 0) throw region_error("weight_measure: ball contains no cell centers");
    return s;
}

inline double weight_measure(const Weight& w, const Domain& d) {
    const auto cells = w.cell_integrals(d);
    double s = 0;
    for (double v : cells) s += v;
    return s;
}

struct ApEstimate {
    double p = 2.0;
    double value = 1.0;
    DyadicCube attained;
    bool overflow = false;
    bool dual_nonintegrable = false;
    int j_min = 0, j_max = 0;
};

/// Lower estimate of [w]_{A_p} over the cube family:
/// max_Q (w(Q)/|Q|) (w^{1-p'}(Q)/|Q|)^{p-1}, |Q| the quadrature measure of
/// Q cap domain. When the dual exponent is not locally integrable the dual
/// mass is resolved only down to the family's finest scale 2^{-j_max}, so the
/// estimate diverges under family refinement instead of overflowing at once.
inline ApEstimate ap_constant(const Weight& w, double p, const CubeFamily& fam) {
    if (!(p > 1) || !std::isfinite(p)) throw param_error("ap_constant: need 1 < p < inf");
    if (fam.cubes.empty()) throw param_error("ap_constant: empty family");
    const Domain& d = fam.domain;
    const Weight dw = w.dual(p);
    const auto cw = w.cell_integrals(d);
    const PrefixTable tw(d, cw);
    ApEstimate est;
    est.p = p;
    est.j_min = fam.j_min;
    est.j_max = fam.j_max;
    est.dual_nonintegrable = !dw.integrable();
    const double rho = std::ldexp(1.0, -fam.j_max);

    std::vector<double> vals(fam.cubes.size(), 0.0);
    if (dw.integrable()) {
        const auto cwd = dw.cell_integrals(d);
        const PrefixTable td(d, cwd);
        par::for_chunks(fam.cubes.size(), [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                const IndexBox box = cell_index_box(d, fam.cubes[i]);
                if (box.empty()) continue;
                const double vol = static_cast<double>(box.count()) * d.cell_volume();
                vals[i] = (tw.box_sum(box) / vol) * std::pow(td.box_sum(box) / vol, p - 1.0);
            }
        });
    } else {
        bool closed_form = true;
        try {
            (void)dw.truncated_cube_measure(d, fam.cubes[0], rho);
        } catch (const param_error&) {
            closed_form = false;
        }
        if (closed_form) {
            par::for_chunks(fam.cubes.size(), [&](std::size_t b, std::size_t e) {
                for (std::size_t i = b; i < e; ++i) {
                    const IndexBox box = cell_index_box(d, fam.cubes[i]);
                    if (box.empty()) continue;
                    const double vol = static_cast<double>(box.count()) * d.cell_volume();
                    const double wdq = dw.truncated_cube_measure(d, fam.cubes[i], rho);
                    vals[i] = (tw.box_sum(box) / vol) * std::pow(wdq / vol, p - 1.0);
                }
            });
        } else {
            // no closed form for this kind: grid-scale cell-center fallback
            const auto cwd = dw.cell_integrals(d);
            const PrefixTable td(d, cwd);
            par::for_chunks(fam.cubes.size(), [&](std::size_t b, std::size_t e) {
                for (std::size_t i = b; i < e; ++i) {
                    const IndexBox box = cell_index_box(d, fam.cubes[i]);
                    if (box.empty()) continue;
                    const double vol = static_cast<double>(box.count()) * d.cell_volume();
                    vals[i] = (tw.box_sum(box) / vol) * std::pow(td.box_sum(box) / vol, p - 1.0);
                }
            });
        }
    }
    auto [best, arg] = par::max_reduce(vals.size(), [&](std::size_t i) { return vals[i]; });
    est.value = best;
    est.attained = fam.cubes[arg];
    for (double v : vals)
        if (!std::isfinite(v) || v > 1e300) est.overflow = true;
    return est;
}

/// w(Q)/w(S) <= c (|Q|/|S|)^p for S inside Q, with c the supplied A_p
/// estimate and |.| the quadrature measure.
inline VerificationReport check_doubling(const Weight& w, const Domain& d, const DyadicCube& Q,
                                         const DyadicCube& S, double p, double ap_estimate) {
    if (!S.geometrically_inside(Q)) throw param_error("check_doubling: S not contained in Q");
    const double wq = weight_measure(w, d, Q);
    const double ws = weight_measure(w, d, S);
    const double volq = quadrature_volume(d, Q);
    const double vols = quadrature_volume(d, S);
    VerificationReport rep;
    rep.check_id = "doubling";
    rep.anchor = "doubling";
    rep.left = wq / ws;
    rep.right = ap_estimate * std::pow(volq / vols, p);
    rep.constant = ap_estimate;
    rep.pass = rep.left <= rep.right * (1.0 + 1e-9);
    rep.witnesses["Q"] = Q.id();
    rep.witnesses["S"] = S.id();
    return rep;
}

/// sup over the family of w(Q)/w(2Q); the reverse doubling condition asks for
/// a uniform bound 1 - delta < 1. Requires 2Q to meet the domain for every Q.
inline VerificationReport check_reverse_doubling(const Weight& w, const CubeFamily& fam) {
    const Domain& d = fam.domain;
    const auto cells = w.cell_integrals(d);
    const PrefixTable tw(d, cells);
    double sup = 0.0;
    std::string attained;
    for (const auto& q : fam.cubes) {
        const DyadicCube q2 = q.dilated(2.0);
        const IndexBox b2 = cell_index_box(d, q2);
        if (b2.empty()) throw param_error("check_reverse_doubling: 2Q misses the domain");
        const double wq = tw.box_sum(cell_index_box(d, q));
        const double w2q = tw.box_sum(b2);
        if (w2q <= 0 || wq <= 0) continue;
        if (wq / w2q > sup) { sup = wq / w2q; attained = q.id(); }
    }
    VerificationReport rep;
    rep.check_id = "reverse_doubling";
    rep.anchor = "reverse-doubling";
    rep.left = sup;
    rep.right = 1.0;
    rep.constant = 1.0 - sup;
    rep.pass = sup > 0 && sup < 1.0;
    rep.witnesses["attained"] = attained;
    return rep;
}

/// Dense n=1 oracle: the same product over every contiguous cell range.
inline double ap_constant_dense(const Weight& w, double p, const Domain& d) {
    if (d.n != 1) throw param_error("ap_constant_dense: n=1 only");
    const Weight dw = w.dual(p);
    if (!dw.integrable()) throw param_error("ap_constant_dense: dual weight not integrable");
    const auto cw = w.cell_integrals(d);
    const auto cwd = dw.cell_integrals(d);
    const int N = d.points_per_axis;
    std::vector<double> pw(N + 1, 0.0), pd(N + 1, 0.0);
    for (int i = 0; i < N; ++i) { pw[i + 1] = pw[i] + cw[i]; pd[i + 1] = pd[i] + cwd[i]; }
    const double h = d.spacing();
    std::vector<double> rowbest(N, 0.0);
    par::for_chunks(static_cast<std::size_t>(N), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            double best = 0;
            for (int j = static_cast<int>(i) + 1; j <= N; ++j) {
                const double vol = (j - static_cast<int>(i)) * h;
                const double v = ((pw[j] - pw[i]) / vol) * std::pow((pd[j] - pd[i]) / vol, p - 1.0);
                if (v > best) best = v;
            }
            rowbest[i] = best;
        }
    });
    double best = 0;
    for (double v : rowbest) best = std::max(best, v);
    return best;
}

} // namespace morreylab
