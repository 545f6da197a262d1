#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "morreylab/errors.hpp"
#include "morreylab/parallel.hpp"

namespace morreylab {

/// Uniform lattice over the truncated box [-L, L]^n with cell-centered,
/// piecewise-constant quadrature semantics. Cell i on an axis covers
/// [-L + i*h, -L + (i+1)*h) and carries the sample at its center.
struct Domain {
    int n = 1;
    double half_width = 8.0;
    int points_per_axis = 256;

    Domain() = default;
    Domain(int dim, double L, int N) : n(dim), half_width(L), points_per_axis(N) {
        if (n != 1 && n != 2) throw param_error("Domain: dimension must be 1 or 2");
        if (!(L > 0)) throw param_error("Domain: half_width must be positive");
        if (N < 8 || (N & (N - 1)) != 0)
            throw param_error("Domain: points_per_axis must be a power of two >= 8");
    }

    double spacing() const { return 2.0 * half_width / points_per_axis; }
    std::size_t cell_count() const {
        std::size_t N = static_cast<std::size_t>(points_per_axis);
        return n == 1 ? N : N * N;
    }
    double axis_center(int i) const { return -half_width + (i + 0.5) * spacing(); }
    /// Center of the flattened cell index (row-major, idx = iy*N + ix in 2-d).
    std::array<double, 2> cell_center(std::size_t idx) const {
        if (n == 1) return {axis_center(static_cast<int>(idx)), 0.0};
        const int N = points_per_axis;
        return {axis_center(static_cast<int>(idx % N)), axis_center(static_cast<int>(idx / N))};
    }
    double cell_volume() const { return n == 1 ? spacing() : spacing() * spacing(); }
    bool same_as(const Domain& o) const {
        return n == o.n && half_width == o.half_width && points_per_axis == o.points_per_axis;
    }
    /// Domain at twice the resolution (same box).
    Domain refined() const { return Domain(n, half_width, points_per_axis * 2); }
};

enum class CubeVariant { closed, half_open, centered };

/// Q_{J,M} = 2^{-J}(M + [-1,1]^n)       (closed;   side 2^{-J+1}, center 2^{-J}M)
/// Q~_{J,M} = 2^{-J}(M + [0,1]^n)       (half_open; side 2^{-J})
/// Q(x,J)  = x + 2^{-J}[-1,1]^n         (centered;  side 2^{-J+1})
struct DyadicCube {
    int n = 1;
    int J = 0;
    std::array<std::int64_t, 2> M{0, 0};
    CubeVariant variant = CubeVariant::closed;
    std::array<double, 2> x{0.0, 0.0}; // centered variant only

    static DyadicCube closed(int J, std::int64_t m0) { return {1, J, {m0, 0}, CubeVariant::closed, {}}; }
    static DyadicCube closed2(int J, std::int64_t m0, std::int64_t m1) {
        return {2, J, {m0, m1}, CubeVariant::closed, {}};
    }
    static DyadicCube half_open(int J, std::int64_t m0) { return {1, J, {m0, 0}, CubeVariant::half_open, {}}; }
    static DyadicCube half_open2(int J, std::int64_t m0, std::int64_t m1) {
        return {2, J, {m0, m1}, CubeVariant::half_open, {}};
    }
    static DyadicCube centered(std::array<double, 2> center, int J, int dim) {
        return {dim, J, {0, 0}, CubeVariant::centered, center};
    }

    double scale() const { return std::ldexp(1.0, -J); } // 2^{-J}
    double lo(int axis) const {
        const double s = scale();
        switch (variant) {
            case CubeVariant::closed: return s * (M[axis] - 1);
            case CubeVariant::half_open: return s * M[axis];
            case CubeVariant::centered: return x[axis] - s;
        }
        return 0;
    }
    double hi(int axis) const {
        const double s = scale();
        switch (variant) {
            case CubeVariant::closed: return s * (M[axis] + 1);
            case CubeVariant::half_open: return s * (M[axis] + 1);
            case CubeVariant::centered: return x[axis] + s;
        }
        return 0;
    }
    double side() const { return variant == CubeVariant::half_open ? scale() : 2.0 * scale(); }
    double center(int axis) const {
        switch (variant) {
            case CubeVariant::closed: return scale() * M[axis];
            case CubeVariant::half_open: return scale() * (M[axis] + 0.5);
            case CubeVariant::centered: return x[axis];
        }
        return 0;
    }
    /// Upper face inclusion: closed for closed/centered cubes, open for half-open.
    bool upper_inclusive() const { return variant != CubeVariant::half_open; }

    /// Concentric dilate d*Q (closed bounds), d > 0.
    DyadicCube dilated(double d) const;

    std::string id() const {
        std::string s = "J=" + std::to_string(J);
        if (variant == CubeVariant::centered) {
            s += " x=(" + std::to_string(x[0]) + (n == 2 ? "," + std::to_string(x[1]) : "") + ")";
        } else {
            s += " M=(" + std::to_string(M[0]) + (n == 2 ? "," + std::to_string(M[1]) : "") + ")";
        }
        s += variant == CubeVariant::closed ? " closed"
             : variant == CubeVariant::half_open ? " half_open" : " centered";
        return s;
    }

    bool geometrically_inside(const DyadicCube& outer) const {
        for (int a = 0; a < n; ++a)
            if (lo(a) < outer.lo(a) || hi(a) > outer.hi(a)) return false;
        return true;
    }
};

inline DyadicCube DyadicCube::dilated(double d) const {
    DyadicCube q;
    q.n = n;
    q.variant = CubeVariant::centered;
    q.x = {center(0), n == 2 ? center(1) : 0.0};
    // the centered variant stores the half-side as 2^{-J}, so the dilate must
    // keep a dyadic half-side (all uses are powers of two on dyadic cubes)
    const double half = d * side() / 2.0;
    q.J = static_cast<int>(std::lround(-std::log2(half)));
    if (std::ldexp(1.0, -q.J) != half)
        throw param_error("DyadicCube::dilated: dilate factor must keep dyadic bounds");
    return q;
}

struct CubeGeometry {
    std::array<double, 2> center;
    double side;
};

/// Exact (unclipped) center and side length for the cube's variant.
inline CubeGeometry cube_geometry(const DyadicCube& c) {
    return {{c.center(0), c.n == 2 ? c.center(1) : 0.0}, c.side()};
}

struct Ball {
    int n = 1;
    std::array<double, 2> center{0.0, 0.0};
    double radius = 1.0;
    Ball(int dim, std::array<double, 2> c, double r) : n(dim), center(c), radius(r) {
        if (!(r > 0)) throw param_error("Ball: radius must be positive");
    }
};

/// Axis-aligned box of cell indices, half-open in index space.
struct IndexBox {
    std::array<int, 2> lo{0, 0};
    std::array<int, 2> hi{0, 0}; // exclusive
    bool empty() const { return lo[0] >= hi[0] || lo[1] >= hi[1]; }
    std::size_t count() const {
        if (empty()) return 0;
        return static_cast<std::size_t>(hi[0] - lo[0]) * static_cast<std::size_t>(hi[1] - lo[1]);
    }
};

namespace detail {

// Smallest cell index whose center is >= lo. Bounds of dyadic cubes and cell
// centers are exactly representable, so the integrality test is exact.
inline int first_center_at_or_above(const Domain& d, double lo) {
    const double t = (lo + d.half_width) / d.spacing() - 0.5;
    return static_cast<int>(std::ceil(t));
}
inline int last_center_below(const Domain& d, double hi, bool inclusive) {
    const double u = (hi + d.half_width) / d.spacing() - 0.5;
    const double fu = std::floor(u);
    if (!inclusive && fu == u) return static_cast<int>(fu) - 1;
    return static_cast<int>(fu);
}

} // namespace detail

/// Cell-index box of the cells whose centers lie in the cube (clipped to the
/// domain). Membership is decided by the cell center.
inline IndexBox cell_index_box(const Domain& d, const DyadicCube& c) {
    if (c.n != d.n) throw param_error("cell_index_box: dimension mismatch");
    IndexBox b;
    for (int a = 0; a < d.n; ++a) {
        int i0 = detail::first_center_at_or_above(d, c.lo(a));
        int i1 = detail::last_center_below(d, c.hi(a), c.upper_inclusive()) + 1;
        b.lo[a] = std::max(i0, 0);
        b.hi[a] = std::min(i1, d.points_per_axis);
    }
    if (d.n == 1) { b.lo[1] = 0; b.hi[1] = 1; }
    return b;
}

/// Real-valued function sampled one value per cell.
class GridFunction {
  public:
    GridFunction() = default;
    explicit GridFunction(const Domain& d) : dom_(d), s_(d.cell_count(), 0.0) {}
    GridFunction(const Domain& d, std::vector<double> samples) : dom_(d), s_(std::move(samples)) {
        if (s_.size() != d.cell_count()) throw param_error("GridFunction: sample count != N^n");
    }

    static GridFunction from_function(const Domain& d, const std::function<double(double, double)>& f) {
        GridFunction g(d);
        par::for_chunks(g.size(), [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                auto c = d.cell_center(i);
                g.s_[i] = f(c[0], c[1]);
            }
        });
        g.check_finite("from_function");
        return g;
    }

    static GridFunction indicator(const Domain& d, const DyadicCube& c) {
        GridFunction g(d);
        const IndexBox b = cell_index_box(d, c);
        g.fill_box(b, 1.0);
        return g;
    }
    /// chi_{[a0,b0] x [a1,b1]} by cell-center membership (closed box).
    static GridFunction indicator_box(const Domain& d, std::array<double, 2> a, std::array<double, 2> b) {
        GridFunction g(d);
        for (std::size_t i = 0; i < g.size(); ++i) {
            auto c = d.cell_center(i);
            bool in = c[0] >= a[0] && c[0] <= b[0];
            if (d.n == 2) in = in && c[1] >= a[1] && c[1] <= b[1];
            g.s_[i] = in ? 1.0 : 0.0;
        }
        return g;
    }

    const Domain& domain() const { return dom_; }
    std::size_t size() const { return s_.size(); }
    double operator[](std::size_t i) const { return s_[i]; }
    double& operator[](std::size_t i) { return s_[i]; }
    const std::vector<double>& samples() const { return s_; }
    std::vector<double>& samples() { return s_; }

    bool is_zero() const {
        for (double v : s_) if (v != 0.0) return false;
        return true;
    }
    double max_abs() const {
        double m = 0;
        for (double v : s_) m = std::max(m, std::fabs(v));
        return m;
    }

    GridFunction& operator+=(const GridFunction& o) { bin(o, [](double& a, double b) { a += b; }); return *this; }
    GridFunction& operator-=(const GridFunction& o) { bin(o, [](double& a, double b) { a -= b; }); return *this; }
    GridFunction& operator*=(double c) { for (double& v : s_) v *= c; return *this; }
    friend GridFunction operator+(GridFunction a, const GridFunction& b) { a += b; return a; }
    friend GridFunction operator-(GridFunction a, const GridFunction& b) { a -= b; return a; }
    friend GridFunction operator*(double c, GridFunction a) { a *= c; return a; }

    GridFunction abs() const {
        GridFunction g(dom_);
        for (std::size_t i = 0; i < size(); ++i) g.s_[i] = std::fabs(s_[i]);
        return g;
    }
    /// Pointwise product on the grid.
    friend GridFunction hadamard(const GridFunction& a, const GridFunction& b) {
        if (!a.dom_.same_as(b.dom_)) throw param_error("hadamard: domain mismatch");
        GridFunction g(a.dom_);
        for (std::size_t i = 0; i < a.size(); ++i) g.s_[i] = a.s_[i] * b.s_[i];
        return g;
    }

    void check_finite(const char* who) const {
        for (double v : s_)
            if (!std::isfinite(v)) throw error(std::string(who) + ": non-finite sample");
    }

  private:
    void bin(const GridFunction& o, void (*op)(double&, double)) {
        if (!dom_.same_as(o.dom_)) throw param_error("GridFunction: domain mismatch");
        for (std::size_t i = 0; i < s_.size(); ++i) op(s_[i], o.s_[i]);
    }
    void fill_box(const IndexBox& b, double v) {
        if (b.empty()) return;
        const int N = dom_.points_per_axis;
        for (int j = b.lo[1]; j < b.hi[1]; ++j)
            for (int i = b.lo[0]; i < b.hi[0]; ++i)
                s_[dom_.n == 1 ? static_cast<std::size_t>(i)
                               : static_cast<std::size_t>(j) * N + i] = v;
    }

    Domain dom_;
    std::vector<double> s_;
};

/// Summed-area table over one cell array; cube sums in O(1) (1-d) / O(1) (2-d).
class PrefixTable {
  public:
    PrefixTable(const Domain& d, const std::vector<double>& cells) : dom_(d) {
        const int N = d.points_per_axis;
        if (d.n == 1) {
            p_.assign(N + 1, 0.0);
            for (int i = 0; i < N; ++i) p_[i + 1] = p_[i] + cells[i];
        } else {
            p_.assign(static_cast<std::size_t>(N + 1) * (N + 1), 0.0);
            for (int j = 0; j < N; ++j)
                for (int i = 0; i < N; ++i)
                    at(i + 1, j + 1) = cells[static_cast<std::size_t>(j) * N + i] + at(i, j + 1) +
                                       at(i + 1, j) - at(i, j);
        }
    }
    double box_sum(const IndexBox& b) const {
        if (b.empty()) return 0.0;
        if (dom_.n == 1) return p_[b.hi[0]] - p_[b.lo[0]];
        return at(b.hi[0], b.hi[1]) - at(b.lo[0], b.hi[1]) - at(b.hi[0], b.lo[1]) +
               at(b.lo[0], b.lo[1]);
    }

  private:
    double& at(int i, int j) { return p_[static_cast<std::size_t>(j) * (dom_.points_per_axis + 1) + i]; }
    double at(int i, int j) const { return p_[static_cast<std::size_t>(j) * (dom_.points_per_axis + 1) + i]; }
    Domain dom_;
    std::vector<double> p_;
};

/// Finite slice of the dyadic lattice: all cubes at scales J in [j_min, j_max]
/// whose interior meets the domain box. Deterministic order: J ascending, M
/// lexicographic. A dense-centered family stands for Q(x,J) at every cell
/// center (used by the maximal operator; cubes are not materialized).
struct CubeFamily {
    Domain domain;
    int j_min = 0;
    int j_max = 0;
    CubeVariant variant = CubeVariant::closed;
    bool dense_centered = false;
    std::vector<DyadicCube> cubes;
};

inline CubeFamily enumerate_cubes(const Domain& d, int j_min, int j_max,
                                  CubeVariant variant = CubeVariant::closed) {
    if (j_min > j_max) throw param_error("enumerate_cubes: j_min > j_max");
    if (variant == CubeVariant::centered)
        throw param_error("enumerate_cubes: use dense_centered_family for centered cubes");
    if (std::ldexp(1.0, -j_max + 1) < 2.0 * d.spacing())
        throw scale_error("enumerate_cubes: finest requested cube spans fewer than 2 cells");
    CubeFamily fam{d, j_min, j_max, variant, false, {}};
    const double L = d.half_width;
    for (int J = j_min; J <= j_max; ++J) {
        const double s = std::ldexp(1.0, -J);
        const std::int64_t mspan = static_cast<std::int64_t>(std::ceil(L / s)) + 2;
        auto interior_meets = [&](std::int64_t m0, std::int64_t m1) {
            DyadicCube q = variant == CubeVariant::closed
                               ? (d.n == 1 ? DyadicCube::closed(J, m0) : DyadicCube::closed2(J, m0, m1))
                               : (d.n == 1 ? DyadicCube::half_open(J, m0)
                                           : DyadicCube::half_open2(J, m0, m1));
            for (int a = 0; a < d.n; ++a)
                if (!(q.lo(a) < L && q.hi(a) > -L)) return std::pair<bool, DyadicCube>{false, q};
            return std::pair<bool, DyadicCube>{true, q};
        };
        if (d.n == 1) {
            for (std::int64_t m = -mspan; m <= mspan; ++m) {
                auto [ok, q] = interior_meets(m, 0);
                if (ok) fam.cubes.push_back(q);
            }
        } else {
            for (std::int64_t m1 = -mspan; m1 <= mspan; ++m1)
                for (std::int64_t m0 = -mspan; m0 <= mspan; ++m0) {
                    auto [ok, q] = interior_meets(m0, m1);
                    if (ok) fam.cubes.push_back(q);
                }
        }
    }
    return fam;
}

inline CubeFamily dense_centered_family(const Domain& d, int j_min, int j_max) {
    if (j_min > j_max) throw param_error("dense_centered_family: j_min > j_max");
    if (std::ldexp(1.0, -j_max + 1) < 2.0 * d.spacing())
        throw scale_error("dense_centered_family: finest requested cube spans fewer than 2 cells");
    CubeFamily fam{d, j_min, j_max, CubeVariant::centered, true, {}};
    return fam;
}

/// Coarsest-scale closed cube centered at the origin covering the whole box.
inline DyadicCube covering_cube(const Domain& d) {
    int J = 0;
    while (std::ldexp(1.0, -J) < d.half_width) --J;
    return d.n == 1 ? DyadicCube::closed(J, 0) : DyadicCube::closed2(J, 0, 0);
}

// ---- quadrature -----------------------------------------------------------

inline double integrate(const GridFunction& f) {
    const double hn = f.domain().cell_volume();
    double s = 0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f[i];
    return hn * s;
}

inline double integrate(const GridFunction& f, const DyadicCube& c) {
    const Domain& d = f.domain();
    const IndexBox b = cell_index_box(d, c);
    if (b.empty()) throw region_error("integrate: cube contains no cell centers");
    const int N = d.points_per_axis;
    double s = 0;
    for (int j = b.lo[1]; j < b.hi[1]; ++j)
        for (int i = b.lo[0]; i < b.hi[0]; ++i)
            s += f[d.n == 1 ? static_cast<std::size_t>(i) : static_cast<std::size_t>(j) * N + i];
    return d.cell_volume() * s;
}

inline double integrate(const GridFunction& f, const Ball& ball) {
    const Domain& d = f.domain();
    if (ball.n != d.n) throw param_error("integrate: ball dimension mismatch");
    double s = 0;
    std::size_t hit = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        auto c = d.cell_center(i);
        double r2 = (c[0] - ball.center[0]) * (c[0] - ball.center[0]);
        if (d.n == 2) r2 += (c[1] - ball.center[1]) * (c[1] - ball.center[1]);
        if (r2 <= ball.radius * ball.radius) { s += f[i]; ++hit; }
    }
    if (hit == 0) throw region_error("integrate: ball contains no cell centers");
    return d.cell_volume() * s;
}

/// Samples outside the cube set to zero; inside unchanged.
inline GridFunction restrict(const GridFunction& f, const DyadicCube& c) {
    const Domain& d = f.domain();
    const IndexBox b = cell_index_box(d, c);
    GridFunction g(d);
    const int N = d.points_per_axis;
    for (int j = b.lo[1]; j < b.hi[1]; ++j)
        for (int i = b.lo[0]; i < b.hi[0]; ++i) {
            const std::size_t idx = d.n == 1 ? static_cast<std::size_t>(i)
                                             : static_cast<std::size_t>(j) * N + i;
            g[idx] = f[idx];
        }
    return g;
}

/// Quadrature (clipped) Lebesgue measure of the cube: cell count times h^n.
inline double quadrature_volume(const Domain& d, const DyadicCube& c) {
    return static_cast<double>(cell_index_box(d, c).count()) * d.cell_volume();
}

} // namespace morreylab
