#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <deque>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "morreylab/errors.hpp"
#include "morreylab/fft.hpp"
#include "morreylab/grid.hpp"
#include "morreylab/parallel.hpp"

namespace morreylab {

inline constexpr double kPi = 3.14159265358979323846;

// ---- Hardy-Littlewood maximal operator --------------------------------------

namespace detail {

// Sliding-window maximum with half-width r (monotone deque), exact.
inline void window_max(const std::vector<double>& in, std::vector<double>& out, int r) {
    const int n = static_cast<int>(in.size());
    std::deque<int> q;
    int right = -1;
    for (int i = 0; i < n; ++i) {
        while (right < std::min(n - 1, i + r)) {
            ++right;
            while (!q.empty() && in[q.back()] <= in[right]) q.pop_back();
            q.push_back(right);
        }
        while (q.front() < i - r) q.pop_front();
        out[i] = in[q.front()];
    }
}

} // namespace detail

/// (Mf)(y) = max over family cubes containing y of |Q|^{-1} int_Q |f| (clipped
/// measure), always including the degenerate single-cell average so that
/// Mf >= |f| everywhere. Dense-centered families evaluate Q(x,J) at every cell
/// center via exact sliding-window maxima.
inline GridFunction maximal(const GridFunction& f, const CubeFamily& fam) {
    const Domain& d = f.domain();
    const GridFunction af = f.abs();
    GridFunction out = af; // degenerate cell average = |f| itself
    const int N = d.points_per_axis;

    if (fam.dense_centered) {
        std::vector<double> cells(af.samples());
        const PrefixTable tf(d, cells);
        const double h = d.spacing();
        // sub-dyadic radius multipliers keep the max within ~20% of the sup
        // over all centered cubes (pure powers of two lose up to a factor 2)
        std::vector<int> radii;
        for (int J = fam.j_min; J <= fam.j_max; ++J)
            for (double mult : {1.0, 1.25, 1.5, 1.75}) {
                const int r = static_cast<int>(std::floor(mult * std::ldexp(1.0, -J) / h));
                if (r >= 1) radii.push_back(r);
            }
        std::sort(radii.begin(), radii.end());
        radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
        for (const int r : radii) {
            if (d.n == 1) {
                std::vector<double> avg(static_cast<std::size_t>(N)), wmax(static_cast<std::size_t>(N));
                for (int i = 0; i < N; ++i) {
                    IndexBox b;
                    b.lo = {std::max(0, i - r), 0};
                    b.hi = {std::min(N, i + r + 1), 1};
                    avg[i] = tf.box_sum(b) / static_cast<double>(b.count());
                }
                detail::window_max(avg, wmax, r);
                for (int i = 0; i < N; ++i) out[i] = std::max(out[i], wmax[i]);
            } else {
                std::vector<double> avg(d.cell_count());
                for (int j = 0; j < N; ++j)
                    for (int i = 0; i < N; ++i) {
                        IndexBox b;
                        b.lo = {std::max(0, i - r), std::max(0, j - r)};
                        b.hi = {std::min(N, i + r + 1), std::min(N, j + r + 1)};
                        avg[static_cast<std::size_t>(j) * N + i] =
                            tf.box_sum(b) / static_cast<double>(b.count());
                    }
                // separable square-window max: rows then columns
                std::vector<double> rowpass(d.cell_count()), row(static_cast<std::size_t>(N)),
                    rmax(static_cast<std::size_t>(N));
                for (int j = 0; j < N; ++j) {
                    for (int i = 0; i < N; ++i) row[i] = avg[static_cast<std::size_t>(j) * N + i];
                    detail::window_max(row, rmax, r);
                    for (int i = 0; i < N; ++i) rowpass[static_cast<std::size_t>(j) * N + i] = rmax[i];
                }
                for (int i = 0; i < N; ++i) {
                    for (int j = 0; j < N; ++j) row[j] = rowpass[static_cast<std::size_t>(j) * N + i];
                    detail::window_max(row, rmax, r);
                    for (int j = 0; j < N; ++j) {
                        auto& o = out[static_cast<std::size_t>(j) * N + i];
                        o = std::max(o, rmax[j]);
                    }
                }
            }
        }
        return out;
    }

    const PrefixTable tf(d, af.samples());
    for (const auto& q : fam.cubes) {
        const IndexBox b = cell_index_box(d, q);
        if (b.empty()) continue;
        const double avg = tf.box_sum(b) / static_cast<double>(b.count());
        for (int j = b.lo[1]; j < b.hi[1]; ++j)
            for (int i = b.lo[0]; i < b.hi[0]; ++i) {
                auto& o = out[d.n == 1 ? static_cast<std::size_t>(i)
                                       : static_cast<std::size_t>(j) * N + i];
                o = std::max(o, avg);
            }
    }
    return out;
}

// ---- Calderon-Zygmund kernels -----------------------------------------------

/// Off-diagonal kernel with size decay |x-y|^{-n} and Hoelder smoothness of
/// order delta; validity is spot-checked at construction with a fixed seed.
class CZKernel {
  public:
    using Fn = std::function<double(const std::array<double, 2>&, const std::array<double, 2>&)>;

    CZKernel(int n, Fn k, double size_const, double delta, std::string name, double box = 8.0)
        : n_(n), k_(std::move(k)), c2_(size_const), delta_(delta), name_(std::move(name)) {
        if (!(delta > 0) || delta > 1) throw param_error("CZKernel: delta in (0,1]");
        spot_check(box);
    }

    static CZKernel hilbert() {
        return CZKernel(
            1,
            [](const std::array<double, 2>& x, const std::array<double, 2>& y) {
                return 1.0 / (kPi * (x[0] - y[0]));
            },
            8.0 / kPi, 1.0, "hilbert");
    }
    /// Riesz kernel component j in the plane, c (x_j - y_j)/|x-y|^3.
    static CZKernel riesz(int j) {
        if (j != 1 && j != 2) throw param_error("CZKernel::riesz: component 1 or 2");
        return CZKernel(
            2,
            [j](const std::array<double, 2>& x, const std::array<double, 2>& y) {
                const double d0 = x[0] - y[0], d1 = x[1] - y[1];
                const double r = std::hypot(d0, d1);
                return (j == 1 ? d0 : d1) / (2.0 * kPi * r * r * r);
            },
            16.0, 1.0, "riesz" + std::to_string(j));
    }

    int dim() const { return n_; }
    double size_constant() const { return c2_; }
    double smoothness() const { return delta_; }
    const std::string& name() const { return name_; }
    double operator()(const std::array<double, 2>& x, const std::array<double, 2>& y) const {
        return k_(x, y);
    }

  private:
    void spot_check(double box) const {
        std::mt19937_64 rng(0x5eedULL); // fixed seed: reproducible validity check
        auto u = [&](double a, double b) {
            return a + (b - a) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
        };
        for (int t = 0; t < 1000; ++t) {
            std::array<double, 2> x{u(-box, box), n_ == 2 ? u(-box, box) : 0.0};
            std::array<double, 2> y{u(-box, box), n_ == 2 ? u(-box, box) : 0.0};
            double r = n_ == 1 ? std::fabs(x[0] - y[0]) : std::hypot(x[0] - y[0], x[1] - y[1]);
            if (r < 1e-6) continue;
            if (std::fabs(k_(x, y)) > c2_ * std::pow(r, -n_) * (1.0 + 1e-9))
                throw param_error("CZKernel: size condition violated at spot check");
            // smoothness in the first argument under 2|x-x'| <= max(|x-y|,|x'-y|)
            std::array<double, 2> xp = x;
            const double step = 0.2 * r * u(0.0, 1.0);
            xp[0] += step;
            if (n_ == 2) xp[1] += 0.1 * r * u(-1.0, 1.0);
            const double rp = n_ == 1 ? std::fabs(xp[0] - y[0]) : std::hypot(xp[0] - y[0], xp[1] - y[1]);
            const double dx = n_ == 1 ? std::fabs(xp[0] - x[0]) : std::hypot(xp[0] - x[0], xp[1] - x[1]);
            if (rp < 1e-6 || 2.0 * dx > std::max(r, rp)) continue;
            const double lhs = std::fabs(k_(x, y) - k_(xp, y));
            const double rhs = c2_ * std::pow(dx, delta_) / std::pow(r + rp, n_ + delta_);
            if (lhs > rhs * (1.0 + 1e-9))
                throw param_error("CZKernel: smoothness condition violated at spot check");
        }
    }

    int n_;
    Fn k_;
    double c2_;
    double delta_;
    std::string name_;
};

/// Truncated singular integral (T_eps f)(y) = sum_{|y-x| >= eps} K(y,x) f(x) h^n.
inline GridFunction cz_apply(const CZKernel& k, const GridFunction& f, double eps) {
    const Domain& d = f.domain();
    if (k.dim() != d.n) throw param_error("cz_apply: dimension mismatch");
    if (eps < 2.0 * d.spacing()) throw scale_error("cz_apply: eps below 2 cells");
    const double hn = d.cell_volume();
    GridFunction out(d);
    par::for_chunks(f.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t iy = b; iy < e; ++iy) {
            const auto y = d.cell_center(iy);
            double s = 0;
            for (std::size_t ix = 0; ix < f.size(); ++ix) {
                if (f[ix] == 0.0) continue;
                const auto x = d.cell_center(ix);
                const double r = d.n == 1 ? std::fabs(y[0] - x[0]) : std::hypot(y[0] - x[0], y[1] - x[1]);
                if (r >= eps) s += k(y, x) * f[ix];
            }
            out[iy] = s * hn;
        }
    });
    out.check_finite("cz_apply");
    return out;
}

/// Pointwise max over the truncation list of |T_eps f|.
inline GridFunction cz_maximal_truncation(const CZKernel& k, const GridFunction& f,
                                          const std::vector<double>& eps_list) {
    if (eps_list.empty()) throw param_error("cz_maximal_truncation: empty eps list");
    const Domain& d = f.domain();
    for (double e : eps_list)
        if (e < 2.0 * d.spacing() || e > 2.0 * d.half_width)
            throw scale_error("cz_maximal_truncation: eps outside [2h, 2L]");
    GridFunction out(d);
    for (double e : eps_list) {
        const GridFunction t = cz_apply(k, f, e);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(out[i], std::fabs(t[i]));
    }
    return out;
}

// ---- Fourier multipliers ----------------------------------------------------

enum class MultiplierClass { hormander_mikhlin, marcinkiewicz, custom };

/// Symbol on the frequency lattice xi_k = k/(2L), k in [-N/2, N/2).
struct Multiplier {
    using Fn = std::function<std::complex<double>(double, double)>;
    Fn m;
    MultiplierClass cls = MultiplierClass::custom;
    double hm_s = 2.0; // smoothness parameter of the HM class
    std::string name = "custom";

    static Multiplier identity() {
        return {[](double, double) { return std::complex<double>(1.0, 0.0); },
                MultiplierClass::hormander_mikhlin, 2.0, "identity"};
    }
    /// -i sgn(xi); the unpaired Nyquist bin is zeroed.
    static Multiplier hilbert() {
        return {[](double xi, double) {
                    if (xi == 0.0) return std::complex<double>(0.0, 0.0);
                    return std::complex<double>(0.0, xi > 0 ? -1.0 : 1.0);
                },
                MultiplierClass::marcinkiewicz, 2.0, "hilbert"};
    }
    /// chi of the symmetric dyadic block (-2^{j+1},-2^j] u [2^j,2^{j+1}).
    static Multiplier dyadic_block(int j) {
        const double lo = std::ldexp(1.0, j), hi = std::ldexp(1.0, j + 1);
        return {[lo, hi](double xi, double) {
                    const double a = std::fabs(xi);
                    return std::complex<double>(a >= lo && a < hi ? 1.0 : 0.0, 0.0);
                },
                MultiplierClass::marcinkiewicz, 2.0, "block" + std::to_string(j)};
    }
};

inline double lattice_frequency(const Domain& d, int k) {
    const int N = d.points_per_axis;
    const int ks = k < N / 2 ? k : k - N;
    return static_cast<double>(ks) / (2.0 * d.half_width);
}

/// Discrete transform, multiply by the sampled symbol, inverse transform;
/// returns the real part (built-in symbols are Hermitian). m == 1 is the
/// identity to machine precision.
inline GridFunction fourier_multiplier(const Multiplier& mult, const GridFunction& f) {
    const Domain& d = f.domain();
    const int N = d.points_per_axis;
    std::vector<fft::cd> a(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) a[i] = fft::cd(f[i], 0.0);
    if (d.n == 1) {
        fft::forward(a);
        for (int k = 0; k < N; ++k) a[k] *= mult.m(lattice_frequency(d, k), 0.0);
        fft::inverse(a);
    } else {
        fft::transform2d(a, N, -1);
        for (int k1 = 0; k1 < N; ++k1)
            for (int k0 = 0; k0 < N; ++k0)
                a[static_cast<std::size_t>(k1) * N + k0] *=
                    mult.m(lattice_frequency(d, k0), lattice_frequency(d, k1));
        fft::transform2d(a, N, +1);
        const double inv = 1.0 / (static_cast<double>(N) * N);
        for (auto& v : a) v *= inv;
    }
    GridFunction out(d);
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = a[i].real();
    out.check_finite("fourier_multiplier");
    return out;
}

/// sup_R ( R^{s|alpha|-n} sup_{R<|xi|<2R} |D^alpha m| )^{1/s} over representable
/// dyadic annuli, |alpha| <= n, derivatives by lattice finite differences.
/// Advisory class check, not a gate.
inline double hm_condition_estimate(const Multiplier& mult, double s, const Domain& d) {
    if (!(s > 1) || s > 2) throw param_error("hm_condition_estimate: s in (1,2]");
    const int N = d.points_per_axis;
    const double dxi = 1.0 / (2.0 * d.half_width);
    auto mval = [&](int k) { return std::abs(mult.m(k * dxi, 0.0)); };
    auto md1 = [&](int k) { return std::abs(mult.m((k + 1) * dxi, 0.0) - mult.m((k - 1) * dxi, 0.0)) / (2 * dxi); };
    double best = 0;
    for (double R = dxi * 2; 2 * R <= (N / 2 - 2) * dxi; R *= 2) {
        double m0 = 0, m1 = 0;
        for (int k = 2; k < N / 2 - 1; ++k) {
            const double xi = k * dxi;
            if (xi <= R || xi >= 2 * R) continue;
            m0 = std::max({m0, mval(k), mval(-k)});
            m1 = std::max({m1, md1(k), md1(-k)});
        }
        best = std::max(best, std::pow(std::pow(R, -1.0) * m0, 1.0 / s));
        best = std::max(best, std::pow(std::pow(R, s - 1.0) * m1, 1.0 / s));
    }
    return best;
}

/// sup over representable dyadic sets of the total variation of the sampled
/// symbol on [-2^{j+1},-2^j] u [2^j,2^{j+1}] (closed at the lattice level so
/// boundary jumps are counted), computed exactly on the lattice.
inline double marcinkiewicz_variation(const Multiplier& mult, const Domain& d) {
    if (d.n != 1) throw param_error("marcinkiewicz_variation: n=1 only");
    const int N = d.points_per_axis;
    const double dxi = 1.0 / (2.0 * d.half_width);
    const double xi_max = (N / 2 - 1) * dxi;
    double best = 0;
    for (double lo = dxi; 2 * lo <= xi_max; lo *= 2) {
        double var = 0;
        auto add_var = [&](int dir) {
            std::complex<double> prev(0, 0);
            bool started = false;
            for (int k = 1; k <= N / 2 - 1; ++k) {
                const double xi = dir * k * dxi;
                if (std::fabs(xi) < lo || std::fabs(xi) > 2 * lo) continue;
                const auto v = mult.m(xi, 0.0);
                if (started) var += std::abs(v - prev);
                prev = v;
                started = true;
            }
        };
        add_var(+1);
        add_var(-1);
        best = std::max(best, var);
    }
    return best;
}

// ---- Maximal Carleson operator ----------------------------------------------

inline std::vector<double> default_carleson_frequencies(const Domain& d, int count = 64) {
    const double m = d.points_per_axis / (8.0 * d.half_width);
    std::vector<double> xs(count);
    for (int i = 0; i < count; ++i) xs[i] = -m + 2.0 * m * i / (count - 1);
    return xs;
}

/// C_* f(x) = max over eps, xi of | sum_{|x-y|>eps} f(y) e^{2 pi i xi y} / (x-y) h |.
/// Cost O(N^2 |xi_grid|): the expensive operation of the lab.
inline GridFunction carleson_maximal(const GridFunction& f, const std::vector<double>& xi_grid,
                                     const std::vector<double>& eps_list) {
    const Domain& d = f.domain();
    if (d.n != 1) throw param_error("carleson_maximal: n=1 only");
    if (xi_grid.empty() || eps_list.empty()) throw param_error("carleson_maximal: empty grids");
    const int N = d.points_per_axis;
    const double h = d.spacing();
    std::vector<double> eps = eps_list;
    std::sort(eps.begin(), eps.end()); // ascending: term at distance r feeds all eps < r
    const std::size_t E = eps.size();
    // annulus index per center offset: largest k with eps_k < |offset|*h (or -1)
    std::vector<int> ann(static_cast<std::size_t>(N), -1);
    for (int off = 0; off < N; ++off) {
        const double r = off * h;
        int a = -1;
        while (a + 1 < static_cast<int>(E) && eps[static_cast<std::size_t>(a + 1)] <= r) ++a;
        ann[static_cast<std::size_t>(off)] = a;
    }
    // modulation table e^{2 pi i xi y_j} f_j
    std::vector<std::vector<fft::cd>> mod(xi_grid.size(), std::vector<fft::cd>(static_cast<std::size_t>(N)));
    for (std::size_t q = 0; q < xi_grid.size(); ++q)
        for (int j = 0; j < N; ++j) {
            const double ph = 2.0 * kPi * xi_grid[q] * d.axis_center(j);
            mod[q][static_cast<std::size_t>(j)] = fft::cd(std::cos(ph), std::sin(ph)) * f[static_cast<std::size_t>(j)];
        }
    GridFunction out(d);
    par::for_chunks(static_cast<std::size_t>(N), [&](std::size_t b, std::size_t e) {
        std::vector<fft::cd> acc(E);
        for (std::size_t xi_i = b; xi_i < e; ++xi_i) {
            const int i = static_cast<int>(xi_i);
            const double x = d.axis_center(i);
            double best = 0;
            for (std::size_t q = 0; q < xi_grid.size(); ++q) {
                std::fill(acc.begin(), acc.end(), fft::cd(0, 0));
                for (int j = 0; j < N; ++j) {
                    const int off = std::abs(i - j);
                    const int a = ann[static_cast<std::size_t>(off)];
                    if (a < 0) continue;
                    acc[static_cast<std::size_t>(a)] +=
                        mod[q][static_cast<std::size_t>(j)] / (x - d.axis_center(j));
                }
                // suffix sums: S_k = sum over annuli >= k
                fft::cd run(0, 0);
                for (int a = static_cast<int>(E) - 1; a >= 0; --a) {
                    run += acc[static_cast<std::size_t>(a)];
                    best = std::max(best, std::abs(run) * h);
                }
            }
            out[xi_i] = best;
        }
    });
    return out;
}

// ---- BMO and commutators ----------------------------------------------------

struct BmoResult {
    double value = 0.0;
    DyadicCube attained;
};

/// max over family cubes of |Q|^{-1} int_Q |b - avg_Q b|.
inline BmoResult bmo_seminorm(const GridFunction& b, const CubeFamily& fam) {
    const Domain& d = b.domain();
    if (fam.dense_centered) throw param_error("bmo_seminorm: needs an explicit cube family");
    const PrefixTable tb(d, b.samples());
    const int N = d.points_per_axis;
    std::vector<double> vals(fam.cubes.size(), 0.0);
    par::for_chunks(fam.cubes.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t c = lo; c < hi; ++c) {
            const IndexBox box = cell_index_box(d, fam.cubes[c]);
            if (box.empty()) continue;
            const double cnt = static_cast<double>(box.count());
            const double avg = tb.box_sum(box) / cnt;
            double osc = 0;
            for (int j = box.lo[1]; j < box.hi[1]; ++j)
                for (int i = box.lo[0]; i < box.hi[0]; ++i)
                    osc += std::fabs(b[d.n == 1 ? static_cast<std::size_t>(i)
                                                : static_cast<std::size_t>(j) * N + i] -
                                     avg);
            vals[c] = osc / cnt;
        }
    });
    auto [best, arg] = par::max_reduce(vals.size(), [&](std::size_t i) { return vals[i]; });
    return {best, fam.cubes[arg]};
}

/// ln|x| on the lattice; cells touching 0 carry the exact cell average
/// (ln h - 1 at spacing h).
inline GridFunction log_abs_grid(const Domain& d) {
    if (d.n != 1) throw param_error("log_abs_grid: n=1 only");
    GridFunction b(d);
    const double h = d.spacing();
    for (int i = 0; i < d.points_per_axis; ++i) {
        const double a = -d.half_width + i * h;
        b[static_cast<std::size_t>(i)] =
            (a <= 0 && a + h >= 0) ? std::log(h) - 1.0 : std::log(std::fabs(a + 0.5 * h));
    }
    return b;
}

using LinearOperator = std::function<GridFunction(const GridFunction&)>;

/// [b, T](f) = b T(f) - T(b f). T must be linear; nonlinear operators
/// (maximal, maximal truncations, Carleson) are rejected by the callers that
/// resolve operator ids.
inline GridFunction commutator(const GridFunction& b, const LinearOperator& T,
                               const GridFunction& f) {
    return hadamard(b, T(f)) - T(hadamard(b, f));
}

} // namespace morreylab
