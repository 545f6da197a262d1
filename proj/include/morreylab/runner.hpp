#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "morreylab/config.hpp"
#include "morreylab/corpus.hpp"
#include "morreylab/errors.hpp"
#include "morreylab/extrapolation.hpp"
#include "morreylab/grid.hpp"
#include "morreylab/morrey.hpp"
#include "morreylab/operators.hpp"
#include "morreylab/predual.hpp"
#include "morreylab/report.hpp"
#include "morreylab/weight.hpp"

namespace morreylab {

struct ResolvedOperator {
    Operator fn;
    bool linear = false;
    std::string id;
};

inline int finest_scale(const Domain& d) {
    return static_cast<int>(std::floor(std::log2(1.0 / d.spacing())));
}

inline std::vector<double> dyadic_eps_list(const Domain& d) {
    std::vector<double> eps;
    for (double e = 4.0 * d.spacing(); e <= 2.0 * d.half_width; e *= 2.0) eps.push_back(e);
    return eps;
}

/// Operator ids of the CLI config: identity, maximal, hilbert, hilbert_max,
/// riesz1, riesz2, multiplier:<name>, carleson, commutator:<b>:<T>.
inline ResolvedOperator resolve_operator(const std::string& id, const Domain& d) {
    if (id == "identity") return {[](const GridFunction& f) { return f; }, true, id};
    if (id == "maximal") {
        const CubeFamily fam = dense_centered_family(d, -3, finest_scale(d));
        return {[fam](const GridFunction& f) { return maximal(f, fam); }, false, id};
    }
    if (id == "hilbert") {
        const auto k = CZKernel::hilbert();
        const double eps = 4.0 * d.spacing();
        return {[k, eps](const GridFunction& f) { return cz_apply(k, f, eps); }, true, id};
    }
    if (id == "hilbert_max") {
        const auto k = CZKernel::hilbert();
        const auto eps = dyadic_eps_list(d);
        return {[k, eps](const GridFunction& f) { return cz_maximal_truncation(k, f, eps); },
                false, id};
    }
    if (id == "riesz1" || id == "riesz2") {
        const auto k = CZKernel::riesz(id == "riesz1" ? 1 : 2);
        const double eps = 4.0 * d.spacing();
        return {[k, eps](const GridFunction& f) { return cz_apply(k, f, eps); }, true, id};
    }
    if (id.rfind("multiplier:", 0) == 0) {
        const std::string name = id.substr(11);
        Multiplier m = Multiplier::identity();
        if (name == "hilbert") m = Multiplier::hilbert();
        else if (name.rfind("block:", 0) == 0) m = Multiplier::dyadic_block(std::stoi(name.substr(6)));
        else if (name != "identity") throw config_error("unknown multiplier '" + name + "'");
        return {[m](const GridFunction& f) { return fourier_multiplier(m, f); }, true, id};
    }
    if (id == "carleson") {
        const auto xi = default_carleson_frequencies(d);
        const auto eps = dyadic_eps_list(d);
        return {[xi, eps](const GridFunction& f) { return carleson_maximal(f, xi, eps); }, false, id};
    }
    if (id.rfind("commutator:", 0) == 0) {
        const std::string rest = id.substr(11);
        const auto colon = rest.find(':');
        if (colon == std::string::npos) throw config_error("commutator id needs <b>:<T>");
        const std::string bname = rest.substr(0, colon);
        GridFunction b(d);
        if (bname == "log_abs") b = log_abs_grid(d);
        else if (bname == "linear") b = GridFunction::from_function(d, [](double x, double) { return x; });
        else if (bname.rfind("constant:", 0) == 0) {
            const double v = std::stod(bname.substr(9));
            b = GridFunction::from_function(d, [v](double, double) { return v; });
        } else throw config_error("unknown commutator symbol '" + bname + "'");
        const ResolvedOperator inner = resolve_operator(rest.substr(colon + 1), d);
        if (!inner.linear) throw param_error("commutator: inner operator must be linear");
        const Operator T = inner.fn;
        return {[b, T](const GridFunction& f) { return commutator(b, T, f); }, true, id};
    }
    throw config_error("unknown operator id '" + id + "'");
}

namespace checks {

struct Env {
    const ExperimentConfig& cfg;
    Domain domain;
    Weight weight;
    CubeFamily family;
    std::vector<GridFunction> corpus;
    int refine_level = 0;

    std::map<std::string, std::string> grid_meta() const {
        std::map<std::string, std::string> m;
        m["n"] = std::to_string(domain.n);
        m["half_width"] = fmt17(domain.half_width);
        m["points_per_axis"] = std::to_string(domain.points_per_axis);
        m["seed"] = std::to_string(cfg.seed);
        m["weight"] = weight.describe();
        m["j_min"] = std::to_string(family.j_min);
        m["j_max"] = std::to_string(family.j_max);
        return m;
    }
};

inline VerificationReport ap_check(const Env& env) {
    VerificationReport rep;
    rep.check_id = "ap";
    rep.anchor = "ap-constant";
    const double p = env.cfg.morrey_p;
    const CubeFamily prev = enumerate_cubes(env.domain, env.family.j_min, env.family.j_max - 1,
                                            env.family.variant);
    const ApEstimate e_prev = ap_constant(env.weight, p, prev);
    const ApEstimate e = ap_constant(env.weight, p, env.family);
    const double growth = e_prev.value > 0 ? e.value / e_prev.value : 0.0;
    rep.left = e.value;
    rep.right = e_prev.value;
    rep.constant = growth;
    rep.pass = std::isfinite(e.value) && !e.overflow && e.value >= 1.0 - 1e-9 && growth <= 1.10;
    rep.witnesses["attained"] = e.attained.id();
    rep.witnesses["p"] = fmt17(p);
    rep.witnesses["dual_nonintegrable"] = e.dual_nonintegrable ? "true" : "false";
    rep.witnesses["overflow"] = e.overflow ? "true" : "false";
    return rep;
}

inline VerificationReport doubling_check(const Env& env) {
    const double p = env.cfg.morrey_p;
    const DyadicCube Q = env.domain.n == 1 ? DyadicCube::half_open(0, 0) : DyadicCube::half_open2(0, 0, 0);
    const DyadicCube S = env.domain.n == 1 ? DyadicCube::half_open(1, 0) : DyadicCube::half_open2(1, 0, 0);
    const double c = ap_constant(env.weight, p, env.family).value;
    return check_doubling(env.weight, env.domain, Q, S, p, c);
}

/// Restricts the family to cubes whose doubles stay inside the box, then
/// delegates: boundary clipping would corrupt the halving ratios.
inline VerificationReport reverse_doubling_check(const Env& env) {
    const Domain& d = env.domain;
    CubeFamily interior = env.family;
    interior.cubes.clear();
    for (const auto& q : env.family.cubes) {
        bool inside = true;
        for (int a = 0; a < d.n; ++a)
            if (std::fabs(q.center(a)) + q.side() > d.half_width) inside = false;
        if (inside && !cell_index_box(d, q).empty()) interior.cubes.push_back(q);
    }
    return check_reverse_doubling(env.weight, interior);
}

inline VerificationReport norm_variants_check(const Env& env) {
    VerificationReport rep;
    rep.check_id = "norm_variants";
    rep.anchor = "norm-equivalences";
    const Domain& d = env.domain;
    const MorreyParams mp = env.cfg.make_morrey();
    const CubeFamily closed = env.family.variant == CubeVariant::closed
                                  ? env.family
                                  : enumerate_cubes(d, env.family.j_min, env.family.j_max,
                                                    CubeVariant::closed);
    const CubeFamily half = enumerate_cubes(d, env.family.j_min, env.family.j_max,
                                            CubeVariant::half_open);
    const auto centers = default_rational_centers(d, d.n == 1 ? 4 : 16);
    std::vector<Ball> balls;
    for (int J = std::max(env.family.j_min, -2); J <= env.family.j_max; ++J)
        for (const auto& x : centers) balls.emplace_back(d.n, x, std::ldexp(1.0, -J));
    double C = 1.0;
    int used = 0;
    for (const auto& f : env.corpus) {
        if (f.is_zero()) continue;
        const double v[4] = {morrey_norm(f, env.weight, mp, closed).value,
                             morrey_norm_halfopen(f, env.weight, mp, half).value,
                             morrey_norm_centered(f, env.weight, mp, centers, env.family.j_min,
                                                  env.family.j_max)
                                 .value,
                             morrey_norm_balls(f, env.weight, mp, balls)};
        for (int a = 0; a < 4; ++a)
            for (int b = a + 1; b < 4; ++b) {
                if (v[a] <= 0 || v[b] <= 0) continue;
                C = std::max({C, v[a] / v[b], v[b] / v[a]});
            }
        ++used;
    }
    rep.left = C;
    rep.right = C;
    rep.constant = C;
    rep.pass = std::isfinite(C) && used > 0;
    rep.witnesses["corpus_used"] = std::to_string(used);
    return rep;
}

inline VerificationReport indicator_law_check(const Env& env) {
    VerificationReport rep;
    rep.check_id = "indicator_law";
    rep.anchor = "indicator-norm-law";
    const Domain& d = env.domain;
    const Weight one = Weight::constant(1.0, d.n);
    const double p = 2.0;
    double max_rel = 0.0;
    for (int J = 0; J <= 4; ++J) {
        const DyadicCube q0 = d.n == 1 ? DyadicCube::closed(J, 1) : DyadicCube::closed2(J, 1, 1);
        const GridFunction chi = GridFunction::indicator(d, q0);
        const double vol = quadrature_volume(d, q0);
        for (double frac : {0.25, 0.5, 0.75}) {
            const double r = -frac * d.n / p;
            const MorreyParams mp(p, r, d.n);
            const double got = morrey_norm(chi, one, mp, env.family).value;
            const double want = std::pow(vol, -r / d.n);
            max_rel = std::max(max_rel, std::fabs(got - want) / want);
        }
    }
    rep.left = max_rel;
    rep.right = 0.03;
    rep.constant = max_rel;
    rep.pass = max_rel <= 0.03;
    return rep;
}

inline VerificationReport embedding_chain_check(const Env& env) {
    const Domain& d = env.domain;
    const double p = 2.0, pt = 3.0;
    const double r = -static_cast<double>(d.n) / 3.0;
    const GridFunction f = GridFunction::indicator(d, d.n == 1 ? DyadicCube::closed(0, 0)
                                                               : DyadicCube::closed2(0, 0, 0));
    VerificationReport rep = embedding_check(f, env.weight, MorreyParams(p, r, d.n), pt, env.family);
    return rep;
}

inline VerificationReport witness_check(const Env& env) {
    VerificationReport rep;
    rep.check_id = "witness";
    rep.anchor = "nonseparability-witnesses";
    const Domain& d = env.domain;
    const double p = env.cfg.morrey_p;
    const MorreyParams mp(p, -static_cast<double>(d.n) / (2.0 * p), d.n);
    // the closed cube covering Q_l lives at scale l + 1: keep it in the family
    const int lmax = std::min({7, witness_max_depth(d), env.family.j_max - 1});
    if (lmax < 2) throw param_error("witness check: family too coarse for witness cubes");
    const int terms = lmax - 1;
    Rng rng(env.cfg.seed ^ 0x77ULL);
    auto random_signs = [&] {
        std::vector<int> s(static_cast<std::size_t>(terms));
        for (auto& v : s) v = rng.sign();
        return s;
    };
    // series oracle: the covering-cube value of the norm is
    // max_J ( sum_{l covered} (w(Q_l)/w(cover_J))^{(1/p + r/n) p} )^{1/p}
    const auto wcells = env.weight.cell_integrals(d);
    const PrefixTable tw(d, wcells);
    auto wq = [&](const DyadicCube& q) { return tw.box_sum(cell_index_box(d, q)); };
    double series_bound = 1.0;
    for (int l0 = 2; l0 <= lmax; ++l0) {
        const DyadicCube cover = d.n == 1 ? DyadicCube::half_open(l0 - 2, 0)
                                          : DyadicCube::half_open2(l0 - 2, 0, 0);
        const double wc = wq(cover);
        double s = 0;
        for (int l = l0; l <= lmax; ++l)
            s += std::pow(wq(witness_cube(l, d.n)) / wc, (1.0 / p + mp.r / d.n) * p);
        series_bound = std::max(series_bound, std::pow(s, 1.0 / p));
    }
    double max_norm = 0.0, min_dist = 1e300;
    bool all_finite = true;
    std::vector<std::vector<int>> sign_set;
    for (int t = 0; t < 10; ++t) sign_set.push_back(random_signs());
    std::vector<GridFunction> witnesses;
    for (const auto& s : sign_set)
        witnesses.push_back(nonseparability_witness(s, env.weight, mp, d));
    for (std::size_t i = 0; i < witnesses.size(); ++i) {
        const double nv = morrey_norm(witnesses[i], env.weight, mp, env.family).value;
        all_finite = all_finite && std::isfinite(nv);
        max_norm = std::max(max_norm, nv);
        for (std::size_t k = i + 1; k < witnesses.size(); ++k) {
            if (sign_set[i] == sign_set[k]) continue;
            const double dist =
                morrey_norm(witnesses[i] - witnesses[k], env.weight, mp, env.family).value;
            min_dist = std::min(min_dist, dist);
        }
    }
    const double c_common = 0.95;
    rep.left = min_dist;
    rep.right = 2.0 * c_common;
    rep.constant = max_norm;
    rep.pass = all_finite && min_dist >= 2.0 * c_common && max_norm <= series_bound * 1.03;
    rep.witnesses["series_bound"] = fmt17(series_bound);
    rep.witnesses["l_max"] = std::to_string(lmax);
    rep.witnesses["common_c"] = fmt17(c_common);
    return rep;
}

inline VerificationReport bracket_check(const Env& env) {
    VerificationReport rep;
    rep.check_id = "bracket";
    rep.anchor = "predual-bracket";
    const Domain& d = env.domain;
    const PredualParams pp = env.cfg.make_predual();
    // duality corpus: indicators of family cubes at moderate scales + corpus
    std::vector<GridFunction> dual_corpus = env.corpus;
    for (const auto& q : env.family.cubes)
        if (q.J >= 0 && q.J <= 3 && !cell_index_box(d, q).empty())
            dual_corpus.push_back(GridFunction::indicator(d, q));
    double worst_ratio = 0.0;
    for (int J = 1; J <= 3; ++J) {
        const DyadicCube q0 = d.n == 1 ? DyadicCube::closed(J, 1) : DyadicCube::closed2(J, 1, 1);
        const GridFunction h = GridFunction::indicator(d, q0);
        const auto b = predual_bracket(h, pp, env.weight, dual_corpus, env.family, 8);
        if (b.lower > 0) worst_ratio = std::max(worst_ratio, b.upper / b.lower);
    }
    // bracket validity on the corpus (predual_bracket throws on violation)
    for (const auto& h : env.corpus) {
        if (h.is_zero()) continue;
        (void)predual_bracket(h, pp, env.weight, dual_corpus, env.family, 6);
    }
    rep.left = worst_ratio;
    rep.right = 1.25;
    rep.constant = worst_ratio;
    rep.pass = worst_ratio > 0 && worst_ratio <= 1.25;
    return rep;
}

inline VerificationReport holder_check(const Env& env) {
    VerificationReport rep;
    rep.check_id = "holder";
    rep.anchor = "duality-pairing";
    const Domain& d = env.domain;
    const MorreyParams mp = env.cfg.make_morrey();
    const PredualParams pp(mp.conjugate(), -static_cast<double>(d.n) - mp.r, d.n);
    Rng rng(env.cfg.seed ^ 0x1234ULL);
    const CorpusSpec hs{env.cfg.seed ^ 0x9999ULL, 50, false, false, true, false};
    const auto hfuncs = generate_corpus(d, hs);
    int violations = 0;
    double worst_slack = 0.0;
    for (int t = 0; t < 50; ++t) {
        const GridFunction& g = env.corpus[static_cast<std::size_t>(t) % env.corpus.size()];
        const GridFunction& h = hfuncs[static_cast<std::size_t>(t)];
        const auto r = holder_pairing_check(g, h, mp, pp, env.weight, env.family, 6);
        if (!r.pass) ++violations;
        worst_slack = std::max(worst_slack, r.constant);
    }
    rep.left = static_cast<double>(violations);
    rep.right = 0.0;
    rep.constant = worst_slack;
    rep.pass = violations == 0;
    rep.witnesses["pairs"] = "50";
    return rep;
}

inline VerificationReport lattice_checks(const Env& env) {
    VerificationReport rep;
    rep.check_id = "lattice";
    rep.anchor = "predual-lattice";
    const Domain& d = env.domain;
    const PredualParams pp = env.cfg.make_predual();
    const DyadicCube q0 = d.n == 1 ? DyadicCube::closed(1, 1) : DyadicCube::closed2(1, 1, 1);
    const GridFunction g = GridFunction::indicator(d, q0);
    GridFunction f_half = g;
    f_half *= 0.5;
    const GridFunction f_part = restrict(g, d.n == 1 ? DyadicCube::closed(2, 1)
                                                     : DyadicCube::closed2(2, 1, 1));
    std::vector<GridFunction> dual_corpus = env.corpus;
    dual_corpus.push_back(g);
    bool ok = true;
    double worst = 0.0;
    const GridFunction* cases[] = {&g, &f_half, &f_part};
    for (const GridFunction* f : cases) {
        const auto r = lattice_check(*f, g, pp, env.weight, dual_corpus, env.family, 8);
        ok = ok && r.pass;
        worst = std::max(worst, r.constant);
    }
    // cost homogeneity: upper(g/2) = upper(g)/2
    const double ug = predual_norm_upper(g, pp, env.weight, 8).value;
    const double uh = predual_norm_upper(f_half, pp, env.weight, 8).value;
    ok = ok && std::fabs(uh - 0.5 * ug) <= 1e-9 * ug;
    rep.left = worst;
    rep.right = 1.0;
    rep.constant = worst;
    rep.pass = ok;
    return rep;
}

inline VerificationReport associated_check(const Env& env) {
    VerificationReport rep;
    rep.check_id = "associated";
    rep.anchor = "associated-spaces";
    const Domain& d = env.domain;
    const MorreyParams mp = env.cfg.make_morrey();
    const PredualParams pp(mp.conjugate(), -static_cast<double>(d.n) - mp.r, d.n);
    const DyadicCube q0 = d.n == 1 ? DyadicCube::closed(1, 1) : DyadicCube::closed2(1, 1, 1);
    const GridFunction f = GridFunction::indicator(d, q0);
    std::vector<GridFunction> corpus = env.corpus;
    corpus.push_back(f);
    for (const auto& q : env.family.cubes)
        if (q.J >= 0 && q.J <= 3 && !cell_index_box(d, q).empty())
            corpus.push_back(GridFunction::indicator(d, q));
    const double assoc_pred = associated_norm_predual(f, env.weight, pp, corpus, 6);
    const double assoc_mor = associated_norm_morrey(f, env.weight, mp, corpus, env.family);
    const double nm = morrey_norm(f, env.weight, mp, env.family).value;
    const auto br = predual_bracket(f, pp, env.weight, corpus, env.family, 8);
    const bool ok_pred = assoc_pred >= nm / 2.0 && assoc_pred <= 2.0 * nm;
    const bool ok_mor = assoc_mor >= br.lower / 2.0 && assoc_mor <= 2.0 * br.upper;
    // 1-homogeneity of the pairing sup
    GridFunction f2 = f;
    f2 *= 2.0;
    const double assoc2 = associated_norm_predual(f2, env.weight, pp, corpus, 6);
    const bool ok_hom = std::fabs(assoc2 - 2.0 * assoc_pred) <= 1e-9 * (1.0 + assoc2);
    rep.left = assoc_pred;
    rep.right = nm;
    rep.constant = nm > 0 ? assoc_pred / nm : 0.0;
    rep.pass = ok_pred && ok_mor && ok_hom;
    rep.witnesses["assoc_morrey"] = fmt17(assoc_mor);
    rep.witnesses["bracket_lower"] = fmt17(br.lower);
    rep.witnesses["bracket_upper"] = fmt17(br.upper);
    return rep;
}

inline VerificationReport operator_oracle_check(const Env& env) {
    VerificationReport rep;
    rep.check_id = "operator_oracle";
    rep.anchor = "singular-integral-oracle";
    const Domain& d = env.domain;
    if (d.n != 1) throw param_error("operator_oracle: n=1 only");
    const auto k = CZKernel::hilbert();
    const double eps = 4.0 * d.spacing();
    const GridFunction chi = GridFunction::indicator_box(d, {-1.0, 0.0}, {1.0, 0.0});
    const GridFunction t = cz_apply(k, chi, eps);
    double max_rel = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double y = d.cell_center(i)[0];
        if (std::fabs(y - 1.0) < 0.25 || std::fabs(y + 1.0) < 0.25) continue;
        const double oracle = (1.0 / kPi) * std::log(std::fabs((y + 1.0) / (y - 1.0)));
        const double err = std::fabs(t[i] - oracle);
        if (std::fabs(oracle) > 1e-9) max_rel = std::max(max_rel, err / std::fabs(oracle));
        else if (err > 1e-9) max_rel = std::max(max_rel, 1.0);
    }
    // cross-validation: multiplier realization on band-limited packets
    const Multiplier mh = Multiplier::hilbert();
    double max_l2 = 0.0;
    for (double nu : {2.0, 4.0, 8.0}) {
        const GridFunction f = GridFunction::from_function(d, [nu](double x, double) {
            return std::exp(-x * x / 2.0) * std::cos(2.0 * kPi * nu * x / 8.0);
        });
        const GridFunction a = cz_apply(k, f, eps);
        const GridFunction b = fourier_multiplier(mh, f);
        double num = 0, den = 0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            num += (a[i] - b[i]) * (a[i] - b[i]);
            den += b[i] * b[i];
        }
        max_l2 = std::max(max_l2, std::sqrt(num / den));
    }
    // antisymmetry: even input gives odd output
    const GridFunction even = GridFunction::from_function(
        d, [](double x, double) { return std::exp(-x * x); });
    const GridFunction te = cz_apply(k, even, eps);
    double asym = 0.0;
    const int N = d.points_per_axis;
    for (int i = 0; i < N / 2; ++i)
        asym = std::max(asym, std::fabs(te[static_cast<std::size_t>(i)] +
                                        te[static_cast<std::size_t>(N - 1 - i)]));
    rep.left = max_rel;
    rep.right = 0.05;
    rep.constant = max_l2;
    rep.pass = max_rel < 0.05 && max_l2 < 0.10 && asym < 1e-10;
    rep.witnesses["multiplier_vs_pv_l2"] = fmt17(max_l2);
    rep.witnesses["antisymmetry"] = fmt17(asym);
    return rep;
}

inline VerificationReport bmo_check(const Env& env) {
    VerificationReport rep;
    rep.check_id = "bmo";
    rep.anchor = "bmo-seminorm";
    const Domain& d = env.domain;
    const GridFunction cst = GridFunction::from_function(d, [](double, double) { return 3.25; });
    const double v0 = bmo_seminorm(cst, env.family).value;
    const GridFunction lin = GridFunction::from_function(d, [](double x, double) { return x; });
    const auto blin = bmo_seminorm(lin, env.family);
    double largest_side = 0.0;
    for (const auto& q : env.family.cubes) {
        const IndexBox b = cell_index_box(d, q);
        if (!b.empty())
            largest_side = std::max(largest_side,
                                    static_cast<double>(b.hi[0] - b.lo[0]) * d.spacing());
    }
    const double want = largest_side / 4.0;
    bool ok = v0 <= 1e-12 && std::fabs(blin.value - want) <= 0.02 * want;
    double vlog = 0.0;
    if (d.n == 1) {
        vlog = bmo_seminorm(log_abs_grid(d), env.family).value;
        ok = ok && std::isfinite(vlog) && vlog > 0;
    }
    rep.left = blin.value;
    rep.right = want;
    rep.constant = vlog;
    rep.pass = ok;
    rep.witnesses["constant_case"] = fmt17(v0);
    rep.witnesses["log_seminorm"] = fmt17(vlog);
    return rep;
}

inline VerificationReport commutator_check(const Env& env) {
    VerificationReport rep;
    rep.check_id = "commutator";
    rep.anchor = "bmo-commutator";
    const Domain& d = env.domain;
    if (d.n != 1) throw param_error("commutator check: n=1 only");
    const auto hil = resolve_operator("hilbert", d);
    const GridFunction f = GridFunction::indicator_box(d, {0.0, 0.0}, {1.0, 0.0});
    const GridFunction bc = GridFunction::from_function(d, [](double, double) { return 2.5; });
    const double zero_norm = commutator(bc, hil.fn, f).max_abs();
    const GridFunction b = log_abs_grid(d);
    double max_ratio = 0.0, min_ratio = 1e300;
    for (int t = 0; t < 10; ++t) {
        const double shift = -3.0 + 0.5 * t;
        const GridFunction ft = GridFunction::indicator_box(d, {shift, 0.0}, {shift + 1.0, 0.0});
        const GridFunction c = commutator(b, hil.fn, ft);
        const double ratio = lp_norm_weighted(c, env.weight, 2.0) /
                             lp_norm_weighted(ft, env.weight, 2.0);
        max_ratio = std::max(max_ratio, ratio);
        min_ratio = std::min(min_ratio, ratio);
    }
    rep.left = zero_norm;
    rep.right = 1e-12;
    rep.constant = max_ratio;
    rep.pass = zero_norm <= 1e-12 && std::isfinite(max_ratio) && max_ratio > 0;
    rep.witnesses["min_ratio"] = fmt17(min_ratio);
    return rep;
}

inline VerificationReport rdf_check(const Env& env) {
    VerificationReport rep;
    rep.check_id = "rdf";
    rep.anchor = "rubio-de-francia";
    const Domain& d = env.domain;
    const CubeFamily dense = dense_centered_family(d, -3, finest_scale(d));
    // empirical maximal norm in unweighted L_2, inflated 10%
    NormSpec spec;
    spec.space = NormSpace::weighted_lp;
    spec.w = Weight::constant(1.0, d.n);
    spec.lp = 2.0;
    std::vector<GridFunction> corpus;
    for (const auto& f : env.corpus)
        if (!f.is_zero() && corpus.size() < 10) corpus.push_back(f);
    const Operator M = [&dense](const GridFunction& f) { return maximal(f, dense); };
    const double m_est = estimate_operator_norm(M, spec, corpus).estimate;
    RdFConfig cfg{12, 1.1 * std::max(1.0, m_est), dense};
    bool i_ok = true, ii_ok = true, iii_ok = true;
    double worst_slack = 0.0, worst_tail = 0.0;
    for (const auto& h : corpus) {
        const auto diag = rubio_de_francia_diagnostics(h, cfg);
        const GridFunction ah = h.abs();
        for (std::size_t i = 0; i < ah.size(); ++i)
            if (diag.R[i] < ah[i]) i_ok = false;
        const double nr = lp_norm_weighted(diag.R, spec.w, 2.0);
        const double nh = lp_norm_weighted(ah, spec.w, 2.0);
        const double slack = nr / (2.0 * nh);
        worst_slack = std::max(worst_slack, slack);
        if (slack > 1.05) ii_ok = false;
        for (std::size_t i = 0; i < ah.size(); ++i) {
            const double rhs = 2.0 * cfg.M_norm * diag.R[i] + diag.tail[i];
            if (diag.MR[i] > rhs) iii_ok = false;
            if (rhs > 0) worst_tail = std::max(worst_tail, diag.tail[i] / rhs);
        }
    }
    rep.left = worst_slack;
    rep.right = 1.05;
    rep.constant = cfg.M_norm;
    rep.pass = i_ok && ii_ok && iii_ok && worst_tail < 0.01;
    rep.witnesses["max_tail_fraction"] = fmt17(worst_tail);
    rep.witnesses["m_norm"] = fmt17(cfg.M_norm);
    return rep;
}

inline VerificationReport extrapolate_check(const Env& env) {
    const Domain& d = env.domain;
    std::string op_id = "maximal";
    for (const auto& o : env.cfg.operators)
        if (o == "maximal" || o == "hilbert") { op_id = o; break; }
    const auto T = resolve_operator(op_id, d);
    PairFamily F;
    F.provenance = "(|T phi|, |phi|) for phi in corpus, T = " + op_id;
    for (const auto& f : env.corpus) {
        if (f.is_zero()) continue;
        F.pairs.emplace_back(T.fn(f).abs(), f.abs());
        if (F.pairs.size() >= 12) break;
    }
    std::vector<ExtrapolationTarget> targets;
    for (double p : {1.5, 2.0, 3.0})
        for (double frac : {0.25, 0.5, 0.75}) {
            const double r = -frac * d.n / p;
            targets.push_back({p, r, env.weight,
                               "p=" + fmt17(p) + ",r=" + fmt17(r) + ",w=" + env.weight.describe()});
        }
    const std::vector<Weight> hyp{Weight::constant(1.0, d.n), Weight::power(0.4, d.n),
                                  Weight::power(-0.4, d.n)};
    VerificationReport rep = extrapolation_check(F, 2.0, targets, hyp, env.family);
    rep.witnesses["operator"] = op_id;
    return rep;
}

inline VerificationReport predual_bound_check(const Env& env) {
    const Domain& d = env.domain;
    std::string op_id = "maximal";
    for (const auto& o : env.cfg.operators)
        if (o == "maximal" || o == "hilbert" || o == "hilbert_max") { op_id = o; break; }
    const auto T = resolve_operator(op_id, d);
    const double kappa = op_id == "maximal" ? 1.0 : 1.0 / kPi;
    const PredualParams pp = env.cfg.make_predual();
    const DyadicCube q0 = d.n == 1 ? DyadicCube::half_open(0, 0) : DyadicCube::half_open2(0, 0, 0);
    std::vector<GridFunction> corpus;
    for (const auto& f : env.corpus)
        if (!f.is_zero() && corpus.size() < 6) corpus.push_back(f);
    return predual_boundedness_check(T.fn, op_id, pp, env.weight, corpus, env.family, q0, kappa, 6);
}

inline VerificationReport corpus_check(const Env& env, std::string* corpus_json) {
    VerificationReport rep;
    rep.check_id = "corpus";
    rep.anchor = "corpus-generation";
    rep.left = static_cast<double>(env.corpus.size());
    rep.right = static_cast<double>(env.cfg.corpus_size);
    rep.constant = 0.0;
    rep.pass = env.corpus.size() == static_cast<std::size_t>(env.cfg.corpus_size);
    const std::string hash = corpus_hash(env.corpus);
    rep.witnesses["corpus_hash"] = hash;
    if (corpus_json) {
        std::string j = "{\n  \"seed\": " + std::to_string(env.cfg.seed) + ",\n  \"hash\": \"" +
                        hash + "\",\n  \"functions\": [";
        for (std::size_t i = 0; i < env.corpus.size(); ++i) {
            j += i ? ",\n" : "\n";
            j += "    {\"index\": " + std::to_string(i) + ", \"hash\": \"" +
                 fnv1a_hex(env.corpus[i].samples()) + "\"";
            if (env.cfg.corpus_write_samples) {
                j += ", \"samples\": [";
                for (std::size_t s = 0; s < env.corpus[i].size(); ++s)
                    j += (s ? "," : "") + fmt17(env.corpus[i][s]);
                j += "]";
            }
            j += "}";
        }
        j += env.corpus.empty() ? "]\n}\n" : "\n  ]\n}\n";
        *corpus_json = j;
    }
    return rep;
}

} // namespace checks

struct RunResult {
    std::vector<VerificationReport> reports;
    std::vector<std::pair<std::string, std::string>> files; // extra artifacts
    int exit_code = 0;
};

inline std::vector<std::string> checks_for_group(const std::string& group) {
    if (group == "ap") return {"ap", "doubling", "reverse_doubling"};
    if (group == "norm") return {"norm_variants", "indicator_law", "embedding", "witness"};
    if (group == "predual") return {"bracket", "holder", "lattice", "associated"};
    if (group == "operator") return {"operator_oracle", "bmo", "commutator"};
    if (group == "extrapolate") return {"rdf", "extrapolate", "predual_bound"};
    if (group == "corpus") return {"corpus"};
    if (group == "all")
        return {"ap",      "doubling", "reverse_doubling", "norm_variants", "indicator_law",
                "embedding", "witness", "bracket",          "holder",        "lattice",
                "associated", "operator_oracle", "bmo",     "commutator",    "rdf",
                "extrapolate", "predual_bound",  "corpus"};
    throw config_error("unknown check group '" + group + "'");
}

/// Executes the requested checks in declared order. Bracket violations abort
/// with exit code 3; any failed check yields exit code 1 (reports are still
/// produced); success is 0.
inline RunResult run_checks(const ExperimentConfig& cfg, std::vector<std::string> wanted,
                            int refine_levels = 0) {
    cfg.validate();
    if (!cfg.checks.empty()) {
        std::vector<std::string> filtered;
        for (const auto& c : cfg.checks)
            if (std::find(wanted.begin(), wanted.end(), c) != wanted.end()) filtered.push_back(c);
        wanted = filtered;
    }
    RunResult out;
    for (int level = 0; level <= refine_levels; ++level) {
        checks::Env env{cfg,
                        cfg.make_domain(level),
                        cfg.make_weight(),
                        {},
                        {},
                        level};
        env.family = cfg.make_family(env.domain);
        CorpusSpec cs;
        cs.seed = cfg.seed;
        cs.size = cfg.corpus_size;
        cs.indicators = cs.bumps = cs.piecewise = cs.witnesses = false;
        for (const auto& k : cfg.corpus_kinds) {
            if (k == "indicator") cs.indicators = true;
            else if (k == "bump") cs.bumps = true;
            else if (k == "piecewise") cs.piecewise = true;
            else if (k == "witness") cs.witnesses = true;
            else throw config_error("unknown corpus kind '" + k + "'");
        }
        env.corpus = generate_corpus(env.domain, cs);

        for (const auto& name : wanted) {
            const auto t0 = std::chrono::steady_clock::now();
            VerificationReport rep;
            try {
                if (name == "ap") rep = checks::ap_check(env);
                else if (name == "doubling") rep = checks::doubling_check(env);
                else if (name == "reverse_doubling") rep = checks::reverse_doubling_check(env);
                else if (name == "norm_variants") rep = checks::norm_variants_check(env);
                else if (name == "indicator_law") rep = checks::indicator_law_check(env);
                else if (name == "embedding") rep = checks::embedding_chain_check(env);
                else if (name == "witness") rep = checks::witness_check(env);
                else if (name == "bracket") rep = checks::bracket_check(env);
                else if (name == "holder") rep = checks::holder_check(env);
                else if (name == "lattice") rep = checks::lattice_checks(env);
                else if (name == "associated") rep = checks::associated_check(env);
                else if (name == "operator_oracle") rep = checks::operator_oracle_check(env);
                else if (name == "bmo") rep = checks::bmo_check(env);
                else if (name == "commutator") rep = checks::commutator_check(env);
                else if (name == "rdf") rep = checks::rdf_check(env);
                else if (name == "extrapolate") rep = checks::extrapolate_check(env);
                else if (name == "predual_bound") rep = checks::predual_bound_check(env);
                else if (name == "corpus") {
                    std::string cj;
                    rep = checks::corpus_check(env, &cj);
                    out.files.emplace_back(level == 0 ? "corpus.json"
                                                      : "corpus@refine" + std::to_string(level) + ".json",
                                           cj);
                } else
                    throw config_error("unknown check '" + name + "'");
            } catch (const bracket_violation& e) {
                rep.check_id = name;
                rep.pass = false;
                rep.witnesses["error"] = e.what();
                rep.grid_meta = env.grid_meta();
                out.reports.push_back(rep);
                out.exit_code = 3;
                return out;
            }
            rep.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            rep.grid_meta = env.grid_meta();
            if (level > 0) {
                rep.check_id += "@refine" + std::to_string(level);
                // stability against the previous level
                for (const auto& prev : out.reports) {
                    const std::string base =
                        level == 1 ? name : name + "@refine" + std::to_string(level - 1);
                    if (prev.check_id == base && prev.constant != 0.0) {
                        rep.witnesses["refine_change"] =
                            fmt17(std::fabs(rep.constant / prev.constant - 1.0));
                        break;
                    }
                }
            }
            out.reports.push_back(rep);
        }
    }
    for (const auto& r : out.reports)
        if (!r.pass && out.exit_code == 0) out.exit_code = 1;
    return out;
}

inline void write_reports(const RunResult& res, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    for (const auto& rep : res.reports) {
        std::string fname = rep.check_id;
        for (auto& ch : fname)
            if (ch == ':' || ch == '/' || ch == '@') ch = '_';
        std::ofstream f(out_dir + "/" + fname + ".json");
        f << rep.to_json();
    }
    for (const auto& [name, content] : res.files) {
        std::ofstream f(out_dir + "/" + name);
        f << content;
    }
    std::ofstream csv(out_dir + "/summary.csv");
    csv << VerificationReport::csv_header() << "\n";
    for (const auto& rep : res.reports) csv << rep.to_csv_row() << "\n";
}

/// Concatenated report JSONs with the runtime lines stripped: the
/// determinism fingerprint (identical across reruns and thread counts).
inline std::string deterministic_fingerprint(const RunResult& res) {
    std::string all;
    for (const auto& rep : res.reports) {
        const std::string j = rep.to_json();
        std::istringstream in(j);
        std::string line;
        while (std::getline(in, line))
            if (line.find("\"runtime_s\"") == std::string::npos) all += line + "\n";
    }
    for (const auto& [name, content] : res.files) all += name + "\n" + content;
    return all;
}

} // namespace morreylab
