#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "morreylab/errors.hpp"
#include "morreylab/grid.hpp"
#include "morreylab/morrey.hpp"
#include "morreylab/weight.hpp"

namespace morreylab {

/// Experiment description loaded from a single JSON file. Unknown keys are
/// errors at every nesting level (fail-closed); the random seed is mandatory.
struct ExperimentConfig {
    // domain
    int n = 1;
    double half_width = 8.0;
    int points_per_axis = 4096;
    // weight
    std::string weight_kind = "constant"; // constant | power | axis_power
    double weight_value = 1.0;
    double weight_alpha = 0.0;
    std::array<double, 2> weight_alphas{0.0, 0.0};
    bool weight_exact_cells = true;
    // parameters
    double morrey_p = 2.0;
    double morrey_r = -0.5;
    double predual_p = 2.0;
    double predual_varrho = -0.5; // defaulted to -n - r at load when absent
    bool predual_varrho_set = false;
    // family
    int j_min = -3;
    int j_max = 6;
    std::string family_variant = "closed";
    // operators & corpus
    std::vector<std::string> operators{"maximal"};
    std::uint64_t seed = 0;
    bool seed_set = false;
    int corpus_size = 20;
    std::vector<std::string> corpus_kinds{"indicator", "bump", "piecewise", "witness"};
    bool corpus_write_samples = false;
    // checks & output
    std::vector<std::string> checks;
    std::string out_dir = "out";

    Domain make_domain(int refine_level = 0) const {
        return Domain(n, half_width, points_per_axis << refine_level);
    }
    Weight make_weight() const {
        if (weight_kind == "constant") return Weight::constant(weight_value, n);
        if (weight_kind == "power") return Weight::power(weight_alpha, n, weight_exact_cells);
        if (weight_kind == "axis_power") return Weight::axis_power(weight_alphas, n, weight_exact_cells);
        throw config_error("config: unknown weight kind '" + weight_kind + "'");
    }
    CubeFamily make_family(const Domain& d) const {
        const CubeVariant v = family_variant == "closed"     ? CubeVariant::closed
                              : family_variant == "half_open" ? CubeVariant::half_open
                                                              : CubeVariant::centered;
        if (family_variant != "closed" && family_variant != "half_open")
            throw config_error("config: family variant must be closed or half_open");
        int jm = j_max;
        const int j_fine = static_cast<int>(std::floor(std::log2(1.0 / d.spacing())));
        if (jm > j_fine) jm = j_fine; // refinement keeps the declared scales valid
        return enumerate_cubes(d, j_min, jm, v);
    }
    MorreyParams make_morrey() const { return MorreyParams(morrey_p, morrey_r, n); }
    PredualParams make_predual() const { return PredualParams(predual_p, predual_varrho, n); }

    void validate() const {
        Domain d = make_domain();
        Weight w = make_weight();
        (void)w;
        make_morrey();
        make_predual();
        if (j_min > j_max) throw config_error("config: j_min > j_max");
        if (std::ldexp(1.0, -j_max + 1) < 2.0 * d.spacing())
            throw config_error("config: j_max finer than the grid resolves");
        if (!seed_set) throw config_error("config: corpus.seed is mandatory");
        if (corpus_size < 0) throw config_error("config: corpus.size must be >= 0");
    }
};

namespace detail {

inline void require_known_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                               const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw config_error("config: unknown key '" + it.key() + "' in " + where);
}

} // namespace detail

inline ExperimentConfig parse_config_json(const nlohmann::json& j) {
    ExperimentConfig c;
    detail::require_known_keys(
        j, {"domain", "weight", "morrey", "predual", "family", "operators", "corpus", "checks", "output"},
        "top level");
    if (j.contains("domain")) {
        const auto& d = j.at("domain");
        detail::require_known_keys(d, {"n", "half_width", "points_per_axis"}, "domain");
        c.n = d.value("n", c.n);
        c.half_width = d.value("half_width", c.half_width);
        c.points_per_axis = d.value("points_per_axis", c.points_per_axis);
    }
    if (j.contains("weight")) {
        const auto& w = j.at("weight");
        detail::require_known_keys(w, {"kind", "value", "alpha", "alphas", "exact_cells"}, "weight");
        c.weight_kind = w.value("kind", c.weight_kind);
        c.weight_value = w.value("value", c.weight_value);
        c.weight_alpha = w.value("alpha", c.weight_alpha);
        if (w.contains("alphas")) {
            const auto& a = w.at("alphas");
            if (!a.is_array() || a.size() > 2) throw config_error("config: weight.alphas must be an array of <= 2");
            for (std::size_t i = 0; i < a.size(); ++i) c.weight_alphas[i] = a[i].get<double>();
        }
        c.weight_exact_cells = w.value("exact_cells", c.weight_exact_cells);
    }
    if (j.contains("morrey")) {
        const auto& m = j.at("morrey");
        detail::require_known_keys(m, {"p", "r"}, "morrey");
        c.morrey_p = m.value("p", c.morrey_p);
        c.morrey_r = m.value("r", c.morrey_r);
    }
    if (j.contains("predual")) {
        const auto& m = j.at("predual");
        detail::require_known_keys(m, {"p", "varrho"}, "predual");
        c.predual_p = m.value("p", c.predual_p);
        if (m.contains("varrho")) {
            c.predual_varrho = m.at("varrho").get<double>();
            c.predual_varrho_set = true;
        }
    }
    if (!c.predual_varrho_set) {
        // pair with the configured Morrey space: conjugate exponent, r + vr = -n
        c.predual_p = c.morrey_p / (c.morrey_p - 1.0);
        c.predual_varrho = -static_cast<double>(c.n) - c.morrey_r;
    }
    if (j.contains("family")) {
        const auto& f = j.at("family");
        detail::require_known_keys(f, {"j_min", "j_max", "variant"}, "family");
        c.j_min = f.value("j_min", c.j_min);
        c.j_max = f.value("j_max", c.j_max);
        c.family_variant = f.value("variant", c.family_variant);
    }
    if (j.contains("operators")) {
        c.operators.clear();
        for (const auto& v : j.at("operators")) c.operators.push_back(v.get<std::string>());
    }
    if (j.contains("corpus")) {
        const auto& k = j.at("corpus");
        detail::require_known_keys(k, {"seed", "size", "kinds", "write_samples"}, "corpus");
        if (k.contains("seed")) {
            c.seed = k.at("seed").get<std::uint64_t>();
            c.seed_set = true;
        }
        c.corpus_size = k.value("size", c.corpus_size);
        if (k.contains("kinds")) {
            c.corpus_kinds.clear();
            for (const auto& v : k.at("kinds")) c.corpus_kinds.push_back(v.get<std::string>());
        }
        c.corpus_write_samples = k.value("write_samples", c.corpus_write_samples);
    }
    if (j.contains("checks")) {
        for (const auto& v : j.at("checks")) c.checks.push_back(v.get<std::string>());
    }
    if (j.contains("output")) {
        const auto& o = j.at("output");
        detail::require_known_keys(o, {"dir"}, "output");
        c.out_dir = o.value("dir", c.out_dir);
    }
    return c;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("config: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw config_error(std::string("config: parse failure: ") + e.what());
    }
    return parse_config_json(j);
}

} // namespace morreylab
