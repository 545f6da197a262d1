// Command-line front end: runs the configured verification checks and emits
// one JSON report per check plus a summary CSV. Exit codes: 0 all checks
// pass, 1 a check failed (reports still written), 2 invalid configuration,
// 3 internal inconsistency (a bracket violation).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "morreylab/parallel.hpp"
#include "morreylab/runner.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 1;
    int refine = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool config_required = true) {
    auto* copt = cmd->add_option("--config", o.config_path, "experiment config (JSON)");
    if (config_required) copt->required();
    cmd->add_option("--out", o.out_dir, "output directory (overrides config)");
    cmd->add_option("--seed", o.seed, "corpus seed (overrides config)")
        ->each([&o](const std::string&) { o.seed_set = true; });
    cmd->add_option("--threads", o.threads, "worker thread count (results are invariant)");
    cmd->add_option("--refine", o.refine, "extra grid refinement levels to re-run");
}

int run_group(const std::string& group, const CommonOpts& o) {
    morreylab::par::set_threads(o.threads);
    morreylab::ExperimentConfig cfg;
    try {
        cfg = morreylab::parse_config_file(o.config_path);
        if (o.seed_set) {
            cfg.seed = o.seed;
            cfg.seed_set = true;
        }
        if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
        cfg.validate();
    } catch (const morreylab::error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }
    try {
        const auto res = morreylab::run_checks(cfg, morreylab::checks_for_group(group), o.refine);
        morreylab::write_reports(res, cfg.out_dir);
        for (const auto& rep : res.reports)
            std::printf("%-28s %s\n", rep.check_id.c_str(), rep.pass ? "PASS" : "FAIL");
        return res.exit_code;
    } catch (const morreylab::config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const morreylab::bracket_violation& e) {
        std::fprintf(stderr, "internal inconsistency: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

int aggregate_reports(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) {
        std::fprintf(stderr, "report: '%s' is not a directory\n", dir.c_str());
        return 2;
    }
    std::vector<std::string> rows;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    bool all_pass = true;
    for (const auto& p : files) {
        std::ifstream in(p);
        nlohmann::json j;
        try {
            in >> j;
        } catch (...) {
            continue;
        }
        if (!j.contains("check")) continue;
        const bool pass = j.value("pass", false);
        all_pass = all_pass && pass;
        char buf[512];
        std::snprintf(buf, sizeof(buf), "%s,%s,%d,%.17g,%.17g,%.17g,%.17g",
                      j.value("check", std::string()).c_str(),
                      j.value("anchor", std::string()).c_str(), pass ? 1 : 0,
                      j.value("left", 0.0), j.value("right", 0.0), j.value("constant", 0.0),
                      j.value("runtime_s", 0.0));
        rows.push_back(buf);
    }
    std::ofstream csv(dir + "/summary.csv");
    csv << morreylab::VerificationReport::csv_header() << "\n";
    for (const auto& r : rows) {
        csv << r << "\n";
        std::printf("%s\n", r.c_str());
    }
    return all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for Muckenhoupt-weighted Morrey spaces"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string report_dir;

    auto* ap = app.add_subcommand("ap", "A_p constants, doubling, reverse doubling");
    add_common(ap, opts);
    auto* norm = app.add_subcommand("norm", "Morrey norm variants, embeddings, witnesses");
    add_common(norm, opts);
    auto* predual = app.add_subcommand("predual", "predual brackets, pairing, lattice, associated norms");
    add_common(predual, opts);
    auto* oper = app.add_subcommand("operator", "singular integral / multiplier / commutator checks");
    add_common(oper, opts);
    auto* extra = app.add_subcommand("extrapolate", "Rubio de Francia and extrapolation checks");
    add_common(extra, opts);
    auto* corpus = app.add_subcommand("corpus", "generate the test corpus and its hash");
    add_common(corpus, opts);
    auto* report = app.add_subcommand("report", "aggregate existing report JSONs into summary.csv");
    report->add_option("--out", report_dir, "directory of report JSONs")->required();

    CLI11_PARSE(app, argc, argv);

    if (report->parsed()) return aggregate_reports(report_dir);
    if (ap->parsed()) return run_group("ap", opts);
    if (norm->parsed()) return run_group("norm", opts);
    if (predual->parsed()) return run_group("predual", opts);
    if (oper->parsed()) return run_group("operator", opts);
    if (extra->parsed()) return run_group("extrapolate", opts);
    if (corpus->parsed()) return run_group("corpus", opts);
    return 2;
}
