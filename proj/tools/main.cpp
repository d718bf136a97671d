// qbell: spin-lattice Bell locality certification toolkit.
//
// Subcommands: chsh-scan, clustering-fit, quench, bell-certify, local-bound,
// self-test. Exit codes: 0 success, 2 config error, 3 numeric/convergence
// failure, 4 certificate violation found.

#include <cmath>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"

#include "qbell/experiments.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitViolation = 4;

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
};

qbell::ExperimentConfig load_config(const CommonArgs& args) {
    auto cfg = qbell::ExperimentConfig::load(args.config_path);
    if (args.seed) {
        cfg.seed = *args.seed;
        cfg.seesaw.seed = *args.seed;
    }
    if (args.out) cfg.out_dir = *args.out;
    return cfg;
}

std::string out_path(const qbell::ExperimentConfig& cfg, const std::string& name) {
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

int run_chsh_scan(const CommonArgs& args) {
    const auto cfg = load_config(args);
    const auto res = qbell::cmd_chsh_scan(cfg);
    qbell::write_chsh_csv(out_path(cfg, "chsh_scan.csv"), res.rows);
    qbell::write_samples_csv(out_path(cfg, "chsh_scan_samples.csv"), res.samples);
    std::vector<nlohmann::json> rows{{{"fit", qbell::fit_to_json(res.fit)}}};
    bool all_ok = true;
    for (const auto& row : res.rows) {
        rows.push_back({{"site_a", row.site_a},
                        {"site_b", row.site_b},
                        {"r", row.r},
                        {"chsh_sup", row.chsh_sup},
                        {"epsilon", row.epsilon},
                        {"satisfied", row.satisfied}});
        all_ok = all_ok && row.satisfied;
    }
    qbell::write_jsonl(out_path(cfg, "chsh_scan.jsonl"), res.record, rows);
    std::cout << "chsh-scan: " << res.rows.size() << " pairs, C="
              << qbell::format_g17(res.fit.C) << " lambda="
              << qbell::format_g17(res.fit.lambda)
              << (all_ok ? ", all satisfied" : ", VIOLATIONS found") << "\n";
    return all_ok ? kExitOk : kExitViolation;
}

int run_clustering_fit(const CommonArgs& args) {
    const auto cfg = load_config(args);
    const auto res = qbell::cmd_clustering_fit(cfg);
    qbell::write_samples_csv(out_path(cfg, "clustering_samples.csv"), res.samples);
    std::vector<nlohmann::json> rows{
        {{"fit", qbell::fit_to_json(res.fit)}, {"dominance_ok", res.dominance_ok}}};
    qbell::write_jsonl(out_path(cfg, "clustering_fit.jsonl"), res.record, rows);
    std::cout << "clustering-fit: C=" << qbell::format_g17(res.fit.C)
              << " lambda=" << qbell::format_g17(res.fit.lambda)
              << " residual=" << qbell::format_g17(res.fit.residual)
              << " dominance=" << (res.dominance_ok ? "ok" : "VIOLATED") << "\n";
    return res.dominance_ok ? kExitOk : kExitNumeric;
}

int run_quench(const CommonArgs& args) {
    const auto cfg = load_config(args);
    const auto res = qbell::cmd_quench(cfg);
    qbell::write_quench_csv(out_path(cfg, "quench_grid.csv"), res.cells);
    qbell::write_samples_csv(out_path(cfg, "quench_samples.csv"), res.samples);
    std::vector<nlohmann::json> rows{{{"fit", qbell::fit_to_json(res.fit)}}};
    bool all_ok = true;
    for (const auto& c : res.cells) {
        rows.push_back({{"t", c.t},
                        {"r", c.r},
                        {"value", c.value},
                        {"bound", c.bound},
                        {"dominated", c.dominated}});
        all_ok = all_ok && c.dominated;
    }
    qbell::write_jsonl(out_path(cfg, "quench.jsonl"), res.record, rows);
    std::cout << "quench: " << res.cells.size() << " cells, C="
              << qbell::format_g17(res.fit.C) << " lambda="
              << qbell::format_g17(res.fit.lambda) << " v="
              << qbell::format_g17(res.fit.v)
              << (all_ok ? ", all dominated" : ", dominance VIOLATED") << "\n";
    return all_ok ? kExitOk : kExitNumeric;
}

int run_bell_certify(const CommonArgs& args) {
    const auto cfg = load_config(args);
    const auto res = qbell::cmd_bell_certify(cfg);
    std::vector<nlohmann::json> rows{{{"fit", qbell::fit_to_json(res.fit)}}};
    bool all_ok = true;
    for (const auto& cert : res.certificates) {
        rows.push_back(cert.to_json());
        all_ok = all_ok && cert.satisfied;
        std::cout << qbell::to_string(cert.formula)
                  << " value=" << qbell::format_g17(cert.value)
                  << " bound=" << qbell::format_g17(cert.bound)
                  << " margin=" << qbell::format_g17(cert.bound - cert.value)
                  << (cert.satisfied ? " satisfied" : " VIOLATED") << "\n";
    }
    qbell::write_jsonl(out_path(cfg, "certificates.jsonl"), res.record, rows);
    return all_ok ? kExitOk : kExitViolation;
}

int run_local_bound(const std::string& file) {
    const auto res = qbell::cmd_local_bound(file);
    std::cout << "delta_c = " << qbell::format_g17(res.delta_c) << "\n";
    std::cout << "maximizer:";
    for (std::size_t i = 0; i < res.assignment.size(); ++i) {
        std::cout << " party" << i << "=(";
        for (std::size_t k = 0; k < res.assignment[i].size(); ++k)
            std::cout << (k ? "," : "") << (res.assignment[i][k] > 0 ? "+1" : "-1");
        std::cout << ")";
    }
    std::cout << "\n";
    return kExitOk;
}

int run_self_test() {
    using namespace qbell;
    // singlet saturates the quantum CHSH maximum
    Lattice lat = Lattice::chain(2);
    ManyBodyState singlet;
    singlet.kind = StateKind::pure;
    singlet.psi = Vec::Zero(4);
    singlet.psi[1] = 1.0 / std::sqrt(2.0);
    singlet.psi[2] = -1.0 / std::sqrt(2.0);
    const double sup =
        chsh_sup_seesaw(singlet, lat, Region::single(0), Region::single(1)).value;
    const double tsirelson = 2.0 * std::sqrt(2.0);
    if (std::abs(sup - tsirelson) > 1e-6) {
        std::cout << "self-test FAILED: chsh sup " << sup << "\n";
        return kExitNumeric;
    }
    // local bound of CHSH
    if (std::abs(local_bound_bruteforce(BellInequality::chsh()).delta_c - 2.0) > 0) {
        std::cout << "self-test FAILED: CHSH local bound\n";
        return kExitNumeric;
    }
    // synthetic propagation fit recovers its own constants
    std::vector<CorrelationSample> samples;
    for (double t : {0.2, 0.4, 0.6, 0.8, 1.0})
        for (int r = 1; r <= 6; ++r) {
            CorrelationSample s;
            s.t = t;
            s.r = r;
            s.value = 1.0 * (std::exp(1.0 * 2.0 * t) - 1.0) * std::exp(-1.0 * r);
            samples.push_back(s);
        }
    const auto fit = fit_propagation(samples);
    if (std::abs(fit.C - 1) > 1e-6 || std::abs(fit.lambda - 1) > 1e-6 ||
        std::abs(fit.v - 2) > 1e-6) {
        std::cout << "self-test FAILED: propagation fit (C,lambda,v)=(" << fit.C << ","
                  << fit.lambda << "," << fit.v << ")\n";
        return kExitNumeric;
    }
    std::cout << "self-test ok\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spin-lattice Bell locality certification toolkit"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string ineq_file;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", args.config_path, "experiment config file")->required();
        sub->add_option("--seed", [&](const CLI::results_t& vals) {
            args.seed = std::stoull(vals[0]);
            return true;
        }, "override the config seed");
        sub->add_option("--out", [&](const CLI::results_t& vals) {
            args.out = vals[0];
            return true;
        }, "override the output directory");
    };

    auto* chsh = app.add_subcommand("chsh-scan", "CHSH sup and Lemma-1 bound per region pair");
    add_common(chsh);
    auto* cfit = app.add_subcommand("clustering-fit", "fit (C, lambda) over correlator samples");
    add_common(cfit);
    auto* quench = app.add_subcommand("quench", "light-cone grid and (C, lambda, v) fit");
    add_common(quench);
    auto* certify = app.add_subcommand("bell-certify", "locality certificates for an inequality");
    add_common(certify);
    auto* local = app.add_subcommand("local-bound", "brute-force local bound of an inequality");
    local->add_option("inequality", ineq_file, "inequality file")->required();
    app.add_subcommand("self-test", "quick internal consistency checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (chsh->parsed()) return run_chsh_scan(args);
        if (cfit->parsed()) return run_clustering_fit(args);
        if (quench->parsed()) return run_quench(args);
        if (certify->parsed()) return run_bell_certify(args);
        if (local->parsed()) return run_local_bound(ineq_file);
        return run_self_test();
    } catch (const qbell::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const qbell::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
}
