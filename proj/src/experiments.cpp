#include "qbell/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

namespace qbell {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

ManyBodyState static_state(const ExperimentConfig& cfg, const Hamiltonian& ham) {
    if (cfg.state_kind == "quench")
        throw ConfigError("quench states are handled by the quench experiment");
    return cfg.make_state(ham);
}

}  // namespace

nlohmann::json RunRecord::to_json() const {
    return {{"config_hash", config_hash},
            {"seed", seed},
            {"wall_seconds", wall_seconds},
            {"command", command}};
}

std::vector<std::pair<int, int>> scheduled_pairs(const ExperimentConfig& cfg,
                                                 const Lattice& lat) {
    std::vector<std::pair<int, int>> pairs;
    if (cfg.pair_schedule == "explicit") {
        for (auto [a, b] : cfg.explicit_pairs) {
            if (a == b) throw InvalidRegion("pair sites must differ");
            pairs.emplace_back(std::min(a, b), std::max(a, b));
        }
    } else if (cfg.pair_schedule == "all_singletons") {
        for (int a = 0; a < lat.n_sites(); ++a)
            for (int b = a + 1; b < lat.n_sites(); ++b) pairs.emplace_back(a, b);
    } else {
        throw ConfigError("unknown pair schedule '" + cfg.pair_schedule + "'");
    }
    return pairs;
}

std::vector<CorrelationSample> scan_samples(const ExperimentConfig& cfg,
                                            const Lattice& lat,
                                            const ManyBodyState& state, double t) {
    std::vector<CorrelationSample> samples;
    for (auto [a, b] : scheduled_pairs(cfg, lat)) {
        for (const auto& name_a : cfg.basis) {
            for (const auto& name_b : cfg.basis) {
                LocalOperator opa(Region::single(a), pauli_by_name(name_a), name_a);
                LocalOperator opb(Region::single(b), pauli_by_name(name_b), name_b);
                CorrelationSample s;
                s.r = lat.distance(a, b);
                s.t = t;
                s.value = connected_correlator(state, lat, opa, opb);
                s.size_x = s.size_y = 1;
                s.op_a = name_a;
                s.op_b = name_b;
                s.site_a = a;
                s.site_b = b;
                samples.push_back(s);
            }
        }
    }
    return samples;
}

ChshScanResult cmd_chsh_scan(const ExperimentConfig& cfg) {
    const auto start = Clock::now();
    const Lattice lat = cfg.make_lattice();
    const Hamiltonian ham = cfg.make_hamiltonian(lat);
    const ManyBodyState state = static_state(cfg, ham);

    ChshScanResult res;
    res.samples = scan_samples(cfg, lat, state);
    res.fit = fit_clustering(res.samples, cfg.floor);

    const auto pairs = scheduled_pairs(cfg, lat);
    for (std::size_t idx = 0; idx < pairs.size(); ++idx) {
        const auto [a, b] = pairs[idx];
        SeesawOptions opts = cfg.seesaw;
        opts.seed = cfg.seed + idx;  // independent per-task generators
        ChshScanRow row;
        row.site_a = a;
        row.site_b = b;
        row.r = lat.distance(a, b);
        row.chsh_sup =
            chsh_sup_seesaw(state, lat, Region::single(a), Region::single(b), opts).value;
        row.epsilon = lemma1_epsilon(1, res.fit.C, res.fit.lambda, row.r);
        row.satisfied = row.chsh_sup <= 2.0 + row.epsilon + 1e-9;
        res.rows.push_back(row);
    }
    res.record = {cfg.config_hash(), cfg.seed, seconds_since(start), "chsh-scan"};
    return res;
}

ClusteringFitResult cmd_clustering_fit(const ExperimentConfig& cfg) {
    const auto start = Clock::now();
    const Lattice lat = cfg.make_lattice();
    const Hamiltonian ham = cfg.make_hamiltonian(lat);
    const ManyBodyState state = static_state(cfg, ham);

    ClusteringFitResult res;
    res.samples = scan_samples(cfg, lat, state);
    res.fit = fit_clustering(res.samples, cfg.floor);
    res.dominance_ok = true;
    for (const auto& s : res.samples)
        if (std::abs(s.value) > res.fit.envelope(std::min(s.size_x, s.size_y), s.r))
            res.dominance_ok = false;
    res.record = {cfg.config_hash(), cfg.seed, seconds_since(start), "clustering-fit"};
    return res;
}

QuenchResult cmd_quench(const ExperimentConfig& cfg) {
    const auto start = Clock::now();
    const Lattice lat = cfg.make_lattice();
    QuenchResult res;

    if (cfg.synthetic_clv) {
        // self-test mode: correlations injected from the model formula itself
        const auto [c, lambda, v] = *cfg.synthetic_clv;
        for (double t : cfg.times) {
            for (auto [a, b] : scheduled_pairs(cfg, lat)) {
                CorrelationSample s;
                s.r = lat.distance(a, b);
                s.t = t;
                s.value = t == 0 ? 0.0
                                 : c * (std::exp(lambda * v * t) - 1.0) *
                                       std::exp(-lambda * s.r);
                s.size_x = s.size_y = 1;
                s.op_a = s.op_b = "synthetic";
                s.site_a = a;
                s.site_b = b;
                res.samples.push_back(s);
            }
        }
    } else {
        if (cfg.state_kind != "quench")
            throw ConfigError("quench experiment requires state.kind = quench");
        const Hamiltonian ham = cfg.make_hamiltonian(lat);
        ManyBodyState state = cfg.make_initial_product(lat);
        state.provenance = "product+quench(0)";
        double now = 0;
        std::vector<double> times = cfg.times;
        std::sort(times.begin(), times.end());
        for (double t : times) {
            if (t < now) throw ConfigError("quench times must be nonnegative");
            if (t > now) state = evolve_state(ham, state, t - now);
            now = t;
            auto batch = scan_samples(cfg, lat, state, t);
            res.samples.insert(res.samples.end(), batch.begin(), batch.end());
        }
    }

    res.fit = fit_propagation(res.samples, cfg.grid, cfg.floor);

    // aggregate cells: max |value| over basis pairs at each (t, r)
    std::map<std::pair<double, double>, double> cell_max;
    for (const auto& s : res.samples) {
        auto key = std::make_pair(s.t, s.r);
        cell_max[key] = std::max(cell_max[key], std::abs(s.value));
    }
    for (const auto& [key, value] : cell_max) {
        QuenchCell cell;
        cell.t = key.first;
        cell.r = key.second;
        cell.value = value;
        cell.bound = res.fit.envelope(1, 1, cell.t, cell.r);
        cell.dominated = cell.t == 0 ? value <= cfg.floor : value <= cell.bound;
        res.cells.push_back(cell);
    }
    res.record = {cfg.config_hash(), cfg.seed, seconds_since(start), "quench"};
    return res;
}

CertifyResult cmd_bell_certify(const ExperimentConfig& cfg) {
    const auto start = Clock::now();
    const Lattice lat = cfg.make_lattice();
    const Hamiltonian ham = cfg.make_hamiltonian(lat);
    const ManyBodyState state = static_state(cfg, ham);
    if (cfg.inequality_file.empty())
        throw ConfigError("bell-certify requires an inequality file");
    const BellInequality ineq = BellInequality::load(cfg.inequality_file);

    CertifyResult res;
    const auto samples = scan_samples(cfg, lat, state);
    res.fit = fit_clustering(samples, cfg.floor);

    if (cfg.region_sets.empty())
        throw ConfigError("bell-certify requires regions.sets");
    for (std::size_t idx = 0; idx < cfg.region_sets.size(); ++idx) {
        std::vector<Region> regions;
        for (const auto& sites : cfg.region_sets[idx]) regions.push_back(Region(sites));
        SeesawOptions opts = cfg.seesaw;
        opts.seed = cfg.seed + idx;
        res.certificates.push_back(certify(state, lat, ineq, regions, res.fit, opts));
    }
    res.record = {cfg.config_hash(), cfg.seed, seconds_since(start), "bell-certify"};
    return res;
}

LocalBoundResult cmd_local_bound(const std::string& inequality_file) {
    return local_bound_bruteforce(BellInequality::load(inequality_file));
}

// ---------------------------------------------------------------------------
// Serialization

std::string format_g17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    const auto dir = std::filesystem::path(path).parent_path();
    if (!dir.empty()) std::filesystem::create_directories(dir);
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write to '" + path + "'");
    return out;
}

}  // namespace

void write_samples_csv(const std::string& path,
                       const std::vector<CorrelationSample>& samples) {
    auto out = open_out(path);
    out << "r,t,size_x,size_y,op_a,op_b,value\n";
    for (const auto& s : samples)
        out << format_g17(s.r) << ',' << format_g17(s.t) << ',' << s.size_x << ','
            << s.size_y << ',' << s.op_a << ',' << s.op_b << ','
            << format_g17(s.value) << '\n';
}

void write_chsh_csv(const std::string& path, const std::vector<ChshScanRow>& rows) {
    auto out = open_out(path);
    out << "site_a,site_b,r,chsh_sup,epsilon,satisfied\n";
    for (const auto& row : rows)
        out << row.site_a << ',' << row.site_b << ',' << format_g17(row.r) << ','
            << format_g17(row.chsh_sup) << ',' << format_g17(row.epsilon) << ','
            << (row.satisfied ? 1 : 0) << '\n';
}

void write_quench_csv(const std::string& path, const std::vector<QuenchCell>& cells) {
    auto out = open_out(path);
    out << "t,r,value,bound,dominated\n";
    for (const auto& c : cells)
        out << format_g17(c.t) << ',' << format_g17(c.r) << ',' << format_g17(c.value)
            << ',' << format_g17(c.bound) << ',' << (c.dominated ? 1 : 0) << '\n';
}

nlohmann::json fit_to_json(const ClusteringFit& fit) {
    return {{"C", fit.C},
            {"lambda", fit.lambda},
            {"residual", fit.residual},
            {"n_samples", fit.n_samples},
            {"n_floored", fit.n_floored},
            {"floor", fit.floor}};
}

nlohmann::json fit_to_json(const PropagationFit& fit) {
    return {{"C", fit.C},
            {"lambda", fit.lambda},
            {"v", fit.v},
            {"residual", fit.residual},
            {"n_samples", fit.n_samples},
            {"n_floored", fit.n_floored},
            {"floor", fit.floor},
            {"grid",
             {{"lambda_min", fit.grid.lambda_min},
              {"lambda_max", fit.grid.lambda_max},
              {"v_min", fit.grid.v_min},
              {"v_max", fit.grid.v_max},
              {"n_lambda", fit.grid.n_lambda},
              {"n_v", fit.grid.n_v},
              {"refine_rounds", fit.grid.refine_rounds}}}};
}

void write_jsonl(const std::string& path, const RunRecord& record,
                 const std::vector<nlohmann::json>& rows) {
    auto out = open_out(path);
    out << record.to_json().dump() << '\n';
    for (const auto& row : rows) out << row.dump() << '\n';
}

}  // namespace qbell
