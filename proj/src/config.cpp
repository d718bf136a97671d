#include "qbell/config.hpp"

#include <cmath>
#include <fstream>

namespace qbell {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError("config." + path + ": " + what);
}

template <typename T>
T get_req(const json& j, const std::string& path, const std::string& key) {
    if (!j.contains(key)) fail(path + key, "missing required key");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        fail(path + key, e.what());
    }
}

template <typename T>
T get_opt(const json& j, const std::string& path, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        fail(path + key, e.what());
    }
}

void check_finite(double x, const std::string& path) {
    if (!std::isfinite(x)) fail(path, "value must be finite");
}

Mat matrix_from_nested(const json& rows, const std::string& path) {
    // nested numeric arrays, row-major, re/im pairs
    if (!rows.is_array() || rows.empty()) fail(path, "expected a nonempty array of rows");
    const std::size_t n = rows.size();
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = rows[i];
        if (!row.is_array() || row.size() != 2 * n)
            fail(path, "each row needs 2*dim numbers (re/im pairs)");
        for (std::size_t c = 0; c < n; ++c)
            m(i, c) = cxd(row[2 * c].get<double>(), row[2 * c + 1].get<double>());
    }
    return m;
}

}  // namespace

std::uint64_t fnv1a(const std::string& data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config file '" + path + "': " + e.what());
    }
    return from_json(j);
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    cfg.raw = j;

    const json lat = j.value("lattice", json::object());
    cfg.geometry = get_opt<std::string>(lat, "lattice.", "geometry", "chain");
    if (cfg.geometry == "chain") {
        cfg.length = get_req<int>(lat, "lattice.", "length");
    } else if (cfg.geometry == "grid") {
        cfg.width = get_req<int>(lat, "lattice.", "width");
        cfg.height = get_req<int>(lat, "lattice.", "height");
    } else {
        fail("lattice.geometry", "must be 'chain' or 'grid'");
    }
    cfg.boundary = boundary_from_string(get_opt<std::string>(lat, "lattice.", "boundary", "open"));
    cfg.metric = metric_from_string(get_opt<std::string>(lat, "lattice.", "metric", "graph"));
    cfg.local_dim = get_opt<int>(lat, "lattice.", "local_dim", 2);
    cfg.caps.dense_cap = get_opt<double>(lat, "lattice.", "dense_cap", cfg.caps.dense_cap);
    cfg.caps.pure_cap = get_opt<double>(lat, "lattice.", "pure_cap", cfg.caps.pure_cap);

    const json model = j.value("model", json::object());
    cfg.model_name = get_opt<std::string>(model, "model.", "name", "tfim");
    cfg.J = get_opt<double>(model, "model.", "J", 1.0);
    cfg.g = get_opt<double>(model, "model.", "g", 0.0);
    cfg.delta = get_opt<double>(model, "model.", "delta", 0.0);
    cfg.h = get_opt<double>(model, "model.", "h", 0.0);
    cfg.max_range = get_opt<double>(model, "model.", "max_range", 2.0);
    for (double v : {cfg.J, cfg.g, cfg.delta, cfg.h}) check_finite(v, "model");
    if (model.contains("terms")) {
        for (std::size_t i = 0; i < model.at("terms").size(); ++i) {
            const auto& t = model.at("terms")[i];
            const std::string path = "model.terms[" + std::to_string(i) + "].";
            HamTerm term;
            term.support = Region(get_req<std::vector<int>>(t, path, "sites"));
            term.matrix = matrix_from_nested(t.value("matrix", json()), path + "matrix");
            cfg.custom_terms.push_back(std::move(term));
        }
    }

    const json state = j.value("state", json::object());
    cfg.state_kind = get_opt<std::string>(state, "state.", "kind", "ground");
    if (cfg.state_kind != "ground" && cfg.state_kind != "thermal" &&
        cfg.state_kind != "quench" && cfg.state_kind != "product")
        fail("state.kind", "must be one of ground|thermal|quench|product");
    cfg.beta = get_opt<double>(state, "state.", "beta", 0.0);
    check_finite(cfg.beta, "state.beta");
    if (cfg.beta < 0) fail("state.beta", "must be >= 0");
    cfg.times = get_opt<std::vector<double>>(state, "state.", "times", {});
    for (double t : cfg.times) check_finite(t, "state.times");
    cfg.initial = get_opt<std::string>(state, "state.", "initial", "all_up");
    if (state.contains("synthetic")) {
        const auto& syn = state.at("synthetic");
        cfg.synthetic_clv = {get_req<double>(syn, "state.synthetic.", "C"),
                             get_req<double>(syn, "state.synthetic.", "lambda"),
                             get_req<double>(syn, "state.synthetic.", "v")};
    }

    cfg.basis = get_opt<std::vector<std::string>>(j, "", "basis", cfg.basis);
    for (const auto& b : cfg.basis) pauli_by_name(b);  // validate early

    const json regions = j.value("regions", json::object());
    cfg.pair_schedule = get_opt<std::string>(regions, "regions.", "pairs", "all_singletons");
    if (regions.contains("explicit_pairs")) {
        for (const auto& p : regions.at("explicit_pairs")) {
            if (!p.is_array() || p.size() != 2)
                fail("regions.explicit_pairs", "entries are [site_a, site_b]");
            cfg.explicit_pairs.emplace_back(p[0].get<int>(), p[1].get<int>());
        }
        cfg.pair_schedule = "explicit";
    }
    if (regions.contains("sets")) {
        cfg.region_sets =
            regions.at("sets").get<std::vector<std::vector<std::vector<int>>>>();
    }

    cfg.inequality_file = get_opt<std::string>(j, "", "inequality", "");

    const json fit = j.value("fit", json::object());
    cfg.floor = get_opt<double>(fit, "fit.", "floor", 1e-12);
    cfg.grid.lambda_min = get_opt<double>(fit, "fit.", "lambda_min", cfg.grid.lambda_min);
    cfg.grid.lambda_max = get_opt<double>(fit, "fit.", "lambda_max", cfg.grid.lambda_max);
    cfg.grid.v_min = get_opt<double>(fit, "fit.", "v_min", cfg.grid.v_min);
    cfg.grid.v_max = get_opt<double>(fit, "fit.", "v_max", cfg.grid.v_max);
    cfg.grid.n_lambda = get_opt<int>(fit, "fit.", "n_lambda", cfg.grid.n_lambda);
    cfg.grid.n_v = get_opt<int>(fit, "fit.", "n_v", cfg.grid.n_v);
    cfg.grid.refine_rounds = get_opt<int>(fit, "fit.", "refine_rounds", cfg.grid.refine_rounds);

    const json seesaw = j.value("seesaw", json::object());
    cfg.seesaw.restarts = get_opt<int>(seesaw, "seesaw.", "restarts", 20);
    cfg.seesaw.tol = get_opt<double>(seesaw, "seesaw.", "tol", 1e-9);
    cfg.seesaw.max_sweeps = get_opt<int>(seesaw, "seesaw.", "max_sweeps", 500);

    cfg.seed = get_opt<std::uint64_t>(j, "", "seed", 1);
    cfg.seesaw.seed = cfg.seed;
    cfg.out_dir = get_opt<std::string>(j, "", "out", ".");
    return cfg;
}

Lattice ExperimentConfig::make_lattice() const {
    if (geometry == "chain")
        return Lattice::chain(length, boundary, metric, local_dim, caps);
    return Lattice::grid(width, height, boundary, metric, local_dim, caps);
}

Hamiltonian ExperimentConfig::make_hamiltonian(const Lattice& lat) const {
    HamiltonianSpec spec;
    if (!custom_terms.empty()) {
        spec.terms = custom_terms;
    } else if (model_name == "tfim") {
        spec = make_tfim(lat, J, g);
    } else if (model_name == "xxz") {
        spec = make_xxz(lat, J, delta, h);
    } else if (model_name == "heisenberg") {
        spec = make_heisenberg(lat, J, h);
    } else {
        throw ConfigError("unknown model '" + model_name + "'");
    }
    spec.max_range = max_range;
    return build_hamiltonian(lat, spec, caps);
}

ManyBodyState ExperimentConfig::make_initial_product(const Lattice& lat) const {
    Mat site;
    if (initial == "all_up") {
        site = Mat::Zero(lat.local_dim(), lat.local_dim());
        site(0, 0) = 1;
    } else if (initial == "all_down") {
        site = Mat::Zero(lat.local_dim(), lat.local_dim());
        site(lat.local_dim() - 1, lat.local_dim() - 1) = 1;
    } else if (initial == "all_plus") {
        if (lat.local_dim() != 2) throw ConfigError("all_plus needs local_dim 2");
        site = 0.5 * (Mat::Identity(2, 2) + pauli_x());
    } else {
        throw ConfigError("unknown initial product state '" + initial + "'");
    }
    return product_state(lat, std::vector<Mat>(lat.n_sites(), site));
}

ManyBodyState ExperimentConfig::make_state(const Hamiltonian& ham) const {
    if (state_kind == "ground") {
        GroundStateOptions opts;
        opts.seed = seed;
        return ground_state(ham, opts).state;
    }
    if (state_kind == "thermal") return thermal_state(ham, beta);
    if (state_kind == "product") return make_initial_product(ham.lattice());
    throw ConfigError("state kind '" + state_kind + "' needs the quench experiment");
}

std::uint64_t ExperimentConfig::config_hash() const {
    return fnv1a(raw.dump());
}

}  // namespace qbell
