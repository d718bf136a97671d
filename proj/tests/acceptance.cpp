// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion also enforces its wall-clock budget.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qbell/experiments.hpp"

using namespace qbell;
using nlohmann::json;

namespace {

const double kTsirelson = 2.0 * std::sqrt(2.0);

struct Check {
    bool ok = true;
    std::string detail;
    void require(bool cond, const std::string& why) {
        if (!cond && ok) {
            ok = false;
            detail = why;
        }
    }
};

ManyBodyState singlet() {
    ManyBodyState s;
    s.kind = StateKind::pure;
    s.psi = Vec::Zero(4);
    s.psi[1] = 1.0 / std::sqrt(2.0);
    s.psi[2] = -1.0 / std::sqrt(2.0);
    return s;
}

Mat random_obs(std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Mat a(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) a(i, j) = cxd(gauss(rng), gauss(rng));
    Mat h = 0.5 * (a + a.adjoint().eval());
    return h / std::max(1.0, operator_norm(h));
}

// --- criterion 1: the singlet saturates the quantum CHSH maximum -----------

Check tsirelson_saturation() {
    Check c;
    auto lat = Lattice::chain(2);
    SeesawOptions opts;
    opts.restarts = 20;
    const auto res = chsh_sup_seesaw(singlet(), lat, Region::single(0), Region::single(1), opts);
    c.require(std::abs(res.value - kTsirelson) <= 1e-6,
              "sup " + format_g17(res.value) + " != 2 sqrt 2");
    c.require(res.min_step_delta >= -1e-12, "seesaw step decreased the objective");
    return c;
}

// --- criterion 2: seesaw equals the closed-form two-qubit criterion --------

Check qubit_oracle_equivalence() {
    Check c;
    auto lat = Lattice::chain(2);
    std::mt19937_64 rng(2024);
    std::exponential_distribution<double> expo(1.0);

    Vec bell[4];
    for (auto& b : bell) b = Vec::Zero(4);
    const double inv = 1.0 / std::sqrt(2.0);
    bell[0][0] = bell[0][3] = inv;
    bell[1][0] = inv;
    bell[1][3] = -inv;
    bell[2][1] = bell[2][2] = inv;
    bell[3][1] = inv;
    bell[3][2] = -inv;

    double worst = 0;
    for (int rep = 0; rep < 200; ++rep) {
        std::array<double, 4> p{};
        double z = 0;
        for (auto& x : p) {
            x = expo(rng);
            z += x;
        }
        ManyBodyState s;
        s.kind = StateKind::mixed;
        s.rho = Mat::Zero(4, 4);
        for (int i = 0; i < 4; ++i) s.rho += (p[i] / z) * bell[i] * bell[i].adjoint();

        const double oracle = std::max(2.0, horodecki_spin_sup(s.rho));
        SeesawOptions opts;
        opts.restarts = 8;
        opts.seed = 5000 + rep;
        const auto res = chsh_sup_seesaw(s, lat, Region::single(0), Region::single(1), opts);
        worst = std::max(worst, std::abs(res.value - oracle));
    }
    c.require(worst <= 1e-5, "max |seesaw - oracle| = " + format_g17(worst));
    return c;
}

// --- criterion 3: classical bounds ----------------------------------------

double enumerate_local_bound(const BellInequality& ineq) {
    std::vector<std::vector<int>> signs(ineq.n_parties());
    for (int i = 0; i < ineq.n_parties(); ++i) signs[i].assign(ineq.settings()[i], 1);
    const auto terms = ineq.all_terms();
    double best = -std::numeric_limits<double>::infinity();
    std::function<void(int, int)> recurse = [&](int party, int setting) {
        if (party == ineq.n_parties()) {
            double value = 0;
            for (const auto& t : terms) {
                double prod = t.value;
                for (std::size_t p = 0; p < t.parties.size(); ++p)
                    prod *= signs[t.parties[p]][t.settings[p]];
                value += prod;
            }
            best = std::max(best, value);
            return;
        }
        if (setting == ineq.settings()[party]) {
            recurse(party + 1, 0);
            return;
        }
        for (int v : {1, -1}) {
            signs[party][setting] = v;
            recurse(party, setting + 1);
        }
    };
    recurse(0, 0);
    return best;
}

Check classical_bounds() {
    Check c;
    c.require(local_bound_bruteforce(BellInequality::chsh()).delta_c == 2.0,
              "CHSH local bound is not exactly 2");

    std::mt19937_64 rng(303);
    std::uniform_int_distribution<int> mdist(1, 3);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    for (int rep = 0; rep < 50 && c.ok; ++rep) {
        BellInequality ineq(2, {mdist(rng), mdist(rng)});
        for (int i = 0; i < 2; ++i)
            for (int k = 0; k < ineq.settings()[i]; ++k) ineq.add_alpha(i, k, coef(rng));
        for (int k = 0; k < ineq.settings()[0]; ++k)
            for (int l = 0; l < ineq.settings()[1]; ++l)
                ineq.add_beta(0, 1, k, l, coef(rng));
        const double got = local_bound_bruteforce(ineq).delta_c;
        const double want = enumerate_local_bound(ineq);
        c.require(std::abs(got - want) <= 1e-12,
                  "random inequality " + std::to_string(rep) + ": " + format_g17(got) +
                      " vs " + format_g17(want));
    }
    return c;
}

// --- criterion 4: decay-certified CHSH bound on a gapped ground state ------

Check chain_ground_certificates() {
    Check c;
    json j{{"lattice", {{"geometry", "chain"}, {"length", 12}}},
           {"model", {{"name", "tfim"}, {"g", 2.0}}},
           {"state", {{"kind", "ground"}}},
           {"seesaw", {{"restarts", 6}}},
           {"seed", 1}};
    const auto cfg = ExperimentConfig::from_json(j);
    const auto res = cmd_chsh_scan(cfg);
    c.require(res.rows.size() == 66, "expected 66 singleton pairs");
    c.require(res.fit.lambda > 0, "decay rate fit is not positive");
    for (const auto& row : res.rows) {
        const double bound =
            2.0 + 4.0 * res.fit.C * std::exp(-res.fit.lambda * row.r) + 1e-8;
        c.require(row.chsh_sup <= bound,
                  "pair (" + std::to_string(row.site_a) + "," + std::to_string(row.site_b) +
                      "): sup " + format_g17(row.chsh_sup) + " > bound " + format_g17(bound));
    }
    return c;
}

// --- criterion 5: margin radius on thermal states --------------------------

Check thermal_margin_radius() {
    Check c;
    auto lat = Lattice::chain(10);
    auto ham = build_hamiltonian(lat, make_tfim(lat, 1.0, 2.0));
    json j{{"lattice", {{"geometry", "chain"}, {"length", 10}}},
           {"model", {{"name", "tfim"}, {"g", 2.0}}},
           {"seed", 1}};
    const auto cfg = ExperimentConfig::from_json(j);

    for (double beta : {0.05, 0.1, 0.2}) {
        const auto state = thermal_state(ham, beta);
        const auto samples = scan_samples(cfg, lat, state);
        const auto fit = fit_clustering(samples, cfg.floor);
        const double delta =
            delta_margin(state, lat, LocalOperator(Region::single(0), pauli_z()),
                         LocalOperator(Region::single(0), pauli_x()));
        c.require(delta > 0, "margin vanished at beta " + format_g17(beta));
        if (!c.ok) break;
        const double rs = r_star(1, fit.C, fit.lambda, delta);
        const double r_go = std::ceil(rs);
        int tested = 0;
        for (int site = 1; site < lat.n_sites(); ++site) {
            if (lat.distance(0, site) < r_go) continue;
            ++tested;
            const double sup = chsh_sup_fixed_alice(state, lat, Region::single(0),
                                                    Region::single(site), pauli_z(), pauli_x());
            c.require(sup <= 2.0 + 1e-9,
                      "beta " + format_g17(beta) + " site " + std::to_string(site) +
                          ": fixed-first-party sup " + format_g17(sup));
        }
        c.require(tested > 0, "no site beyond ceil(r*) = " + format_g17(r_go) +
                                  " at beta " + format_g17(beta));
    }
    return c;
}

// --- criterion 6: light-cone dominance after a quench ----------------------

Check quench_light_cone() {
    Check c;
    json pairs = json::array();
    for (int r = 1; r <= 9; ++r) pairs.push_back({0, r});
    json j{{"lattice", {{"geometry", "chain"}, {"length", 12}}},
           {"model", {{"name", "tfim"}, {"g", 2.0}}},
           {"state",
            {{"kind", "quench"},
             {"initial", "all_up"},
             {"times", {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}}}},
           {"regions", {{"explicit_pairs", pairs}}},
           {"seed", 1}};
    const auto cfg = ExperimentConfig::from_json(j);
    const auto res = cmd_quench(cfg);

    for (const auto& s : res.samples)
        if (s.t == 0)
            c.require(std::abs(s.value) <= 1e-10,
                      "t=0 correlation " + format_g17(s.value) + " at r " + format_g17(s.r));
    c.require(res.fit.lambda > 0 && res.fit.v > 0, "degenerate light-cone fit");
    for (const auto& cell : res.cells)
        c.require(cell.dominated, "cell (t=" + format_g17(cell.t) + ", r=" +
                                      format_g17(cell.r) + ") exceeds its envelope");
    return c;
}

// --- criterion 7: grouped-support induction skeleton -----------------------

Check multibody_skeleton() {
    Check c;
    auto lat = Lattice::chain(6);
    std::mt19937_64 rng(606);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_int_distribution<int> site(0, 5);
    for (int rep = 0; rep < 50; ++rep) {
        ManyBodyState s;
        s.kind = StateKind::pure;
        s.psi = Vec(64);
        for (int i = 0; i < 64; ++i) s.psi[i] = cxd(gauss(rng), gauss(rng));
        s.psi.normalize();

        std::vector<int> sites;
        while (sites.size() < 3) {
            const int x = site(rng);
            if (std::find(sites.begin(), sites.end(), x) == sites.end()) sites.push_back(x);
        }
        std::sort(sites.begin(), sites.end());
        std::vector<LocalOperator> ops;
        for (int x : sites) ops.emplace_back(Region::single(x), random_obs(rng));

        const double gap = multibody_gap(s, lat, ops);
        const double tele = telescoping_bound(s, lat, ops);
        c.require(gap <= tele + 1e-12,
                  "rep " + std::to_string(rep) + ": gap " + format_g17(gap) +
                      " > telescoping " + format_g17(tele));

        // per-step terms recomputed independently from plain expectations
        const double e1 = expect(s, lat, {ops[0]});
        const double e2 = expect(s, lat, {ops[1]});
        const double e3 = expect(s, lat, {ops[2]});
        const double e12 = expect(s, lat, {ops[0], ops[1]});
        const double e123 = expect(s, lat, {ops[0], ops[1], ops[2]});
        const double term2 = std::abs(e12 - e1 * e2);
        const double term3 = std::abs(e123 - e12 * e3);
        const double c_emp = std::max(term2, term3);
        c.require(gap <= 2.0 * c_emp + 1e-12,
                  "rep " + std::to_string(rep) + ": gap " + format_g17(gap) +
                      " > (n-1) C_emp " + format_g17(2.0 * c_emp));
    }
    return c;
}

// --- criterion 8: product states never beat the classical bound ------------

Check product_state_bound() {
    Check c;
    auto lat = Lattice::chain(3);
    const auto chsh = BellInequality::chsh();
    const auto twobody = BellInequality::load(QBELL_DATA_DIR "/twobody_n3.json");
    const auto gamma_chsh = BellInequality::load(QBELL_DATA_DIR "/chsh_gamma.json");
    const double twobody_dc = twobody.delta_c();

    std::mt19937_64 rng(808);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> mix(0.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<Mat> sites;
        for (int i = 0; i < 3; ++i) {
            Vec v(2);
            v << cxd(gauss(rng), gauss(rng)), cxd(gauss(rng), gauss(rng));
            v.normalize();
            Mat proj = v * v.adjoint();
            const double w = mix(rng);
            sites.push_back(w * proj + (1 - w) * 0.5 * Mat::Identity(2, 2));
        }
        const auto s = product_state(lat, sites);

        MeasurementAssignment two_party;
        two_party.regions = {Region::single(0), Region::single(1)};
        two_party.ops = {{random_obs(rng), random_obs(rng)},
                         {random_obs(rng), random_obs(rng)}};
        const double v_chsh = bell2_value(s, lat, chsh, two_party);
        c.require(v_chsh <= 2.0 + 1e-9, "CHSH value " + format_g17(v_chsh));
        const double v_gamma = general_value(s, lat, gamma_chsh, two_party);
        c.require(v_gamma <= 2.0 + 1e-9, "gamma-form CHSH value " + format_g17(v_gamma));

        MeasurementAssignment three_party;
        three_party.regions = {Region::single(0), Region::single(1), Region::single(2)};
        three_party.ops = {{random_obs(rng), random_obs(rng)},
                           {random_obs(rng), random_obs(rng)},
                           {random_obs(rng), random_obs(rng)}};
        const double v_two = bell2_value(s, lat, twobody, three_party);
        c.require(v_two <= twobody_dc + 1e-9, "two-body value " + format_g17(v_two));
    }
    return c;
}

// --- criterion 9: byte-identical reruns ------------------------------------

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Check determinism() {
    Check c;
    std::filesystem::create_directories("acceptance_tmp");
    const std::string cfg_path = "acceptance_tmp/scan.json";
    std::ofstream(cfg_path) << R"({
  "lattice": {"geometry": "chain", "length": 6},
  "model": {"name": "tfim", "g": 2.0},
  "state": {"kind": "ground"},
  "seesaw": {"restarts": 5},
  "seed": 99
})";
    for (const char* out : {"acceptance_tmp/a", "acceptance_tmp/b"}) {
        const std::string cmd = std::string(QBELL_BIN) + " chsh-scan " + cfg_path +
                                " --out " + out + " > acceptance_tmp/cli.log 2>&1";
        const int status = std::system(cmd.c_str());
        c.require(WEXITSTATUS(status) == 0, std::string("chsh-scan into ") + out + " failed");
    }
    if (!c.ok) return c;
    for (const char* name : {"chsh_scan.csv", "chsh_scan_samples.csv"}) {
        const std::string a = slurp(std::string("acceptance_tmp/a/") + name);
        const std::string b = slurp(std::string("acceptance_tmp/b/") + name);
        c.require(!a.empty(), std::string(name) + " is empty");
        c.require(a == b, std::string(name) + " differs between reruns");
    }
    return c;
}

}  // namespace

int main() {
    struct Criterion {
        std::string name;
        double budget_s;
        std::function<Check()> fn;
    };
    const std::vector<Criterion> criteria{
        {"singlet seesaw saturates 2 sqrt 2", 1, tsirelson_saturation},
        {"seesaw matches the two-qubit closed-form criterion", 30, qubit_oracle_equivalence},
        {"brute-force classical bounds", 10, classical_bounds},
        {"decay-certified CHSH bounds on a gapped ground state", 300, chain_ground_certificates},
        {"margin radius on thermal states", 300, thermal_margin_radius},
        {"quench light-cone dominance", 600, quench_light_cone},
        {"multibody telescoping skeleton", 30, multibody_skeleton},
        {"product states respect the classical bound", 60, product_state_bound},
        {"byte-identical reruns", 120, determinism},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Check c;
        try {
            c = criteria[i].fn();
        } catch (const std::exception& e) {
            c.ok = false;
            c.detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > criteria[i].budget_s) {
            c.ok = false;
            c.detail = "exceeded " + format_g17(criteria[i].budget_s) + " s budget";
        }
        std::printf("[%s] criterion %zu: %s (%.2f s)%s%s\n", c.ok ? "PASS" : "FAIL", i + 1,
                    criteria[i].name.c_str(), secs, c.ok ? "" : " -- ",
                    c.ok ? "" : c.detail.c_str());
        if (!c.ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
