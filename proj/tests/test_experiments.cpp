#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "qbell/experiments.hpp"

using namespace qbell;
using nlohmann::json;

namespace {

json small_scan_config() {
    return json{{"lattice", {{"geometry", "chain"}, {"length", 5}}},
                {"model", {{"name", "tfim"}, {"g", 2.0}}},
                {"state", {{"kind", "ground"}}},
                {"seesaw", {{"restarts", 4}, {"tol", 1e-12}}},
                {"seed", 3}};
}

}  // namespace

TEST_CASE("pair scheduling") {
    const auto cfg = ExperimentConfig::from_json(small_scan_config());
    const auto lat = cfg.make_lattice();
    const auto pairs = scheduled_pairs(cfg, lat);
    CHECK(pairs.size() == 10);  // 5 choose 2
    CHECK(pairs.front() == std::pair<int, int>{0, 1});
    CHECK(pairs.back() == std::pair<int, int>{3, 4});

    auto j = small_scan_config();
    j["regions"] = {{"explicit_pairs", {{4, 0}, {1, 3}}}};
    const auto cfg2 = ExperimentConfig::from_json(j);
    const auto pairs2 = scheduled_pairs(cfg2, lat);
    REQUIRE(pairs2.size() == 2);
    CHECK(pairs2[0] == std::pair<int, int>{0, 4});  // normalized ascending
    CHECK(pairs2[1] == std::pair<int, int>{1, 3});
}

TEST_CASE("scan produces one sample per pair and basis combination") {
    const auto cfg = ExperimentConfig::from_json(small_scan_config());
    const auto lat = cfg.make_lattice();
    const auto ham = cfg.make_hamiltonian(lat);
    const auto state = cfg.make_state(ham);
    const auto samples = scan_samples(cfg, lat, state);
    CHECK(samples.size() == 10 * 9);
    for (const auto& s : samples) {
        CHECK(s.size_x == 1);
        CHECK(s.size_y == 1);
        CHECK(s.r == lat.distance(s.site_a, s.site_b));
        CHECK(std::isfinite(s.value));
    }
}

TEST_CASE("scan rows satisfy their own certificates on a gapped chain") {
    const auto cfg = ExperimentConfig::from_json(small_scan_config());
    const auto res = cmd_chsh_scan(cfg);
    CHECK(res.rows.size() == 10);
    CHECK(res.fit.lambda > 0);
    for (const auto& row : res.rows) {
        CHECK(row.chsh_sup >= 2.0 - 1e-12);
        CHECK(row.epsilon == lemma1_epsilon(1, res.fit.C, res.fit.lambda, row.r));
        CHECK(row.satisfied == (row.chsh_sup <= 2.0 + row.epsilon + 1e-9));
        CHECK(row.satisfied);
    }
    CHECK(res.record.command == "chsh-scan");
    CHECK(res.record.config_hash == cfg.config_hash());
}

TEST_CASE("scan results are deterministic across runs") {
    const auto cfg = ExperimentConfig::from_json(small_scan_config());
    const auto a = cmd_chsh_scan(cfg);
    const auto b = cmd_chsh_scan(cfg);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].chsh_sup == b.rows[i].chsh_sup);
        CHECK(a.rows[i].epsilon == b.rows[i].epsilon);
    }
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i)
        CHECK(a.samples[i].value == b.samples[i].value);
}

TEST_CASE("clustering-fit command re-validates its own envelope") {
    const auto cfg = ExperimentConfig::from_json(small_scan_config());
    const auto res = cmd_clustering_fit(cfg);
    CHECK(res.dominance_ok);
    CHECK(res.fit.n_samples == static_cast<int>(res.samples.size()));
}

TEST_CASE("certify command agrees with the dedicated scan on singleton pairs") {
    auto j = small_scan_config();
    j["inequality"] = QBELL_DATA_DIR "/chsh.json";
    j["regions"] = {{"sets", {{{0}, {4}}, {{1}, {3}}}}};
    const auto cfg = ExperimentConfig::from_json(j);
    const auto certs = cmd_bell_certify(cfg);
    REQUIRE(certs.certificates.size() == 2);

    auto scan_cfg = ExperimentConfig::from_json(small_scan_config());
    const auto scan = cmd_chsh_scan(scan_cfg);
    auto row_for = [&](int a, int b) {
        for (const auto& row : scan.rows)
            if (row.site_a == a && row.site_b == b) return row;
        throw std::runtime_error("row not found");
    };
    CHECK(certs.certificates[0].value ==
          doctest::Approx(row_for(0, 4).chsh_sup).epsilon(1e-12));
    CHECK(certs.certificates[1].value ==
          doctest::Approx(row_for(1, 3).chsh_sup).epsilon(1e-12));
    for (const auto& c : certs.certificates) {
        CHECK(c.formula == BoundFormula::lemma1);
        CHECK(c.satisfied == (c.value <= c.bound + 1e-9));
    }
}

TEST_CASE("synthetic quench grid recovers its own constants and dominates") {
    json j{{"lattice", {{"geometry", "chain"}, {"length", 8}}},
           {"model", {{"name", "tfim"}, {"g", 2.0}}},
           {"state",
            {{"kind", "quench"},
             {"times", {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}},
             {"synthetic", {{"C", 0.7}, {"lambda", 0.9}, {"v", 1.5}}}}},
           {"seed", 3}};
    const auto cfg = ExperimentConfig::from_json(j);
    const auto res = cmd_quench(cfg);
    CHECK(res.fit.C == doctest::Approx(0.7).epsilon(1e-6));
    CHECK(res.fit.lambda == doctest::Approx(0.9).epsilon(1e-6));
    CHECK(res.fit.v == doctest::Approx(1.5).epsilon(1e-6));
    for (const auto& cell : res.cells) CHECK(cell.dominated);
}

TEST_CASE("real quench grid is dominated by its fitted light cone") {
    json j{{"lattice", {{"geometry", "chain"}, {"length", 6}}},
           {"model", {{"name", "tfim"}, {"g", 2.0}}},
           {"state",
            {{"kind", "quench"}, {"initial", "all_up"}, {"times", {0.0, 0.3, 0.6}}}},
           {"regions", {{"explicit_pairs", {{0, 2}, {0, 3}, {0, 4}, {0, 5}}}}},
           {"seed", 3}};
    const auto cfg = ExperimentConfig::from_json(j);
    const auto res = cmd_quench(cfg);
    for (const auto& s : res.samples)
        if (s.t == 0) CHECK(std::abs(s.value) <= 1e-10);
    for (const auto& cell : res.cells) CHECK(cell.dominated);
    CHECK(res.fit.lambda > 0);
    CHECK(res.fit.v > 0);
}

TEST_CASE("quench command requires a quench state recipe") {
    auto j = small_scan_config();  // ground state
    CHECK_THROWS_AS(cmd_quench(ExperimentConfig::from_json(j)), ConfigError);
    json q{{"lattice", {{"geometry", "chain"}, {"length", 4}}},
           {"model", {{"name", "tfim"}, {"g", 2.0}}},
           {"state", {{"kind", "quench"}, {"times", {0.0, 0.5}}}}};
    CHECK_THROWS_AS(cmd_chsh_scan(ExperimentConfig::from_json(q)), ConfigError);
}

TEST_CASE("local-bound command reads inequality files") {
    const auto res = cmd_local_bound(QBELL_DATA_DIR "/chsh.json");
    CHECK(res.delta_c == 2.0);
    REQUIRE(res.assignment.size() == 2);
    CHECK(res.assignment[0].size() == 2);
}
