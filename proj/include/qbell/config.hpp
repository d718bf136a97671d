#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qbell/bell.hpp"
#include "qbell/quantum.hpp"

#include "json.hpp"

namespace qbell {

/// Parsed experiment configuration. The file is a JSON key-tree; parse errors
/// carry the offending key path.
struct ExperimentConfig {
    // lattice
    std::string geometry = "chain";  // chain | grid
    int length = 0, width = 0, height = 0;
    Boundary boundary = Boundary::open;
    Metric metric = Metric::graph;
    int local_dim = 2;
    DimensionCaps caps;

    // model: named (tfim/xxz/heisenberg) or custom term list
    std::string model_name;
    double J = 1.0, g = 0.0, delta = 0.0, h = 0.0;
    std::vector<HamTerm> custom_terms;
    double max_range = 2.0;

    // state recipe
    std::string state_kind = "ground";  // ground | thermal | quench | product
    double beta = 0.0;
    std::vector<double> times;
    std::string initial = "all_up";  // quench/product start
    // synthetic-dynamics self-test: inject correlations from the model formula
    std::optional<std::array<double, 3>> synthetic_clv;

    // measurement basis for clustering scans
    std::vector<std::string> basis = {"sx", "sy", "sz"};

    // regions
    std::string pair_schedule = "all_singletons";
    std::vector<std::pair<int, int>> explicit_pairs;
    std::vector<std::vector<std::vector<int>>> region_sets;  // per set, per party

    std::string inequality_file;

    // fit hyperparameters
    double floor = 1e-12;
    PropagationGrid grid;

    SeesawOptions seesaw;
    std::uint64_t seed = 1;
    std::string out_dir = ".";

    nlohmann::json raw;

    static ExperimentConfig load(const std::string& path);
    static ExperimentConfig from_json(const nlohmann::json& j);

    Lattice make_lattice() const;
    Hamiltonian make_hamiltonian(const Lattice& lat) const;
    ManyBodyState make_initial_product(const Lattice& lat) const;
    /// Static-state recipes (ground | thermal | product); quench states are
    /// produced per time by the quench experiment.
    ManyBodyState make_state(const Hamiltonian& ham) const;

    /// FNV-1a digest of the canonical config serialization.
    std::uint64_t config_hash() const;
};

std::uint64_t fnv1a(const std::string& data);

}  // namespace qbell
