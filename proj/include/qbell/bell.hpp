#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qbell/clustering.hpp"
#include "qbell/quantum.hpp"

#include "json.hpp"

namespace qbell {

struct AlphaEntry {
    int party = 0, setting = 0;
    double value = 0;
};

struct BetaEntry {
    int party_i = 0, party_j = 0, setting_k = 0, setting_l = 0;
    double value = 0;
};

struct GammaEntry {
    std::vector<int> parties;   // distinct
    std::vector<int> settings;  // one per party
    double value = 0;
};

/// Bell functional with one-body (alpha), two-body (beta) and general multi-
/// body (gamma) coefficients. The i != j sums are over ordered pairs; authors
/// meaning unordered sums must fold their coefficients.
class BellInequality {
public:
    BellInequality(int n_parties, std::vector<int> settings_per_party);

    int n_parties() const { return n_parties_; }
    const std::vector<int>& settings() const { return settings_; }

    void add_alpha(int party, int setting, double value);
    void add_beta(int pi, int pj, int k, int l, double value);
    void add_gamma(std::vector<int> parties, std::vector<int> settings, double value);
    void declare_delta_c(double value);

    const std::vector<AlphaEntry>& alpha() const { return alpha_; }
    const std::vector<BetaEntry>& beta() const { return beta_; }
    const std::vector<GammaEntry>& gamma() const { return gamma_; }
    bool two_body_form() const { return gamma_.empty(); }
    bool is_chsh_shaped() const;

    /// Uniform view: alpha as n=1 terms, beta as n=2 terms, plus gamma.
    std::vector<GammaEntry> all_terms() const;

    /// beta(i,j,k,l) + beta(j,i,l,k) -- the coefficient actually multiplying
    /// <E_k^(i) E_l^(j)> since disjoint-support correlators are symmetric.
    double beta_symmetrized(int pi, int pj, int k, int l) const;

    /// Declared local bound if present, else brute-forced.
    double delta_c() const;
    std::optional<double> declared_delta_c() const { return delta_c_; }

    int total_settings() const;

    static BellInequality chsh();
    static BellInequality from_json(const nlohmann::json& j);
    static BellInequality load(const std::string& path);
    nlohmann::json to_json() const;

private:
    int n_parties_;
    std::vector<int> settings_;
    std::vector<AlphaEntry> alpha_;
    std::vector<BetaEntry> beta_;
    std::vector<GammaEntry> gamma_;
    std::optional<double> delta_c_;
};

/// One region and M_i norm-bounded Hermitian operators per party.
struct MeasurementAssignment {
    std::vector<Region> regions;
    std::vector<std::vector<Mat>> ops;  // ops[i][k] acts on regions[i]

    void validate(const Lattice& lattice, const BellInequality& ineq) const;
};

struct SeesawOptions {
    int restarts = 20;
    double tol = 1e-9;
    int max_sweeps = 500;
    std::uint64_t seed = 1;
};

struct SeesawResult {
    double value = 0;
    MeasurementAssignment assignment;
    bool converged = false;
    int sweeps = 0;
    /// most negative objective change over any half-step; >= -1e-12 when the
    /// monotonicity invariant holds
    double min_step_delta = 0;
};

struct LocalBoundResult {
    double delta_c = 0;
    std::vector<std::vector<int>> assignment;  // +-1 per party per setting
};

enum class BoundFormula {
    lemma1,
    thm3_quench,
    lemma2_twobody,
    thm6_quench_twobody,
    thm7_general,
};

std::string to_string(BoundFormula f);

struct LocalityCertificate {
    double value = 0;
    double bound = 0;
    BoundFormula formula = BoundFormula::lemma1;
    bool satisfied = false;
    double C = 0, lambda = 0;
    std::optional<double> v, t;
    double delta_c = 0;
    double r_min = 0;
    int max_region_size = 1;
    std::optional<double> gamma_constant;
    nlohmann::json to_json() const;
};

// --- CHSH ------------------------------------------------------------------

double chsh_value(const ManyBodyState& s, const Lattice& lattice,
                  const LocalOperator& a0, const LocalOperator& a1,
                  const LocalOperator& b0, const LocalOperator& b1);

SeesawResult chsh_sup_seesaw(const ManyBodyState& s, const Lattice& lattice,
                             const Region& x, const Region& y,
                             const SeesawOptions& opts = {});

/// Exact sup over Bob with Alice's operators fixed: the sum of trace norms of
/// Bob's two effective operands.
double chsh_sup_fixed_alice(const ManyBodyState& s, const Lattice& lattice,
                            const Region& x, const Region& y,
                            const Mat& a0, const Mat& a1);

/// 2 sqrt(t1 + t2) over the two largest eigenvalues of T^T T. Supremum over
/// traceless +-1 spin observables only; the full sup including identity
/// observables is max(2, this).
double horodecki_spin_sup(const Mat& rho_two_qubit);

// --- bound formulas --------------------------------------------------------

double lemma1_epsilon(int size_x, double C, double lambda, double r);
double quench_epsilon(int size_x, int size_y, double C, double lambda, double v,
                      double t, double r);
double delta_margin(const ManyBodyState& s, const Lattice& lattice,
                    const LocalOperator& a0, const LocalOperator& a1);
double r_star(int size_x, double C, double lambda, double delta);
double lemma2_bound(const Lattice& lattice, const BellInequality& ineq,
                    const std::vector<Region>& regions, double C, double lambda,
                    std::optional<std::pair<double, double>> quench_vt = std::nullopt);
double gamma_constant(const BellInequality& ineq);
double general_bound(double delta_c, double C, int max_region_size, double gamma,
                     double lambda, double r_min);

// --- functionals -----------------------------------------------------------

double bell2_value(const ManyBodyState& s, const Lattice& lattice,
                   const BellInequality& ineq, const MeasurementAssignment& meas);
double general_value(const ManyBodyState& s, const Lattice& lattice,
                     const BellInequality& ineq, const MeasurementAssignment& meas);

SeesawResult bell_sup_seesaw(const ManyBodyState& s, const Lattice& lattice,
                             const BellInequality& ineq,
                             const std::vector<Region>& regions,
                             const SeesawOptions& opts = {});

LocalBoundResult local_bound_bruteforce(const BellInequality& ineq);

// --- certification ---------------------------------------------------------

LocalityCertificate certify(const ManyBodyState& s, const Lattice& lattice,
                            const BellInequality& ineq,
                            const std::vector<Region>& regions,
                            const ClusteringFit& fit,
                            const SeesawOptions& opts = {});

LocalityCertificate certify_quench(const ManyBodyState& s, const Lattice& lattice,
                                   const BellInequality& ineq,
                                   const std::vector<Region>& regions,
                                   const PropagationFit& fit, double t,
                                   const SeesawOptions& opts = {});

}  // namespace qbell
