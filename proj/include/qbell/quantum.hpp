#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qbell/lattice.hpp"

namespace qbell {

using cxd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// Single-qubit constants.
Mat pauli_x();
Mat pauli_y();
Mat pauli_z();
Mat pauli_id();
Mat pauli_by_name(const std::string& name);  // "sx", "sy", "sz", "id"

double operator_norm(const Mat& hermitian);  // max |eigenvalue|
bool is_hermitian(const Mat& m, double tol = 1e-12);

/// Hermitian operator with a declared support region.
/// Tensor ordering convention everywhere: ascending site id, site 0 is the
/// leftmost (most significant) factor.
struct LocalOperator {
    Region support;
    Mat matrix;
    std::string label;

    LocalOperator() = default;
    LocalOperator(Region r, Mat m, std::string lbl = "");
    void check_norm_bound(double bound = 1.0, double tol = 1e-10) const;
};

struct HamTerm {
    Region support;
    Mat matrix;
};

struct HamiltonianSpec {
    std::vector<HamTerm> terms;
    double max_range = 2.0;  // short-range invariant: term diameter <= max_range
};

enum class StateKind { pure, mixed };

/// Pure vector or density matrix on the full lattice Hilbert space.
struct ManyBodyState {
    StateKind kind = StateKind::pure;
    Vec psi;   // kind == pure
    Mat rho;   // kind == mixed
    std::string provenance = "custom";  // ground | thermal(b) | quench(t) | product | custom

    std::int64_t dim() const {
        return kind == StateKind::pure ? psi.size() : rho.rows();
    }
    Mat density() const;  // materializes |psi><psi| for pure states
    void validate(double tol = 1e-10) const;
};

struct GroundStateResult {
    double energy = 0;
    double gap = 0;  // second-lowest distinct eigenvalue minus lowest
    ManyBodyState state;
    bool degenerate = false;
};

struct GroundStateOptions {
    double degeneracy_tol = 1e-8;
    int max_lanczos_iter = 400;
    double lanczos_tol = 1e-12;
    std::uint64_t seed = 0x9e3779b97f4a7c15ull;
    std::int64_t dense_threshold = 2048;  // dense eigensolve at or below this dim
};

/// Full Hamiltonian as a term list. Dense matrix and eigendecomposition are
/// materialized lazily (write-once) and only below the dense threshold.
class Hamiltonian {
public:
    Hamiltonian(Lattice lattice, HamiltonianSpec spec, const DimensionCaps& caps = {});

    const Lattice& lattice() const { return lattice_; }
    const std::vector<HamTerm>& terms() const { return spec_.terms; }
    std::int64_t dim() const { return lattice_.dim(); }
    double range() const { return range_; }

    Vec apply(const Vec& psi) const;  // matrix-free H|psi>
    const Mat& dense() const;         // cached; throws DimensionCapExceeded when huge
    const Eigen::SelfAdjointEigenSolver<Mat>& eig() const;  // cached dense solve

private:
    Lattice lattice_;
    HamiltonianSpec spec_;
    DimensionCaps caps_;
    double range_ = 0;
    mutable std::shared_ptr<Mat> dense_;
    mutable std::shared_ptr<Eigen::SelfAdjointEigenSolver<Mat>> eig_;
};

Hamiltonian build_hamiltonian(const Lattice& lattice, const HamiltonianSpec& spec,
                              const DimensionCaps& caps = {});

GroundStateResult ground_state(const Hamiltonian& h, const GroundStateOptions& opts = {});

/// rho(beta) = exp(-beta H) / Tr exp(-beta H). Full rank for finite beta.
ManyBodyState thermal_state(const Hamiltonian& h, double beta);

/// Tensor product of per-site density matrices (pure output when every factor
/// is pure).
ManyBodyState product_state(const Lattice& lattice, const std::vector<Mat>& site_states);

struct EvolveOptions {
    std::int64_t dense_threshold = 2048;
    int krylov_dim = 30;
    double krylov_dt = 0.05;
};

/// Schroedinger picture: rho(t) = exp(-itH) rho exp(itH).
ManyBodyState evolve_state(const Hamiltonian& h, const ManyBodyState& s, double t,
                           const EvolveOptions& opts = {});

/// Partial trace onto `keep` (ordering: ascending site id within keep).
Mat reduce(const ManyBodyState& s, const Lattice& lattice, const Region& keep);

/// op extended by identities onto the ordered subspace site list. `subspace`
/// must contain every support site.
Mat embed_in_subspace(const Mat& op, const Region& support,
                      const std::vector<int>& subspace, int local_dim);

/// op tensor identity on the full lattice complement.
Mat embed(const LocalOperator& op, const Lattice& lattice,
          const DimensionCaps& caps = {});

/// Tr(rho * embed(O1) ... embed(On)) for pairwise disjoint supports; real by
/// construction. Evaluated on the reduced state of the union support.
double expect(const ManyBodyState& s, const Lattice& lattice,
              const std::vector<LocalOperator>& ops);

// Named models. Neighbor bonds are nearest-neighbor in the lattice graph
// (chain links, 4-neighbor grid links, wrap bonds when periodic).
// tfim:       H = -J sum_<ij> sz_i sz_j - g sum_i sx_i
// xxz:        H = J sum_<ij> (sx sx + sy sy + delta sz sz) - h sum_i sz_i
// heisenberg: H = J sum_<ij> (sx sx + sy sy + sz sz) - h sum_i sz_i
HamiltonianSpec make_tfim(const Lattice& lattice, double J, double g);
HamiltonianSpec make_xxz(const Lattice& lattice, double J, double delta, double h);
HamiltonianSpec make_heisenberg(const Lattice& lattice, double J, double h);

std::vector<std::pair<int, int>> neighbor_bonds(const Lattice& lattice);

}  // namespace qbell
