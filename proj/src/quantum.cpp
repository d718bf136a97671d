#include "qbell/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace qbell {

namespace {

const cxd kI(0.0, 1.0);

/// Strides for an m-factor space with uniform local dimension d; factor 0 is
/// the most significant digit (leftmost tensor slot).
std::vector<std::int64_t> make_strides(int m, int d) {
    std::vector<std::int64_t> s(m);
    std::int64_t acc = 1;
    for (int p = m - 1; p >= 0; --p) {
        s[p] = acc;
        acc *= d;
    }
    return s;
}

std::int64_t ipow(std::int64_t base, int exp) {
    std::int64_t r = 1;
    while (exp-- > 0) r *= base;
    return r;
}

}  // namespace

Mat pauli_x() {
    Mat m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

Mat pauli_y() {
    Mat m(2, 2);
    m << 0, cxd(0, -1), cxd(0, 1), 0;
    return m;
}

Mat pauli_z() {
    Mat m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

Mat pauli_id() { return Mat::Identity(2, 2); }

Mat pauli_by_name(const std::string& name) {
    if (name == "sx" || name == "x") return pauli_x();
    if (name == "sy" || name == "y") return pauli_y();
    if (name == "sz" || name == "z") return pauli_z();
    if (name == "id" || name == "i") return pauli_id();
    throw ConfigError("unknown operator name '" + name + "'");
}

double operator_norm(const Mat& hermitian) {
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitian, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool is_hermitian(const Mat& m, double tol) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

LocalOperator::LocalOperator(Region r, Mat m, std::string lbl)
    : support(std::move(r)), matrix(std::move(m)), label(std::move(lbl)) {
    if (!is_hermitian(matrix))
        throw InvalidState("local operator must be Hermitian" +
                           (label.empty() ? std::string() : " (" + label + ")"));
}

void LocalOperator::check_norm_bound(double bound, double tol) const {
    if (operator_norm(matrix) > bound + tol)
        throw NormViolation("operator norm exceeds " + std::to_string(bound) +
                            (label.empty() ? std::string() : " (" + label + ")"));
}

Mat ManyBodyState::density() const {
    if (kind == StateKind::mixed) return rho;
    return psi * psi.adjoint();
}

void ManyBodyState::validate(double tol) const {
    if (kind == StateKind::pure) {
        if (std::abs(psi.norm() - 1.0) > tol)
            throw InvalidState("pure state is not normalized");
    } else {
        if (!is_hermitian(rho, 1e-10)) throw InvalidState("density matrix not Hermitian");
        if (std::abs(rho.trace().real() - 1.0) > tol)
            throw InvalidState("density matrix trace != 1");
        Eigen::SelfAdjointEigenSolver<Mat> es(rho, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -tol)
            throw InvalidState("density matrix has negative eigenvalue");
    }
}

// ---------------------------------------------------------------------------
// Hamiltonian

Hamiltonian::Hamiltonian(Lattice lattice, HamiltonianSpec spec, const DimensionCaps& caps)
    : lattice_(std::move(lattice)), spec_(std::move(spec)), caps_(caps) {
    for (const auto& term : spec_.terms) {
        lattice_.check_region(term.support);
        const std::int64_t d_expect = ipow(lattice_.local_dim(), term.support.size());
        if (term.matrix.rows() != d_expect || term.matrix.cols() != d_expect)
            throw ShapeMismatch("term matrix dimension does not match support size");
        if (!is_hermitian(term.matrix))
            throw InvalidState("Hamiltonian term is not Hermitian");
        double diam = 0;
        for (int a : term.support.sites)
            for (int b : term.support.sites)
                diam = std::max(diam, lattice_.distance(a, b));
        if (diam > spec_.max_range + 1e-12)
            throw RangeViolation("term diameter " + std::to_string(diam) +
                                 " exceeds max interaction range " +
                                 std::to_string(spec_.max_range));
        range_ = std::max(range_, diam);
    }
}

Hamiltonian build_hamiltonian(const Lattice& lattice, const HamiltonianSpec& spec,
                              const DimensionCaps& caps) {
    return Hamiltonian(lattice, spec, caps);
}

Vec Hamiltonian::apply(const Vec& psi) const {
    const int n = lattice_.n_sites();
    const int d = lattice_.local_dim();
    const auto strides = make_strides(n, d);
    Vec out = Vec::Zero(psi.size());
    for (const auto& term : spec_.terms) {
        const int k = term.support.size();
        const std::int64_t dk = ipow(d, k);
        std::vector<std::int64_t> sstr(k);
        for (int p = 0; p < k; ++p) sstr[p] = strides[term.support.sites[p]];
        for (std::int64_t nidx = 0; nidx < psi.size(); ++nidx) {
            // digits of nidx on the support, packed as a dk-index
            std::int64_t row = 0, base = nidx;
            for (int p = 0; p < k; ++p) {
                const std::int64_t digit = (nidx / sstr[p]) % d;
                row = row * d + digit;
                base -= digit * sstr[p];
            }
            cxd acc = 0;
            for (std::int64_t col = 0; col < dk; ++col) {
                const cxd mval = term.matrix(row, col);
                if (mval == cxd(0, 0)) continue;
                std::int64_t src = base, c = col;
                for (int p = k - 1; p >= 0; --p) {
                    src += (c % d) * sstr[p];
                    c /= d;
                }
                acc += mval * psi[src];
            }
            out[nidx] += acc;
        }
    }
    return out;
}

const Mat& Hamiltonian::dense() const {
    if (!dense_) {
        if (double(dim()) > caps_.dense_cap)
            throw DimensionCapExceeded("dense Hamiltonian of dim " +
                                       std::to_string(dim()) + " exceeds cap");
        auto m = std::make_shared<Mat>(Mat::Zero(dim(), dim()));
        for (const auto& term : spec_.terms)
            *m += embed(LocalOperator(term.support, term.matrix), lattice_, caps_);
        dense_ = std::move(m);
    }
    return *dense_;
}

const Eigen::SelfAdjointEigenSolver<Mat>& Hamiltonian::eig() const {
    if (!eig_) {
        eig_ = std::make_shared<Eigen::SelfAdjointEigenSolver<Mat>>(dense());
        if (eig_->info() != Eigen::Success)
            throw ConvergenceFailure("dense eigendecomposition failed");
    }
    return *eig_;
}

// ---------------------------------------------------------------------------
// Ground state

namespace {

GroundStateResult ground_state_dense(const Hamiltonian& h, const GroundStateOptions& opts) {
    const auto& es = h.eig();
    const Eigen::VectorXd& ev = es.eigenvalues();
    GroundStateResult res;
    res.energy = ev[0];
    res.gap = 0;
    bool found = false;
    for (int i = 1; i < ev.size(); ++i) {
        if (ev[i] > ev[0] + opts.degeneracy_tol) {
            res.gap = ev[i] - ev[0];
            found = true;
            break;
        }
    }
    res.degenerate = !found || (ev.size() > 1 && ev[1] - ev[0] < opts.degeneracy_tol);
    res.state.kind = StateKind::pure;
    res.state.psi = es.eigenvectors().col(0);
    res.state.provenance = "ground";
    return res;
}

/// Lanczos with full reorthogonalization; returns the lowest Ritz pair plus
/// the lowest distinct excited Ritz value for the gap.
GroundStateResult ground_state_lanczos(const Hamiltonian& h, const GroundStateOptions& opts) {
    const std::int64_t D = h.dim();
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec v(D);
    for (std::int64_t i = 0; i < D; ++i) v[i] = cxd(gauss(rng), gauss(rng));
    v.normalize();

    std::vector<Vec> basis;
    std::vector<double> alpha, beta;
    basis.push_back(v);

    const int max_iter = std::min<std::int64_t>(opts.max_lanczos_iter, D);
    double prev_e0 = std::numeric_limits<double>::infinity();
    double prev_e1 = std::numeric_limits<double>::infinity();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tes;

    for (int j = 0; j < max_iter; ++j) {
        Vec w = h.apply(basis[j]);
        const double a = std::real(basis[j].dot(w));
        alpha.push_back(a);
        w -= a * basis[j];
        if (j > 0) w -= beta[j - 1] * basis[j - 1];
        // full reorthogonalization, twice
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& u : basis) w -= u.dot(w) * u;
        const double b = w.norm();

        const int m = j + 1;
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) T(i, i) = alpha[i];
        for (int i = 0; i + 1 < m; ++i) T(i, i + 1) = T(i + 1, i) = beta[i];
        tes.compute(T);
        const double e0 = tes.eigenvalues()[0];
        double e1 = e0;
        for (int i = 1; i < m; ++i)
            if (tes.eigenvalues()[i] > e0 + opts.degeneracy_tol) {
                e1 = tes.eigenvalues()[i];
                break;
            }
        const double resid = (m > 0 && b > 0) ? b * std::abs(tes.eigenvectors()(m - 1, 0)) : 0;
        const bool e_stable = std::abs(e0 - prev_e0) < opts.lanczos_tol &&
                              std::abs(e1 - prev_e1) < 1e-9;
        prev_e0 = e0;
        prev_e1 = e1;

        if (b < 1e-13 || (m >= 10 && e_stable && resid < 1e-10)) {
            GroundStateResult res;
            res.energy = e0;
            res.gap = e1 - e0;
            res.degenerate = res.gap < opts.degeneracy_tol;
            Vec ground = Vec::Zero(D);
            for (int i = 0; i < m; ++i) ground += tes.eigenvectors()(i, 0) * basis[i];
            ground.normalize();
            res.state.kind = StateKind::pure;
            res.state.psi = std::move(ground);
            res.state.provenance = "ground";
            return res;
        }
        beta.push_back(b);
        basis.push_back(w / b);
    }
    throw ConvergenceFailure("Lanczos did not converge in " +
                             std::to_string(max_iter) + " iterations");
}

}  // namespace

GroundStateResult ground_state(const Hamiltonian& h, const GroundStateOptions& opts) {
    if (h.dim() <= opts.dense_threshold) return ground_state_dense(h, opts);
    return ground_state_lanczos(h, opts);
}

ManyBodyState thermal_state(const Hamiltonian& h, double beta) {
    if (!(beta >= 0) || !std::isfinite(beta))
        throw InvalidState("beta must be finite and >= 0");
    const auto& es = h.eig();
    const Eigen::VectorXd& ev = es.eigenvalues();
    // shift by the ground energy to avoid overflow at large beta
    Eigen::VectorXd w = (-beta * (ev.array() - ev.minCoeff())).exp();
    w /= w.sum();
    ManyBodyState s;
    s.kind = StateKind::mixed;
    s.rho = es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
    s.rho = 0.5 * (s.rho + s.rho.adjoint().eval());
    s.provenance = "thermal(" + std::to_string(beta) + ")";
    return s;
}

ManyBodyState product_state(const Lattice& lattice, const std::vector<Mat>& site_states) {
    if (static_cast<int>(site_states.size()) != lattice.n_sites())
        throw SiteCountMismatch("expected " + std::to_string(lattice.n_sites()) +
                                " per-site states, got " + std::to_string(site_states.size()));
    const int d = lattice.local_dim();
    bool all_pure = true;
    for (const auto& m : site_states) {
        if (m.rows() != d || m.cols() != d)
            throw ShapeMismatch("site state dimension mismatch");
        if (!is_hermitian(m, 1e-10) || std::abs(m.trace().real() - 1.0) > 1e-10)
            throw InvalidState("site state must be a density matrix");
        if (std::abs((m * m).trace().real() - 1.0) > 1e-10) all_pure = false;
    }

    ManyBodyState s;
    if (all_pure) {
        Vec psi = Vec::Ones(1);
        for (const auto& m : site_states) {
            // principal eigenvector of a rank-1 projector
            Eigen::SelfAdjointEigenSolver<Mat> es(m);
            Vec local = es.eigenvectors().col(d - 1);
            Vec next(psi.size() * d);
            for (std::int64_t i = 0; i < psi.size(); ++i)
                for (int j = 0; j < d; ++j) next[i * d + j] = psi[i] * local[j];
            psi = std::move(next);
        }
        s.kind = StateKind::pure;
        s.psi = std::move(psi);
    } else {
        Mat rho = Mat::Ones(1, 1);
        for (const auto& m : site_states) {
            Mat next(rho.rows() * d, rho.cols() * d);
            for (std::int64_t i = 0; i < rho.rows(); ++i)
                for (std::int64_t j = 0; j < rho.cols(); ++j)
                    next.block(i * d, j * d, d, d) = rho(i, j) * m;
            rho = std::move(next);
        }
        s.kind = StateKind::mixed;
        s.rho = std::move(rho);
    }
    s.provenance = "product";
    return s;
}

// ---------------------------------------------------------------------------
// Time evolution

namespace {

/// One Krylov step psi -> exp(-i dt H) psi.
Vec krylov_step(const Hamiltonian& h, const Vec& psi0, double dt, int m) {
    const double nrm = psi0.norm();
    if (nrm < 1e-300) return psi0;
    std::vector<Vec> basis{psi0 / nrm};
    std::vector<double> alpha, beta;
    int mm = std::min<std::int64_t>(m, psi0.size());
    int built = 0;
    for (int j = 0; j < mm; ++j) {
        Vec w = h.apply(basis[j]);
        const double a = std::real(basis[j].dot(w));
        alpha.push_back(a);
        w -= a * basis[j];
        if (j > 0) w -= beta[j - 1] * basis[j - 1];
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& u : basis) w -= u.dot(w) * u;
        const double b = w.norm();
        built = j + 1;
        if (b < 1e-13 || j + 1 == mm) break;
        beta.push_back(b);
        basis.push_back(w / b);
    }
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(built, built);
    for (int i = 0; i < built; ++i) T(i, i) = alpha[i];
    for (int i = 0; i + 1 < built; ++i) T(i, i + 1) = T(i + 1, i) = beta[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tes(T);
    Eigen::VectorXcd phases(built);
    for (int i = 0; i < built; ++i)
        phases[i] = std::exp(kI * (-dt * tes.eigenvalues()[i]));
    Eigen::VectorXcd coef =
        tes.eigenvectors().cast<cxd>() *
        (phases.array() * tes.eigenvectors().row(0).transpose().cast<cxd>().array()).matrix();
    Vec out = Vec::Zero(psi0.size());
    for (int i = 0; i < built; ++i) out += coef[i] * basis[i];
    return out * nrm;
}

}  // namespace

ManyBodyState evolve_state(const Hamiltonian& h, const ManyBodyState& s, double t,
                           const EvolveOptions& opts) {
    ManyBodyState out = s;
    if (t == 0) return out;
    if (s.kind == StateKind::pure && h.dim() > opts.dense_threshold) {
        const int nsteps = std::max(1, int(std::ceil(std::abs(t) / opts.krylov_dt)));
        const double dt = t / nsteps;
        Vec psi = s.psi;
        for (int i = 0; i < nsteps; ++i) psi = krylov_step(h, psi, dt, opts.krylov_dim);
        psi /= psi.norm();
        out.psi = std::move(psi);
    } else {
        const auto& es = h.eig();
        Eigen::VectorXcd ph(es.eigenvalues().size());
        for (int i = 0; i < ph.size(); ++i)
            ph[i] = std::exp(kI * (-t * es.eigenvalues()[i]));
        const Mat u = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
        if (s.kind == StateKind::pure) {
            out.psi = u * s.psi;
            out.psi /= out.psi.norm();
        } else {
            out.rho = u * s.rho * u.adjoint();
            out.rho = 0.5 * (out.rho + out.rho.adjoint().eval());
        }
    }
    out.provenance = s.provenance + "+quench(" + std::to_string(t) + ")";
    return out;
}

// ---------------------------------------------------------------------------
// Partial trace, embedding, expectation

Mat reduce(const ManyBodyState& s, const Lattice& lattice, const Region& keep) {
    lattice.check_region(keep);
    const int n = lattice.n_sites();
    const int d = lattice.local_dim();
    const auto strides = make_strides(n, d);

    std::vector<int> rest;
    for (int i = 0; i < n; ++i)
        if (!keep.contains(i)) rest.push_back(i);

    const std::int64_t dk = ipow(d, keep.size());
    const std::int64_t dr = ipow(d, static_cast<int>(rest.size()));

    auto full_index = [&](std::int64_t a, std::int64_t b) {
        std::int64_t idx = 0;
        for (int p = keep.size() - 1; p >= 0; --p) {
            idx += (a % d) * strides[keep.sites[p]];
            a /= d;
        }
        for (int p = static_cast<int>(rest.size()) - 1; p >= 0; --p) {
            idx += (b % d) * strides[rest[p]];
            b /= d;
        }
        return idx;
    };

    if (s.kind == StateKind::pure) {
        Mat m(dk, dr);
        for (std::int64_t a = 0; a < dk; ++a)
            for (std::int64_t b = 0; b < dr; ++b) m(a, b) = s.psi[full_index(a, b)];
        Mat r = m * m.adjoint();
        return 0.5 * (r + r.adjoint().eval());
    }
    Mat r = Mat::Zero(dk, dk);
    for (std::int64_t a = 0; a < dk; ++a)
        for (std::int64_t c = 0; c < dk; ++c) {
            cxd acc = 0;
            for (std::int64_t b = 0; b < dr; ++b)
                acc += s.rho(full_index(a, b), full_index(c, b));
            r(a, c) = acc;
        }
    return 0.5 * (r + r.adjoint().eval());
}

Mat embed_in_subspace(const Mat& op, const Region& support,
                      const std::vector<int>& subspace, int local_dim) {
    const int m = static_cast<int>(subspace.size());
    const int d = local_dim;
    std::vector<int> pos;  // positions of support sites within the subspace
    for (int site : support.sites) {
        auto it = std::lower_bound(subspace.begin(), subspace.end(), site);
        if (it == subspace.end() || *it != site)
            throw InvalidRegion("support site not contained in subspace");
        pos.push_back(static_cast<int>(it - subspace.begin()));
    }
    const auto strides = make_strides(m, d);
    std::vector<int> rest;
    for (int p = 0; p < m; ++p)
        if (std::find(pos.begin(), pos.end(), p) == pos.end()) rest.push_back(p);

    const std::int64_t dop = op.rows();
    const std::int64_t drest = ipow(d, static_cast<int>(rest.size()));
    const std::int64_t dtot = ipow(d, m);
    Mat out = Mat::Zero(dtot, dtot);
    for (std::int64_t a = 0; a < dop; ++a)
        for (std::int64_t c = 0; c < dop; ++c) {
            const cxd v = op(a, c);
            if (v == cxd(0, 0)) continue;
            for (std::int64_t b = 0; b < drest; ++b) {
                std::int64_t i = 0, j = 0, aa = a, cc = c, bb = b;
                for (int p = static_cast<int>(pos.size()) - 1; p >= 0; --p) {
                    i += (aa % d) * strides[pos[p]];
                    j += (cc % d) * strides[pos[p]];
                    aa /= d;
                    cc /= d;
                }
                for (int p = static_cast<int>(rest.size()) - 1; p >= 0; --p) {
                    i += (bb % d) * strides[rest[p]];
                    j += (bb % d) * strides[rest[p]];
                    bb /= d;
                }
                out(i, j) += v;
            }
        }
    return out;
}

Mat embed(const LocalOperator& op, const Lattice& lattice, const DimensionCaps& caps) {
    lattice.check_region(op.support);
    if (double(lattice.dim()) > caps.dense_cap)
        throw DimensionCapExceeded("dense embed of dim " + std::to_string(lattice.dim()));
    std::vector<int> all(lattice.n_sites());
    for (int i = 0; i < lattice.n_sites(); ++i) all[i] = i;
    return embed_in_subspace(op.matrix, op.support, all, lattice.local_dim());
}

double expect(const ManyBodyState& s, const Lattice& lattice,
              const std::vector<LocalOperator>& ops) {
    std::vector<Region> regions;
    std::vector<int> union_sites;
    for (const auto& op : ops) {
        lattice.check_region(op.support);
        regions.push_back(op.support);
        union_sites.insert(union_sites.end(), op.support.sites.begin(),
                           op.support.sites.end());
    }
    if (!validate_disjoint(regions))
        throw OverlappingSupports("expect requires pairwise disjoint supports");
    if (ops.empty()) return 1.0;
    std::sort(union_sites.begin(), union_sites.end());
    const Mat rho_u = reduce(s, lattice, Region(union_sites));
    Mat prod = Mat::Identity(rho_u.rows(), rho_u.cols());
    for (const auto& op : ops)
        prod *= embed_in_subspace(op.matrix, op.support, union_sites, lattice.local_dim());
    return (rho_u * prod).trace().real();
}

// ---------------------------------------------------------------------------
// Models

std::vector<std::pair<int, int>> neighbor_bonds(const Lattice& lattice) {
    std::vector<std::pair<int, int>> bonds;
    const int w = lattice.width(), hgt = lattice.height();
    auto id = [&](int x, int y) { return y * w + x; };
    for (int y = 0; y < hgt; ++y) {
        for (int x = 0; x < w; ++x) {
            if (x + 1 < w) bonds.emplace_back(id(x, y), id(x + 1, y));
            if (y + 1 < hgt) bonds.emplace_back(id(x, y), id(x, y + 1));
        }
    }
    if (lattice.boundary() == Boundary::periodic) {
        if (w > 2)
            for (int y = 0; y < hgt; ++y) bonds.emplace_back(id(0, y), id(w - 1, y));
        if (hgt > 2)
            for (int x = 0; x < w; ++x) bonds.emplace_back(id(x, 0), id(x, hgt - 1));
    }
    for (auto& b : bonds)
        if (b.first > b.second) std::swap(b.first, b.second);
    return bonds;
}

namespace {

Mat kron2(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::int64_t i = 0; i < a.rows(); ++i)
        for (std::int64_t j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

HamiltonianSpec bond_field_model(const Lattice& lattice, const Mat& bond,
                                 const Mat& field) {
    if (lattice.local_dim() != 2)
        throw ConfigError("named spin models require local_dim = 2");
    HamiltonianSpec spec;
    for (auto [a, b] : neighbor_bonds(lattice))
        spec.terms.push_back({Region({a, b}), bond});
    if (field.cwiseAbs().maxCoeff() > 0)
        for (int i = 0; i < lattice.n_sites(); ++i)
            spec.terms.push_back({Region::single(i), field});
    return spec;
}

}  // namespace

HamiltonianSpec make_tfim(const Lattice& lattice, double J, double g) {
    return bond_field_model(lattice, -J * kron2(pauli_z(), pauli_z()), -g * pauli_x());
}

HamiltonianSpec make_xxz(const Lattice& lattice, double J, double delta, double h) {
    const Mat bond = J * (kron2(pauli_x(), pauli_x()) + kron2(pauli_y(), pauli_y()) +
                          delta * kron2(pauli_z(), pauli_z()));
    return bond_field_model(lattice, bond, -h * pauli_z());
}

HamiltonianSpec make_heisenberg(const Lattice& lattice, double J, double h) {
    return make_xxz(lattice, J, 1.0, h);
}

}  // namespace qbell
