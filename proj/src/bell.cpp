#include "qbell/bell.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

namespace qbell {

namespace {

std::int64_t ipow(std::int64_t base, int exp) {
    std::int64_t r = 1;
    while (exp-- > 0) r *= base;
    return r;
}

/// Partial trace of a (possibly non-Hermitian) matrix over the complement of
/// `keep` factor positions in an m-factor space of uniform local dimension d.
Mat partial_trace_positions(const Mat& mat, const std::vector<int>& keep, int d, int m) {
    std::vector<std::int64_t> strides(m);
    std::int64_t acc = 1;
    for (int p = m - 1; p >= 0; --p) {
        strides[p] = acc;
        acc *= d;
    }
    std::vector<int> rest;
    for (int p = 0; p < m; ++p)
        if (std::find(keep.begin(), keep.end(), p) == keep.end()) rest.push_back(p);
    const std::int64_t dk = ipow(d, static_cast<int>(keep.size()));
    const std::int64_t dr = ipow(d, static_cast<int>(rest.size()));
    auto full = [&](std::int64_t a, std::int64_t b) {
        std::int64_t idx = 0;
        for (int p = static_cast<int>(keep.size()) - 1; p >= 0; --p) {
            idx += (a % d) * strides[keep[p]];
            a /= d;
        }
        for (int p = static_cast<int>(rest.size()) - 1; p >= 0; --p) {
            idx += (b % d) * strides[rest[p]];
            b /= d;
        }
        return idx;
    };
    Mat out = Mat::Zero(dk, dk);
    for (std::int64_t a = 0; a < dk; ++a)
        for (std::int64_t c = 0; c < dk; ++c) {
            cxd s = 0;
            for (std::int64_t b = 0; b < dr; ++b) s += mat(full(a, b), full(c, b));
            out(a, c) = s;
        }
    return out;
}

/// argmax over Hermitian ||A|| <= 1 of Tr(A K): the eigen-sign operator of K.
/// Eigenvalues below 1e-12 in magnitude map to +1.
Mat sign_operator(const Mat& k) {
    const Mat h = 0.5 * (k + k.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    Eigen::VectorXd s(es.eigenvalues().size());
    for (int i = 0; i < s.size(); ++i)
        s[i] = es.eigenvalues()[i] < -1e-12 ? -1.0 : 1.0;
    return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().adjoint();
}

double trace_norm_hermitian(const Mat& k) {
    const Mat h = 0.5 * (k + k.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

Mat random_sign_operator(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Mat g(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) g(i, j) = cxd(gauss(rng), gauss(rng));
    return sign_operator(0.5 * (g + g.adjoint()));
}

/// State reduced to the union of the party regions, with the bookkeeping
/// needed to embed per-party operators and contract effective operands.
struct Scenario {
    Mat rho;
    std::vector<int> union_sites;
    std::vector<Region> regions;
    std::vector<std::vector<int>> party_pos;  // factor positions within the union
    std::vector<int> party_dim;
    int d = 2;
    int m = 0;
};

Scenario make_scenario(const ManyBodyState& s, const Lattice& lattice,
                       const std::vector<Region>& regions) {
    if (!validate_disjoint(regions))
        throw OverlappingSupports("party regions must be pairwise disjoint");
    Scenario scn;
    scn.regions = regions;
    scn.d = lattice.local_dim();
    for (const auto& r : regions) {
        lattice.check_region(r);
        scn.union_sites.insert(scn.union_sites.end(), r.sites.begin(), r.sites.end());
    }
    std::sort(scn.union_sites.begin(), scn.union_sites.end());
    scn.m = static_cast<int>(scn.union_sites.size());
    scn.rho = reduce(s, lattice, Region(scn.union_sites));
    for (const auto& r : regions) {
        std::vector<int> pos;
        for (int site : r.sites)
            pos.push_back(static_cast<int>(
                std::lower_bound(scn.union_sites.begin(), scn.union_sites.end(), site) -
                scn.union_sites.begin()));
        scn.party_pos.push_back(pos);
        scn.party_dim.push_back(static_cast<int>(ipow(scn.d, r.size())));
    }
    return scn;
}

Mat embed_party(const Scenario& scn, int party, const Mat& op) {
    return embed_in_subspace(op, scn.regions[party], scn.union_sites, scn.d);
}

double evaluate_terms(const Scenario& scn, const std::vector<GammaEntry>& terms,
                      const std::vector<std::vector<Mat>>& embedded) {
    double total = 0;
    for (const auto& t : terms) {
        Mat prod = Mat::Identity(scn.rho.rows(), scn.rho.cols());
        for (std::size_t p = 0; p < t.parties.size(); ++p)
            prod *= embedded[t.parties[p]][t.settings[p]];
        total += t.value * (scn.rho * prod).trace().real();
    }
    return total;
}

/// Effective operand of (party, setting): sum over terms containing it of
/// gamma * Tr_{others}(rho * product of the other parties' operators).
Mat effective_operand(const Scenario& scn, const std::vector<GammaEntry>& terms,
                      const std::vector<std::vector<Mat>>& embedded, int party,
                      int setting) {
    Mat k = Mat::Zero(scn.party_dim[party], scn.party_dim[party]);
    for (const auto& t : terms) {
        auto it = std::find(t.parties.begin(), t.parties.end(), party);
        if (it == t.parties.end()) continue;
        const std::size_t pos = static_cast<std::size_t>(it - t.parties.begin());
        if (t.settings[pos] != setting) continue;
        Mat prod = scn.rho;
        for (std::size_t p = 0; p < t.parties.size(); ++p) {
            if (p == pos) continue;
            prod *= embedded[t.parties[p]][t.settings[p]];
        }
        k += t.value * partial_trace_positions(prod, scn.party_pos[party], scn.d, scn.m);
    }
    return k;
}

}  // namespace

// ---------------------------------------------------------------------------
// BellInequality

BellInequality::BellInequality(int n_parties, std::vector<int> settings_per_party)
    : n_parties_(n_parties), settings_(std::move(settings_per_party)) {
    if (n_parties_ < 1 || static_cast<int>(settings_.size()) != n_parties_)
        throw ShapeMismatch("need one measurement count per party");
    for (int m : settings_)
        if (m < 1) throw ShapeMismatch("measurement counts must be >= 1");
}

void BellInequality::add_alpha(int party, int setting, double value) {
    if (party < 0 || party >= n_parties_ || setting < 0 || setting >= settings_[party])
        throw ShapeMismatch("alpha index out of range");
    alpha_.push_back({party, setting, value});
}

void BellInequality::add_beta(int pi, int pj, int k, int l, double value) {
    if (pi < 0 || pi >= n_parties_ || pj < 0 || pj >= n_parties_ || pi == pj ||
        k < 0 || k >= settings_[pi] || l < 0 || l >= settings_[pj])
        throw ShapeMismatch("beta index out of range");
    beta_.push_back({pi, pj, k, l, value});
}

void BellInequality::add_gamma(std::vector<int> parties, std::vector<int> settings,
                               double value) {
    if (parties.empty() || parties.size() != settings.size())
        throw ShapeMismatch("gamma term needs matching party and setting lists");
    std::set<int> uniq(parties.begin(), parties.end());
    if (uniq.size() != parties.size())
        throw ShapeMismatch("gamma term parties must be distinct");
    for (std::size_t p = 0; p < parties.size(); ++p) {
        if (parties[p] < 0 || parties[p] >= n_parties_ || settings[p] < 0 ||
            settings[p] >= settings_[parties[p]])
            throw ShapeMismatch("gamma index out of range");
    }
    gamma_.push_back({std::move(parties), std::move(settings), value});
}

void BellInequality::declare_delta_c(double value) {
    if (total_settings() <= 20) {
        const double computed = local_bound_bruteforce(*this).delta_c;
        if (std::abs(computed - value) > 1e-9)
            throw ConfigError("declared delta_c " + std::to_string(value) +
                              " disagrees with enumerated local bound " +
                              std::to_string(computed));
    }
    delta_c_ = value;
}

bool BellInequality::is_chsh_shaped() const {
    if (n_parties_ != 2 || settings_ != std::vector<int>{2, 2}) return false;
    if (!alpha_.empty() || !gamma_.empty()) return false;
    double coef[2][2] = {{0, 0}, {0, 0}};
    for (const auto& b : beta_) {
        if (b.party_i == 0)
            coef[b.setting_k][b.setting_l] += b.value;
        else
            coef[b.setting_l][b.setting_k] += b.value;
    }
    return coef[0][0] == 1 && coef[0][1] == 1 && coef[1][0] == 1 && coef[1][1] == -1;
}

std::vector<GammaEntry> BellInequality::all_terms() const {
    std::vector<GammaEntry> terms;
    for (const auto& a : alpha_) terms.push_back({{a.party}, {a.setting}, a.value});
    for (const auto& b : beta_)
        terms.push_back({{b.party_i, b.party_j}, {b.setting_k, b.setting_l}, b.value});
    for (const auto& g : gamma_) terms.push_back(g);
    return terms;
}

double BellInequality::beta_symmetrized(int pi, int pj, int k, int l) const {
    double total = 0;
    for (const auto& b : beta_) {
        if (b.party_i == pi && b.party_j == pj && b.setting_k == k && b.setting_l == l)
            total += b.value;
        if (b.party_i == pj && b.party_j == pi && b.setting_k == l && b.setting_l == k)
            total += b.value;
    }
    return total;
}

double BellInequality::delta_c() const {
    if (delta_c_) return *delta_c_;
    return local_bound_bruteforce(*this).delta_c;
}

int BellInequality::total_settings() const {
    int total = 0;
    for (int m : settings_) total += m;
    return total;
}

BellInequality BellInequality::chsh() {
    BellInequality ineq(2, {2, 2});
    ineq.add_beta(0, 1, 0, 0, 1);
    ineq.add_beta(0, 1, 0, 1, 1);
    ineq.add_beta(0, 1, 1, 0, 1);
    ineq.add_beta(0, 1, 1, 1, -1);
    ineq.delta_c_ = 2.0;
    return ineq;
}

BellInequality BellInequality::from_json(const nlohmann::json& j) {
    if (!j.contains("N") || !j.contains("M"))
        throw ConfigError("inequality file must declare N and M");
    BellInequality ineq(j.at("N").get<int>(), j.at("M").get<std::vector<int>>());
    for (const auto& a : j.value("alpha", nlohmann::json::array())) {
        if (!a.is_array() || a.size() != 3)
            throw ConfigError("alpha entries are [party, setting, value] triples");
        ineq.add_alpha(a[0].get<int>(), a[1].get<int>(), a[2].get<double>());
    }
    for (const auto& b : j.value("beta", nlohmann::json::array())) {
        if (!b.is_array() || b.size() != 5)
            throw ConfigError("beta entries are [i, j, k, l, value] tuples");
        ineq.add_beta(b[0].get<int>(), b[1].get<int>(), b[2].get<int>(),
                      b[3].get<int>(), b[4].get<double>());
    }
    for (const auto& g : j.value("gamma", nlohmann::json::array())) {
        ineq.add_gamma(g.at("parties").get<std::vector<int>>(),
                       g.at("settings").get<std::vector<int>>(),
                       g.at("value").get<double>());
    }
    if (j.contains("delta_c")) ineq.declare_delta_c(j.at("delta_c").get<double>());
    return ineq;
}

BellInequality BellInequality::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open inequality file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("inequality file '" + path + "': " + e.what());
    }
    return from_json(j);
}

nlohmann::json BellInequality::to_json() const {
    nlohmann::json j;
    j["N"] = n_parties_;
    j["M"] = settings_;
    auto alpha = nlohmann::json::array();
    for (const auto& a : alpha_) alpha.push_back({a.party, a.setting, a.value});
    j["alpha"] = alpha;
    auto beta = nlohmann::json::array();
    for (const auto& b : beta_)
        beta.push_back({b.party_i, b.party_j, b.setting_k, b.setting_l, b.value});
    j["beta"] = beta;
    auto gamma = nlohmann::json::array();
    for (const auto& g : gamma_)
        gamma.push_back({{"parties", g.parties}, {"settings", g.settings}, {"value", g.value}});
    j["gamma"] = gamma;
    if (delta_c_) j["delta_c"] = *delta_c_;
    return j;
}

void MeasurementAssignment::validate(const Lattice& lattice,
                                     const BellInequality& ineq) const {
    if (static_cast<int>(regions.size()) != ineq.n_parties() ||
        ops.size() != regions.size())
        throw ShapeMismatch("assignment party count does not match inequality");
    if (!validate_disjoint(regions))
        throw OverlappingSupports("party regions must be pairwise disjoint");
    for (std::size_t i = 0; i < ops.size(); ++i) {
        lattice.check_region(regions[i]);
        if (static_cast<int>(ops[i].size()) != ineq.settings()[i])
            throw ShapeMismatch("measurement count mismatch for party " +
                                std::to_string(i));
        for (const auto& op : ops[i]) {
            if (!is_hermitian(op, 1e-10))
                throw InvalidState("measurement operator must be Hermitian");
            if (operator_norm(op) > 1.0 + 1e-10)
                throw NormViolation("measurement operator norm exceeds 1");
        }
    }
}

// ---------------------------------------------------------------------------
// CHSH

double chsh_value(const ManyBodyState& s, const Lattice& lattice,
                  const LocalOperator& a0, const LocalOperator& a1,
                  const LocalOperator& b0, const LocalOperator& b1) {
    for (const auto* op : {&a0, &a1, &b0, &b1}) op->check_norm_bound();
    if (a0.support.sites != a1.support.sites || b0.support.sites != b1.support.sites)
        throw InvalidRegion("each party's measurements must share a support region");
    return expect(s, lattice, {a0, b0}) + expect(s, lattice, {a0, b1}) +
           expect(s, lattice, {a1, b0}) - expect(s, lattice, {a1, b1});
}

SeesawResult chsh_sup_seesaw(const ManyBodyState& s, const Lattice& lattice,
                             const Region& x, const Region& y,
                             const SeesawOptions& opts) {
    return bell_sup_seesaw(s, lattice, BellInequality::chsh(), {x, y}, opts);
}

double chsh_sup_fixed_alice(const ManyBodyState& s, const Lattice& lattice,
                            const Region& x, const Region& y, const Mat& a0,
                            const Mat& a1) {
    Scenario scn = make_scenario(s, lattice, {x, y});
    const Mat ap = embed_party(scn, 0, a0 + a1);
    const Mat am = embed_party(scn, 0, a0 - a1);
    const Mat k0 = partial_trace_positions(scn.rho * ap, scn.party_pos[1], scn.d, scn.m);
    const Mat k1 = partial_trace_positions(scn.rho * am, scn.party_pos[1], scn.d, scn.m);
    return trace_norm_hermitian(k0) + trace_norm_hermitian(k1);
}

double horodecki_spin_sup(const Mat& rho) {
    if (rho.rows() != 4 || rho.cols() != 4)
        throw InvalidState("horodecki criterion needs a 4x4 density matrix");
    if (!is_hermitian(rho, 1e-8) || std::abs(rho.trace().real() - 1.0) > 1e-8)
        throw InvalidState("not a density matrix");
    Eigen::SelfAdjointEigenSolver<Mat> check(rho, Eigen::EigenvaluesOnly);
    if (check.eigenvalues().minCoeff() < -1e-8)
        throw InvalidState("density matrix has negative eigenvalue");

    const Mat paulis[3] = {pauli_x(), pauli_y(), pauli_z()};
    Eigen::Matrix3d t;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            Mat ab(4, 4);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    ab.block(i * 2, j * 2, 2, 2) = paulis[a](i, j) * paulis[b];
            t(a, b) = (rho * ab).trace().real();
        }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(t.transpose() * t,
                                                      Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();  // ascending
    return 2.0 * std::sqrt(std::max(0.0, ev[2] + ev[1]));
}

// ---------------------------------------------------------------------------
// Bound formulas

double lemma1_epsilon(int size_x, double C, double lambda, double r) {
    return 4.0 * size_x * C * std::exp(-lambda * r);
}

double quench_epsilon(int size_x, int size_y, double C, double lambda, double v,
                      double t, double r) {
    return 4.0 * size_x * size_y * C * (std::exp(lambda * v * t) - 1.0) *
           std::exp(-lambda * r);
}

double delta_margin(const ManyBodyState& s, const Lattice& lattice,
                    const LocalOperator& a0, const LocalOperator& a1) {
    a0.check_norm_bound();
    a1.check_norm_bound();
    const double m0 = std::abs(expect(s, lattice, {a0}));
    const double m1 = std::abs(expect(s, lattice, {a1}));
    return 2.0 - 2.0 * std::max(m0, m1);
}

double r_star(int size_x, double C, double lambda, double delta) {
    if (delta <= 0) throw ZeroMargin("delta must be positive");
    if (lambda <= 0) throw ZeroDecay("lambda must be positive");
    if (C <= 0) throw InvalidState("C must be positive");
    return std::max(0.0, std::log(4.0 * size_x * C / delta) / lambda);
}

double lemma2_bound(const Lattice& lattice, const BellInequality& ineq,
                    const std::vector<Region>& regions, double C, double lambda,
                    std::optional<std::pair<double, double>> quench_vt) {
    if (static_cast<int>(regions.size()) != ineq.n_parties())
        throw ShapeMismatch("one region per party required");
    if (!validate_disjoint(regions))
        throw OverlappingSupports("party regions must be pairwise disjoint");
    double sum = 0;
    for (int i = 0; i < ineq.n_parties(); ++i) {
        for (int j = 0; j < ineq.n_parties(); ++j) {
            if (i == j) continue;
            const double rij = region_distance(lattice, regions[i], regions[j]);
            for (int k = 0; k < ineq.settings()[i]; ++k) {
                for (int l = 0; l < ineq.settings()[j]; ++l) {
                    const double b = std::abs(ineq.beta_symmetrized(i, j, k, l));
                    if (b == 0) continue;
                    if (quench_vt) {
                        const auto [v, t] = *quench_vt;
                        sum += double(regions[i].size()) * regions[j].size() * b *
                               (std::exp(lambda * v * t) - 1.0) * std::exp(-lambda * rij);
                    } else {
                        sum += std::min(regions[i].size(), regions[j].size()) * b *
                               std::exp(-lambda * rij);
                    }
                }
            }
        }
    }
    return ineq.delta_c() + C * sum;
}

double gamma_constant(const BellInequality& ineq) {
    double total = 0;
    for (const auto& t : ineq.all_terms())
        total += (double(t.parties.size()) - 1.0) * std::abs(t.value);
    return total;
}

double general_bound(double delta_c, double C, int max_region_size, double gamma,
                     double lambda, double r_min) {
    return delta_c + C * max_region_size * gamma * std::exp(-lambda * r_min);
}

// ---------------------------------------------------------------------------
// Functionals and seesaw

namespace {

double value_with_assignment(const ManyBodyState& s, const Lattice& lattice,
                             const BellInequality& ineq,
                             const MeasurementAssignment& meas) {
    meas.validate(lattice, ineq);
    Scenario scn = make_scenario(s, lattice, meas.regions);
    std::vector<std::vector<Mat>> embedded(meas.ops.size());
    for (std::size_t i = 0; i < meas.ops.size(); ++i)
        for (const auto& op : meas.ops[i])
            embedded[i].push_back(embed_party(scn, static_cast<int>(i), op));
    return evaluate_terms(scn, ineq.all_terms(), embedded);
}

}  // namespace

double bell2_value(const ManyBodyState& s, const Lattice& lattice,
                   const BellInequality& ineq, const MeasurementAssignment& meas) {
    if (!ineq.two_body_form())
        throw FormulaMismatch("bell2_value requires a one-and-two-body inequality");
    return value_with_assignment(s, lattice, ineq, meas);
}

double general_value(const ManyBodyState& s, const Lattice& lattice,
                     const BellInequality& ineq, const MeasurementAssignment& meas) {
    return value_with_assignment(s, lattice, ineq, meas);
}

SeesawResult bell_sup_seesaw(const ManyBodyState& s, const Lattice& lattice,
                             const BellInequality& ineq,
                             const std::vector<Region>& regions,
                             const SeesawOptions& opts) {
    if (static_cast<int>(regions.size()) != ineq.n_parties())
        throw ShapeMismatch("one region per party required");
    Scenario scn = make_scenario(s, lattice, regions);
    const auto terms = ineq.all_terms();
    const int n = ineq.n_parties();

    SeesawResult best;
    best.value = -std::numeric_limits<double>::infinity();
    best.min_step_delta = 0;

    // restart 0 is the all-identity assignment (floor Delta_C); the rest are
    // random Hermitian sign operators with per-restart seeds
    for (int restart = 0; restart <= opts.restarts; ++restart) {
        std::mt19937_64 rng(opts.seed + static_cast<std::uint64_t>(restart));
        std::vector<std::vector<Mat>> local(n), embedded(n);
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < ineq.settings()[i]; ++k) {
                Mat op = restart == 0
                             ? Mat::Identity(scn.party_dim[i], scn.party_dim[i])
                             : random_sign_operator(scn.party_dim[i], rng);
                embedded[i].push_back(embed_party(scn, i, op));
                local[i].push_back(std::move(op));
            }
        }
        double value = evaluate_terms(scn, terms, embedded);
        double min_delta = 0;
        bool converged = false;
        int sweep = 0;
        for (; sweep < opts.max_sweeps; ++sweep) {
            const double sweep_start = value;
            for (int i = 0; i < n; ++i) {
                std::vector<Mat> operands;
                for (int k = 0; k < ineq.settings()[i]; ++k)
                    operands.push_back(effective_operand(scn, terms, embedded, i, k));
                for (int k = 0; k < ineq.settings()[i]; ++k) {
                    local[i][k] = sign_operator(operands[k]);
                    embedded[i][k] = embed_party(scn, i, local[i][k]);
                }
                const double next = evaluate_terms(scn, terms, embedded);
                min_delta = std::min(min_delta, next - value);
                value = next;
            }
            if (value - sweep_start < opts.tol) {
                converged = true;
                break;
            }
        }
        if (value > best.value) {
            best.value = value;
            best.converged = converged;
            best.sweeps = sweep + 1;
            best.assignment.regions = regions;
            best.assignment.ops = local;
        }
        best.min_step_delta = std::min(best.min_step_delta, min_delta);
    }
    return best;
}

LocalBoundResult local_bound_bruteforce(const BellInequality& ineq) {
    const int total = ineq.total_settings();
    if (total > 20)
        throw TooManyStrategies(std::to_string(total) +
                                " settings exceed the 2^20 enumeration budget");
    std::vector<int> offset(ineq.n_parties());
    int acc = 0;
    for (int i = 0; i < ineq.n_parties(); ++i) {
        offset[i] = acc;
        acc += ineq.settings()[i];
    }
    const auto terms = ineq.all_terms();
    LocalBoundResult best;
    best.delta_c = -std::numeric_limits<double>::infinity();
    for (std::uint32_t mask = 0; mask < (1u << total); ++mask) {
        double value = 0;
        for (const auto& t : terms) {
            double prod = t.value;
            for (std::size_t p = 0; p < t.parties.size(); ++p) {
                const int bit = offset[t.parties[p]] + t.settings[p];
                prod *= (mask >> bit) & 1u ? 1.0 : -1.0;
            }
            value += prod;
        }
        if (value > best.delta_c) {
            best.delta_c = value;
            best.assignment.clear();
            for (int i = 0; i < ineq.n_parties(); ++i) {
                std::vector<int> row;
                for (int k = 0; k < ineq.settings()[i]; ++k)
                    row.push_back((mask >> (offset[i] + k)) & 1u ? 1 : -1);
                best.assignment.push_back(row);
            }
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Certification

std::string to_string(BoundFormula f) {
    switch (f) {
        case BoundFormula::lemma1: return "lemma1";
        case BoundFormula::thm3_quench: return "thm3_quench";
        case BoundFormula::lemma2_twobody: return "lemma2_twobody";
        case BoundFormula::thm6_quench_twobody: return "thm6_quench_twobody";
        case BoundFormula::thm7_general: return "thm7_general";
    }
    return "?";
}

nlohmann::json LocalityCertificate::to_json() const {
    nlohmann::json j{{"value", value},
                     {"bound", bound},
                     {"formula", to_string(formula)},
                     {"satisfied", satisfied},
                     {"C", C},
                     {"lambda", lambda},
                     {"delta_c", delta_c},
                     {"r_min", r_min},
                     {"max_region_size", max_region_size}};
    if (v) j["v"] = *v;
    if (t) j["t"] = *t;
    if (gamma_constant) j["gamma"] = *gamma_constant;
    return j;
}

namespace {

struct RegionStats {
    double r_min;
    int max_size;
    int min_size;
};

RegionStats region_stats(const Lattice& lattice, const std::vector<Region>& regions) {
    RegionStats st{std::numeric_limits<double>::infinity(), 0,
                   std::numeric_limits<int>::max()};
    for (std::size_t i = 0; i < regions.size(); ++i) {
        st.max_size = std::max(st.max_size, regions[i].size());
        st.min_size = std::min(st.min_size, regions[i].size());
        for (std::size_t j = i + 1; j < regions.size(); ++j)
            st.r_min = std::min(st.r_min, region_distance(lattice, regions[i], regions[j]));
    }
    return st;
}

}  // namespace

LocalityCertificate certify(const ManyBodyState& s, const Lattice& lattice,
                            const BellInequality& ineq,
                            const std::vector<Region>& regions,
                            const ClusteringFit& fit, const SeesawOptions& opts) {
    const auto st = region_stats(lattice, regions);
    LocalityCertificate cert;
    cert.C = fit.C;
    cert.lambda = fit.lambda;
    cert.delta_c = ineq.delta_c();
    cert.r_min = st.r_min;
    cert.max_region_size = st.max_size;
    cert.value = bell_sup_seesaw(s, lattice, ineq, regions, opts).value;
    if (ineq.is_chsh_shaped()) {
        cert.formula = BoundFormula::lemma1;
        cert.bound =
            cert.delta_c + lemma1_epsilon(st.min_size, fit.C, fit.lambda, st.r_min);
    } else if (ineq.two_body_form()) {
        cert.formula = BoundFormula::lemma2_twobody;
        cert.bound = lemma2_bound(lattice, ineq, regions, fit.C, fit.lambda);
    } else {
        cert.formula = BoundFormula::thm7_general;
        cert.gamma_constant = gamma_constant(ineq);
        cert.bound = general_bound(cert.delta_c, fit.C, st.max_size,
                                   *cert.gamma_constant, fit.lambda, st.r_min);
    }
    cert.satisfied = cert.value <= cert.bound + 1e-9;
    return cert;
}

LocalityCertificate certify_quench(const ManyBodyState& s, const Lattice& lattice,
                                   const BellInequality& ineq,
                                   const std::vector<Region>& regions,
                                   const PropagationFit& fit, double t,
                                   const SeesawOptions& opts) {
    if (!ineq.two_body_form())
        throw FormulaMismatch("no quench bound is available for gamma-form inequalities");
    if (s.provenance.find("quench") == std::string::npos && t != 0)
        throw FormulaMismatch("quench formula requested for a non-quench state");
    const auto st = region_stats(lattice, regions);
    LocalityCertificate cert;
    cert.C = fit.C;
    cert.lambda = fit.lambda;
    cert.v = fit.v;
    cert.t = t;
    cert.delta_c = ineq.delta_c();
    cert.r_min = st.r_min;
    cert.max_region_size = st.max_size;
    cert.value = bell_sup_seesaw(s, lattice, ineq, regions, opts).value;
    if (ineq.is_chsh_shaped()) {
        cert.formula = BoundFormula::thm3_quench;
        cert.bound = cert.delta_c +
                     quench_epsilon(regions[0].size(), regions[1].size(), fit.C,
                                    fit.lambda, fit.v, t, st.r_min);
    } else {
        cert.formula = BoundFormula::thm6_quench_twobody;
        cert.bound = lemma2_bound(lattice, ineq, regions, fit.C, fit.lambda,
                                  std::make_pair(fit.v, t));
    }
    cert.satisfied = cert.value <= cert.bound + 1e-9;
    return cert;
}

}  // namespace qbell
