#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "qbell/clustering.hpp"

using namespace qbell;

namespace {

ManyBodyState singlet() {
    ManyBodyState s;
    s.kind = StateKind::pure;
    s.psi = Vec::Zero(4);
    s.psi[1] = 1.0 / std::sqrt(2.0);
    s.psi[2] = -1.0 / std::sqrt(2.0);
    return s;
}

ManyBodyState ghz(int n) {
    ManyBodyState s;
    s.kind = StateKind::pure;
    s.psi = Vec::Zero(std::int64_t(1) << n);
    s.psi[0] = 1.0 / std::sqrt(2.0);
    s.psi[s.psi.size() - 1] = 1.0 / std::sqrt(2.0);
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

ManyBodyState random_pure(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    ManyBodyState s;
    s.kind = StateKind::pure;
    s.psi = Vec(std::int64_t(1) << n);
    for (Eigen::Index i = 0; i < s.psi.size(); ++i) s.psi[i] = cxd(gauss(rng), gauss(rng));
    s.psi.normalize();
    return s;
}

}  // namespace

TEST_CASE("connected correlator on maximally correlated states") {
    auto lat = Lattice::chain(2);
    LocalOperator z0(Region::single(0), pauli_z());
    LocalOperator z1(Region::single(1), pauli_z());
    LocalOperator x0(Region::single(0), pauli_x());
    LocalOperator x1(Region::single(1), pauli_x());

    const auto s = singlet();
    CHECK(connected_correlator(s, lat, z0, z1) == doctest::Approx(-1).epsilon(1e-12));
    CHECK(connected_correlator(s, lat, x0, x1) == doctest::Approx(-1).epsilon(1e-12));

    auto lat3 = Lattice::chain(3);
    const auto g = ghz(3);
    LocalOperator z2(Region::single(2), pauli_z());
    CHECK(connected_correlator(g, lat3, z0, z2) == doctest::Approx(1).epsilon(1e-12));
    CHECK(connected_correlator(g, lat3, x0, x1) == doctest::Approx(0));
}

TEST_CASE("connected correlator vanishes on product states") {
    auto lat = Lattice::chain(2);
    Mat plus = 0.5 * (pauli_id() + pauli_x());
    auto s = product_state(lat, {plus, plus});
    CHECK(std::abs(connected_correlator(s, lat, LocalOperator(Region::single(0), pauli_x()),
                                        LocalOperator(Region::single(1), pauli_x()))) <
          1e-14);
}

TEST_CASE("correlator supports must be disjoint") {
    auto lat = Lattice::chain(2);
    LocalOperator a(Region::single(0), pauli_z());
    CHECK_THROWS_AS(connected_correlator(singlet(), lat, a, a), OverlappingSupports);
}

TEST_CASE("multibody gap on GHZ") {
    auto lat = Lattice::chain(3);
    const auto g = ghz(3);
    std::vector<LocalOperator> zs;
    for (int i = 0; i < 3; ++i) zs.emplace_back(Region::single(i), pauli_z());
    // <zzz> = 0 and each <z> = 0
    CHECK(multibody_gap(g, lat, zs) == doctest::Approx(0));
    std::vector<LocalOperator> xs;
    for (int i = 0; i < 3; ++i) xs.emplace_back(Region::single(i), pauli_x());
    // <xxx> = 1, <x> = 0
    CHECK(multibody_gap(g, lat, xs) == doctest::Approx(1).epsilon(1e-12));
    CHECK_THROWS_AS(multibody_gap(g, lat, {zs[0]}), ShapeMismatch);
}

TEST_CASE("telescoping dominates the multibody gap") {
    std::mt19937_64 rng(23);
    auto lat = Lattice::chain(4);
    for (int rep = 0; rep < 20; ++rep) {
        const auto s = random_pure(4, rng);
        std::vector<LocalOperator> ops;
        for (int i = 0; i < 4; ++i) ops.emplace_back(Region::single(i), random_obs(rng));
        const double gap = multibody_gap(s, lat, ops);
        const double tele = telescoping_bound(s, lat, ops);
        CHECK(gap <= tele + 1e-12);
    }
}

TEST_CASE("norm-bounded operators are enforced") {
    auto lat = Lattice::chain(2);
    std::vector<LocalOperator> ops{LocalOperator(Region::single(0), 2.0 * pauli_z()),
                                   LocalOperator(Region::single(1), pauli_z())};
    CHECK_THROWS_AS(multibody_gap(singlet(), lat, ops), NormViolation);
    CHECK_THROWS_AS(telescoping_bound(singlet(), lat, ops), NormViolation);
}

TEST_CASE("clustering fit recovers exact exponential data") {
    const double C = 0.8, lambda = 0.65;
    std::vector<CorrelationSample> samples;
    for (int r = 1; r <= 8; ++r) {
        CorrelationSample s;
        s.r = r;
        s.value = C * std::exp(-lambda * r);
        samples.push_back(s);
    }
    const auto fit = fit_clustering(samples);
    CHECK(fit.lambda == doctest::Approx(lambda).epsilon(1e-10));
    CHECK(fit.C == doctest::Approx(C).epsilon(1e-10));
    CHECK(fit.residual < 1e-10);
    for (const auto& s : samples)
        CHECK(std::abs(s.value) <= fit.envelope(std::min(s.size_x, s.size_y), s.r));
}

TEST_CASE("clustering fit envelope dominates noisy data") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    std::vector<CorrelationSample> samples;
    for (int r = 1; r <= 10; ++r)
        for (int k = 0; k < 3; ++k) {
            CorrelationSample s;
            s.r = r;
            s.value = u(rng) * std::exp(-0.4 * r) * (k % 2 ? -1 : 1);
            samples.push_back(s);
        }
    const auto fit = fit_clustering(samples);
    CHECK(fit.lambda > 0);
    for (const auto& s : samples)
        CHECK(std::abs(s.value) <= fit.envelope(std::min(s.size_x, s.size_y), s.r));
}

TEST_CASE("clustering fit respects region sizes") {
    // |value| <= min(|X|,|Y|) C e^{-lambda r}: size-2 samples are divided out
    std::vector<CorrelationSample> samples;
    for (int r = 1; r <= 6; ++r) {
        CorrelationSample s;
        s.r = r;
        s.size_x = 2;
        s.size_y = 3;
        s.value = 2.0 * 0.5 * std::exp(-0.3 * r);
        samples.push_back(s);
    }
    const auto fit = fit_clustering(samples);
    CHECK(fit.C == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(fit.lambda == doctest::Approx(0.3).epsilon(1e-10));
}

TEST_CASE("clustering fit degenerate inputs") {
    std::vector<CorrelationSample> tiny(3);
    for (int i = 0; i < 3; ++i) {
        tiny[i].r = i + 1;
        tiny[i].value = 1e-15;
    }
    CHECK_THROWS_AS(fit_clustering(tiny), AllSamplesFloored);

    std::vector<CorrelationSample> same_r(3);
    for (int i = 0; i < 3; ++i) {
        same_r[i].r = 2;
        same_r[i].value = 0.1 * (i + 1);
    }
    CHECK_THROWS_AS(fit_clustering(same_r), InsufficientSamples);

    std::vector<CorrelationSample> bad(2);
    bad[0].r = 1;
    bad[0].value = std::nan("");
    bad[1].r = 2;
    bad[1].value = 0.5;
    CHECK_THROWS_AS(fit_clustering(bad), InvalidState);
}

TEST_CASE("propagation fit recovers exact light-cone data") {
    const double C = 1.0, lambda = 1.0, v = 2.0;
    std::vector<CorrelationSample> samples;
    for (double t : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0})
        for (int r = 1; r <= 6; ++r) {
            CorrelationSample s;
            s.t = t;
            s.r = r;
            s.value = t == 0 ? 0.0 : C * (std::exp(lambda * v * t) - 1) * std::exp(-lambda * r);
            samples.push_back(s);
        }
    const auto fit = fit_propagation(samples);
    CHECK(fit.C == doctest::Approx(C).epsilon(1e-6));
    CHECK(fit.lambda == doctest::Approx(lambda).epsilon(1e-6));
    CHECK(fit.v == doctest::Approx(v).epsilon(1e-6));
    for (const auto& s : samples)
        CHECK(std::abs(s.value) <= fit.envelope(s.size_x, s.size_y, s.t, s.r));
    CHECK(fit.envelope(1, 1, 0.0, 3.0) == 0);
}

TEST_CASE("propagation fit rejects correlated starts") {
    std::vector<CorrelationSample> samples;
    CorrelationSample bad;
    bad.t = 0;
    bad.r = 1;
    bad.value = 0.2;
    samples.push_back(bad);
    CHECK_THROWS_AS(fit_propagation(samples), NonProductStart);
}
