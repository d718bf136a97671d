#pragma once

#include <string>
#include <vector>

#include "qbell/quantum.hpp"

namespace qbell {

/// One measured connected correlator at region distance r (and time t for
/// quench data; t = 0 for static states).
struct CorrelationSample {
    double r = 0;
    double t = 0;
    double value = 0;
    int size_x = 1;
    int size_y = 1;
    std::string op_a;
    std::string op_b;
    int site_a = -1;
    int site_b = -1;
};

/// Certified envelope |value| <= min(|X|,|Y|) * C * exp(-lambda r); C is
/// inflated after the least-squares fit so dominance holds for every input
/// sample.
struct ClusteringFit {
    double C = 0;
    double lambda = 0;
    double residual = 0;  // RMS of the log-space fit
    int n_samples = 0;
    int n_floored = 0;
    double floor = 1e-12;

    double envelope(double size, double r) const;
};

struct PropagationGrid {
    double lambda_min = 0.05, lambda_max = 5.0;
    double v_min = 0.05, v_max = 10.0;
    int n_lambda = 40, n_v = 40;
    int refine_rounds = 12;
};

/// Certified light-cone envelope
/// |value(t,r)| <= |X||Y| * C * (exp(lambda v t) - 1) * exp(-lambda r).
struct PropagationFit {
    double C = 0;
    double lambda = 0;
    double v = 0;
    double residual = 0;
    int n_samples = 0;
    int n_floored = 0;
    double floor = 1e-12;
    PropagationGrid grid;

    double envelope(double size_x, double size_y, double t, double r) const;
};

/// <AB> - <A><B>; supports must be disjoint.
double connected_correlator(const ManyBodyState& s, const Lattice& lattice,
                            const LocalOperator& a, const LocalOperator& b);

/// |<E1...En> - <E1>...<En>| for n >= 2 norm-bounded operators on disjoint
/// regions.
double multibody_gap(const ManyBodyState& s, const Lattice& lattice,
                     const std::vector<LocalOperator>& ops);

/// Telescoping sum over k = 2..n of |<E1...Ek> - <E1...E_{k-1}><Ek>|, the
/// grouped-support induction skeleton; dominates multibody_gap by the
/// triangle inequality.
double telescoping_bound(const ManyBodyState& s, const Lattice& lattice,
                         const std::vector<LocalOperator>& ops);

ClusteringFit fit_clustering(const std::vector<CorrelationSample>& samples,
                             double floor = 1e-12);

PropagationFit fit_propagation(const std::vector<CorrelationSample>& samples,
                               const PropagationGrid& grid = {},
                               double floor = 1e-12);

}  // namespace qbell
