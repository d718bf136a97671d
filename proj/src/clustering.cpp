#include "qbell/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

namespace qbell {

namespace {

/// Reduced state on the sorted union of the supports plus per-operator
/// embeddings, shared by the correlator routines.
struct ReducedOps {
    Mat rho;
    std::vector<Mat> ops;
};

ReducedOps reduce_with_ops(const ManyBodyState& s, const Lattice& lattice,
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
        throw OverlappingSupports("correlator operators must have disjoint supports");
    std::sort(union_sites.begin(), union_sites.end());
    ReducedOps out;
    out.rho = reduce(s, lattice, Region(union_sites));
    for (const auto& op : ops)
        out.ops.push_back(
            embed_in_subspace(op.matrix, op.support, union_sites, lattice.local_dim()));
    return out;
}

double tr_real(const Mat& rho, const Mat& op) { return (rho * op).trace().real(); }

}  // namespace

double connected_correlator(const ManyBodyState& s, const Lattice& lattice,
                            const LocalOperator& a, const LocalOperator& b) {
    auto red = reduce_with_ops(s, lattice, {a, b});
    const double ab = (red.rho * red.ops[0] * red.ops[1]).trace().real();
    return ab - tr_real(red.rho, red.ops[0]) * tr_real(red.rho, red.ops[1]);
}

double multibody_gap(const ManyBodyState& s, const Lattice& lattice,
                     const std::vector<LocalOperator>& ops) {
    if (ops.size() < 2) throw ShapeMismatch("multibody_gap needs n >= 2 operators");
    for (const auto& op : ops) op.check_norm_bound();
    auto red = reduce_with_ops(s, lattice, ops);
    Mat prod = red.ops[0];
    double indep = tr_real(red.rho, red.ops[0]);
    for (std::size_t i = 1; i < red.ops.size(); ++i) {
        prod *= red.ops[i];
        indep *= tr_real(red.rho, red.ops[i]);
    }
    return std::abs((red.rho * prod).trace().real() - indep);
}

double telescoping_bound(const ManyBodyState& s, const Lattice& lattice,
                         const std::vector<LocalOperator>& ops) {
    if (ops.size() < 2) throw ShapeMismatch("telescoping_bound needs n >= 2 operators");
    for (const auto& op : ops) op.check_norm_bound();
    auto red = reduce_with_ops(s, lattice, ops);
    double total = 0;
    Mat prefix = red.ops[0];
    for (std::size_t k = 1; k < red.ops.size(); ++k) {
        const double head = (red.rho * prefix).trace().real();
        const double tail = tr_real(red.rho, red.ops[k]);
        prefix *= red.ops[k];
        const double joint = (red.rho * prefix).trace().real();
        total += std::abs(joint - head * tail);
    }
    return total;
}

// ---------------------------------------------------------------------------
// Fits

double ClusteringFit::envelope(double size, double r) const {
    return size * C * std::exp(-lambda * r);
}

double PropagationFit::envelope(double size_x, double size_y, double t, double r) const {
    if (t == 0) return 0;
    return size_x * size_y * C * (std::exp(lambda * v * t) - 1.0) * std::exp(-lambda * r);
}

ClusteringFit fit_clustering(const std::vector<CorrelationSample>& samples, double floor) {
    ClusteringFit fit;
    fit.floor = floor;
    fit.n_samples = static_cast<int>(samples.size());

    std::vector<const CorrelationSample*> live;
    for (const auto& s : samples) {
        if (!std::isfinite(s.value)) throw InvalidState("non-finite correlator sample");
        if (std::abs(s.value) > floor)
            live.push_back(&s);
        else
            ++fit.n_floored;
    }
    if (live.empty()) throw AllSamplesFloored("every sample is below the numeric floor");
    std::set<double> distinct_r;
    for (auto* s : live) distinct_r.insert(s->r);
    if (live.size() < 2 || distinct_r.size() < 2)
        throw InsufficientSamples("need >= 2 above-floor samples at >= 2 distinct r");

    // least squares on (r, log(|value| / min_size))
    double sr = 0, sy = 0, srr = 0, sry = 0;
    for (auto* s : live) {
        const double y = std::log(std::abs(s->value) / std::min(s->size_x, s->size_y));
        sr += s->r;
        sy += y;
        srr += s->r * s->r;
        sry += s->r * y;
    }
    const double n = double(live.size());
    const double slope = (n * sry - sr * sy) / (n * srr - sr * sr);
    const double intercept = (sy - slope * sr) / n;
    fit.lambda = std::max(0.0, -slope);
    fit.C = std::exp(intercept);

    double ss = 0;
    for (auto* s : live) {
        const double y = std::log(std::abs(s->value) / std::min(s->size_x, s->size_y));
        const double pred = std::log(fit.C) - fit.lambda * s->r;
        ss += (y - pred) * (y - pred);
    }
    fit.residual = std::sqrt(ss / n);

    // inflate C so the fit is a valid upper envelope for every input sample,
    // floored ones included
    for (const auto& s : samples) {
        const double need =
            std::abs(s.value) / (std::min(s.size_x, s.size_y) * std::exp(-fit.lambda * s.r));
        // tiny headroom so the envelope check cannot lose to rounding
        fit.C = std::max(fit.C, need * (1.0 + 1e-14));
    }
    return fit;
}

namespace {

struct LogSample {
    double t, r, y;  // y = log(|value| / (size_x * size_y))
};

/// Best C (in log space) and RMS log-residual for fixed (lambda, v).
std::pair<double, double> propagation_objective(const std::vector<LogSample>& data,
                                                double lambda, double v) {
    double mean = 0;
    std::vector<double> resid(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double model = std::log(std::exp(lambda * v * data[i].t) - 1.0) -
                             lambda * data[i].r;
        resid[i] = data[i].y - model;
        mean += resid[i];
    }
    mean /= double(data.size());
    double ss = 0;
    for (double r : resid) ss += (r - mean) * (r - mean);
    return {mean, std::sqrt(ss / double(data.size()))};
}

double golden_minimize(const std::function<double(double)>& f, double lo, double hi,
                       int iters = 80) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters; ++i) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

PropagationFit fit_propagation(const std::vector<CorrelationSample>& samples,
                               const PropagationGrid& grid, double floor) {
    PropagationFit fit;
    fit.floor = floor;
    fit.grid = grid;
    fit.n_samples = static_cast<int>(samples.size());

    std::vector<LogSample> data;
    std::vector<const CorrelationSample*> nonzero_t;
    for (const auto& s : samples) {
        if (!std::isfinite(s.value)) throw InvalidState("non-finite correlator sample");
        if (s.t == 0) {
            if (std::abs(s.value) > floor)
                throw NonProductStart("t = 0 correlation above the numeric floor");
            continue;
        }
        nonzero_t.push_back(&s);
        if (std::abs(s.value) <= floor) {
            ++fit.n_floored;
            continue;
        }
        data.push_back({s.t, s.r,
                        std::log(std::abs(s.value) / (double(s.size_x) * s.size_y))});
    }
    std::set<double> ts, rs;
    for (const auto& d : data) {
        ts.insert(d.t);
        rs.insert(d.r);
    }
    if (data.size() < 3 || ts.size() < 2 || rs.size() < 2)
        throw InsufficientSamples("need above-floor samples at >= 2 times and >= 2 distances");

    // coarse log-spaced grid over (lambda, v)
    auto logspace = [](double lo, double hi, int n) {
        std::vector<double> out(n);
        for (int i = 0; i < n; ++i)
            out[i] = lo * std::pow(hi / lo, n == 1 ? 0.0 : double(i) / (n - 1));
        return out;
    };
    double best_l = grid.lambda_min, best_v = grid.v_min;
    double best_res = std::numeric_limits<double>::infinity();
    for (double l : logspace(grid.lambda_min, grid.lambda_max, grid.n_lambda)) {
        for (double v : logspace(grid.v_min, grid.v_max, grid.n_v)) {
            const double res = propagation_objective(data, l, v).second;
            if (res < best_res) {
                best_res = res;
                best_l = l;
                best_v = v;
            }
        }
    }

    // coordinate descent: one golden-section line search per coordinate per round
    const double span = 1.5;
    for (int round = 0; round < grid.refine_rounds; ++round) {
        best_l = golden_minimize(
            [&](double l) { return propagation_objective(data, l, best_v).second; },
            best_l / span, best_l * span);
        best_v = golden_minimize(
            [&](double v) { return propagation_objective(data, best_l, v).second; },
            best_v / span, best_v * span);
    }

    auto [log_c, res] = propagation_objective(data, best_l, best_v);
    fit.lambda = best_l;
    fit.v = best_v;
    fit.C = std::exp(log_c);
    fit.residual = res;

    // dominance inflation over every t > 0 input sample
    for (const auto* s : nonzero_t) {
        const double env = (std::exp(fit.lambda * fit.v * s->t) - 1.0) *
                           std::exp(-fit.lambda * s->r) * double(s->size_x) * s->size_y;
        if (env > 0) fit.C = std::max(fit.C, (std::abs(s->value) / env) * (1.0 + 1e-14));
    }
    return fit;
}

}  // namespace qbell
