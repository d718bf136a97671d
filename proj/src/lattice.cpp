#include "qbell/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace qbell {

Metric metric_from_string(const std::string& s) {
    if (s == "graph") return Metric::graph;
    if (s == "euclidean") return Metric::euclidean;
    if (s == "chebyshev") return Metric::chebyshev;
    throw ConfigError("unknown metric '" + s + "'");
}

Boundary boundary_from_string(const std::string& s) {
    if (s == "open") return Boundary::open;
    if (s == "periodic") return Boundary::periodic;
    throw ConfigError("unknown boundary '" + s + "'");
}

std::string to_string(Metric m) {
    switch (m) {
        case Metric::graph: return "graph";
        case Metric::euclidean: return "euclidean";
        case Metric::chebyshev: return "chebyshev";
    }
    return "?";
}

std::string to_string(Boundary b) {
    return b == Boundary::open ? "open" : "periodic";
}

Region::Region(std::vector<int> s) : sites(std::move(s)) {
    if (sites.empty()) throw InvalidRegion("region must be nonempty");
    for (std::size_t i = 1; i < sites.size(); ++i)
        if (sites[i] <= sites[i - 1])
            throw InvalidRegion("site ids must be strictly increasing");
    if (sites.front() < 0) throw InvalidRegion("negative site id");
}

bool Region::contains(int site) const {
    return std::binary_search(sites.begin(), sites.end(), site);
}

Lattice::Lattice(int width, int height, Boundary boundary, Metric metric,
                 int local_dim, const DimensionCaps& caps)
    : width_(width), height_(height), local_dim_(local_dim), metric_(metric),
      boundary_(boundary) {
    if (width < 1 || height < 1) throw InvalidGeometry("lattice extents must be >= 1");
    if (local_dim < 2) throw InvalidGeometry("local_dim must be >= 2");

    const int n = width * height;
    const double dim_est = std::pow(double(local_dim), double(n));
    if (dim_est > caps.pure_cap)
        throw DimensionCapExceeded("local_dim^n = " + std::to_string(dim_est) +
                                   " exceeds cap " + std::to_string(caps.pure_cap));
    dim_ = 1;
    for (int i = 0; i < n; ++i) dim_ *= local_dim;

    coords_.reserve(n);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) coords_.push_back({x, y});

    // Per-axis separation, wrapped for periodic boundaries.
    auto axis_delta = [&](int a, int b, int extent) -> double {
        double d = std::abs(a - b);
        if (boundary_ == Boundary::periodic && extent > 1)
            d = std::min(d, double(extent) - d);
        return d;
    };

    dist_.resize(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double dx = axis_delta(coords_[i][0], coords_[j][0], width);
            const double dy = axis_delta(coords_[i][1], coords_[j][1], height);
            double d = 0;
            switch (metric_) {
                case Metric::graph: d = dx + dy; break;
                case Metric::euclidean: d = std::hypot(dx, dy); break;
                case Metric::chebyshev: d = std::max(dx, dy); break;
            }
            dist_(i, j) = d;
        }
    }
}

Lattice Lattice::chain(int length, Boundary boundary, Metric metric, int local_dim,
                       const DimensionCaps& caps) {
    return Lattice(length, 1, boundary, metric, local_dim, caps);
}

Lattice Lattice::grid(int width, int height, Boundary boundary, Metric metric,
                      int local_dim, const DimensionCaps& caps) {
    return Lattice(width, height, boundary, metric, local_dim, caps);
}

void Lattice::check_region(const Region& r) const {
    if (r.sites.empty()) throw InvalidRegion("empty region");
    if (r.sites.back() >= n_sites())
        throw InvalidRegion("site id " + std::to_string(r.sites.back()) +
                            " out of range for lattice of " + std::to_string(n_sites()));
}

double region_distance(const Lattice& lat, const Region& x, const Region& y) {
    lat.check_region(x);
    lat.check_region(y);
    double best = std::numeric_limits<double>::infinity();
    for (int a : x.sites)
        for (int b : y.sites) best = std::min(best, lat.distance(a, b));
    return best;
}

bool validate_disjoint(const std::vector<Region>& regions) {
    std::set<int> seen;
    for (const auto& r : regions)
        for (int s : r.sites)
            if (!seen.insert(s).second) return false;
    return true;
}

}  // namespace qbell
