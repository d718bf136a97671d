#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qbell/errors.hpp"

namespace qbell {

enum class Metric { graph, euclidean, chebyshev };
enum class Boundary { open, periodic };

Metric metric_from_string(const std::string& s);
Boundary boundary_from_string(const std::string& s);
std::string to_string(Metric m);
std::string to_string(Boundary b);

/// Contiguous or scattered set of site ids, kept strictly increasing.
struct Region {
    std::vector<int> sites;

    Region() = default;
    explicit Region(std::vector<int> s);
    static Region single(int site) { return Region({site}); }

    int size() const { return static_cast<int>(sites.size()); }
    bool contains(int site) const;
};

/// Hilbert-space dimension limits. Configuration values so tests can force
/// tiny systems; defaults allow 2^14 for density-matrix workflows and
/// 2^20 for pure-state-only paths.
struct DimensionCaps {
    double dense_cap = double(1 << 14);
    double pure_cap = double(1 << 20);
};

/// 1D chain or 2D grid with a precomputed pairwise distance table.
/// Immutable after construction.
class Lattice {
public:
    static Lattice chain(int length, Boundary boundary = Boundary::open,
                         Metric metric = Metric::graph, int local_dim = 2,
                         const DimensionCaps& caps = {});
    static Lattice grid(int width, int height, Boundary boundary = Boundary::open,
                        Metric metric = Metric::graph, int local_dim = 2,
                        const DimensionCaps& caps = {});

    int n_sites() const { return static_cast<int>(coords_.size()); }
    int local_dim() const { return local_dim_; }
    Metric metric() const { return metric_; }
    Boundary boundary() const { return boundary_; }
    int width() const { return width_; }
    int height() const { return height_; }

    /// Full Hilbert-space dimension local_dim^n, or throws DimensionCapExceeded
    /// against the pure-state cap used at construction.
    std::int64_t dim() const { return dim_; }

    const std::array<int, 2>& coord(int site) const { return coords_[site]; }
    double distance(int a, int b) const { return dist_(a, b); }

    void check_region(const Region& r) const;

private:
    Lattice(int width, int height, Boundary boundary, Metric metric, int local_dim,
            const DimensionCaps& caps);

    int width_ = 0, height_ = 0;
    int local_dim_ = 2;
    Metric metric_ = Metric::graph;
    Boundary boundary_ = Boundary::open;
    std::int64_t dim_ = 0;
    std::vector<std::array<int, 2>> coords_;
    Eigen::MatrixXd dist_;
};

/// min over x in X, y in Y of d(x, y); 0 iff the regions share a site.
double region_distance(const Lattice& lat, const Region& x, const Region& y);

/// true iff pairwise intersections are empty (vacuously true for <= 1 region).
bool validate_disjoint(const std::vector<Region>& regions);

}  // namespace qbell
