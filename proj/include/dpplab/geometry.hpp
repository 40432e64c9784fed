#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace dpplab {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline std::complex<double> to_complex(const Point& p) { return {p.x, p.y}; }
inline Point to_point(const std::complex<double>& z) { return {z.real(), z.imag()}; }

inline double dist2(const Point& a, const Point& b) {
    const double dx = a.x - b.x, dy = a.y - b.y;
    return dx * dx + dy * dy;
}
inline double dist(const Point& a, const Point& b) { return std::sqrt(dist2(a, b)); }

struct Disk {
    Point center;
    double radius = 1.0;
};
struct Annulus {
    Point center;
    double r_inner = 0.0;
    double r_outer = 1.0;
};
struct Box {
    double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
};

using Region = std::variant<Disk, Annulus, Box>;

bool contains(const Region& r, const Point& p);
double area(const Region& r);
Box bounding_box(const Region& r);
std::string describe(const Region& r);
bool same_region(const Region& a, const Region& b, double tol = 1e-12);
Region scale_region(const Region& r, double factor);

// Area of B_{r1}(0) ∩ B_{r2}(c) with |c| = d.
double disk_intersection_area(double r1, double r2, double d);

// Fraction of the circle of radius d centered at distance s from the origin
// that lies inside B_R(0).
double circle_fraction_inside_disk(double s, double d, double R);

struct PointPattern {
    std::vector<Point> points;
    Region window = Disk{{0.0, 0.0}, 1.0};

    std::size_t size() const { return points.size(); }
};

// Simplicity check: pairwise distances strictly positive.
bool is_simple(const PointPattern& pat, double tol = 0.0);
bool all_in_window(const PointPattern& pat);

// Uniform grid over point indices for O(1)-neighborhood queries.
// Cell iteration order is fixed, so query results are deterministic.
class NeighborGrid {
  public:
    NeighborGrid(const std::vector<Point>& pts, double cell_size);

    // Indices of points within `radius` of p, excluding `exclude` (pass
    // SIZE_MAX to keep all). Ascending index order.
    std::vector<std::size_t> within(const Point& p, double radius,
                                    std::size_t exclude = SIZE_MAX) const;
    bool any_within(const Point& p, double radius,
                    std::size_t exclude = SIZE_MAX) const;
    // Distance from pts[i] to its nearest other point; expanding ring search.
    double nearest_neighbor_dist(std::size_t i) const;

  private:
    const std::vector<Point>& pts_;
    double cell_;
    double min_x_, min_y_;
    int nx_ = 0, ny_ = 0;
    std::vector<std::vector<std::size_t>> cells_;

    int cell_index(int cx, int cy) const { return cy * nx_ + cx; }
};

}  // namespace dpplab
