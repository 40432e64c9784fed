#include "dpplab/geometry.hpp"

#include <algorithm>
#include <sstream>

namespace dpplab {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

bool contains(const Region& r, const Point& p) {
    return std::visit(
        [&p](const auto& g) -> bool {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, Disk>) {
                return dist2(g.center, p) <= g.radius * g.radius;
            } else if constexpr (std::is_same_v<T, Annulus>) {
                const double d2 = dist2(g.center, p);
                return d2 >= g.r_inner * g.r_inner && d2 <= g.r_outer * g.r_outer;
            } else {
                return p.x >= g.x0 && p.x <= g.x1 && p.y >= g.y0 && p.y <= g.y1;
            }
        },
        r);
}

double area(const Region& r) {
    return std::visit(
        [](const auto& g) -> double {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, Disk>) {
                return kPi * g.radius * g.radius;
            } else if constexpr (std::is_same_v<T, Annulus>) {
                return kPi * (g.r_outer * g.r_outer - g.r_inner * g.r_inner);
            } else {
                return (g.x1 - g.x0) * (g.y1 - g.y0);
            }
        },
        r);
}

Box bounding_box(const Region& r) {
    return std::visit(
        [](const auto& g) -> Box {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, Disk>) {
                return {g.center.x - g.radius, g.center.y - g.radius,
                        g.center.x + g.radius, g.center.y + g.radius};
            } else if constexpr (std::is_same_v<T, Annulus>) {
                return {g.center.x - g.r_outer, g.center.y - g.r_outer,
                        g.center.x + g.r_outer, g.center.y + g.r_outer};
            } else {
                return g;
            }
        },
        r);
}

std::string describe(const Region& r) {
    std::ostringstream os;
    os.precision(17);
    std::visit(
        [&os](const auto& g) {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, Disk>) {
                os << "disk(" << g.center.x << "," << g.center.y << ";" << g.radius << ")";
            } else if constexpr (std::is_same_v<T, Annulus>) {
                os << "annulus(" << g.center.x << "," << g.center.y << ";" << g.r_inner
                   << "," << g.r_outer << ")";
            } else {
                os << "box(" << g.x0 << "," << g.y0 << "," << g.x1 << "," << g.y1 << ")";
            }
        },
        r);
    return os.str();
}

bool same_region(const Region& a, const Region& b, double tol) {
    if (a.index() != b.index()) return false;
    if (const auto* da = std::get_if<Disk>(&a)) {
        const auto& db = std::get<Disk>(b);
        return std::abs(da->center.x - db.center.x) <= tol &&
               std::abs(da->center.y - db.center.y) <= tol &&
               std::abs(da->radius - db.radius) <= tol;
    }
    if (const auto* aa = std::get_if<Annulus>(&a)) {
        const auto& ab = std::get<Annulus>(b);
        return std::abs(aa->center.x - ab.center.x) <= tol &&
               std::abs(aa->center.y - ab.center.y) <= tol &&
               std::abs(aa->r_inner - ab.r_inner) <= tol &&
               std::abs(aa->r_outer - ab.r_outer) <= tol;
    }
    const auto& ba = std::get<Box>(a);
    const auto& bb = std::get<Box>(b);
    return std::abs(ba.x0 - bb.x0) <= tol && std::abs(ba.y0 - bb.y0) <= tol &&
           std::abs(ba.x1 - bb.x1) <= tol && std::abs(ba.y1 - bb.y1) <= tol;
}

Region scale_region(const Region& r, double factor) {
    return std::visit(
        [factor](const auto& g) -> Region {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, Disk>) {
                return Disk{{g.center.x * factor, g.center.y * factor}, g.radius * factor};
            } else if constexpr (std::is_same_v<T, Annulus>) {
                return Annulus{{g.center.x * factor, g.center.y * factor},
                               g.r_inner * factor, g.r_outer * factor};
            } else {
                return Box{g.x0 * factor, g.y0 * factor, g.x1 * factor, g.y1 * factor};
            }
        },
        r);
}

double disk_intersection_area(double r1, double r2, double d) {
    if (d >= r1 + r2) return 0.0;
    if (d <= std::abs(r1 - r2)) {
        const double r = std::min(r1, r2);
        return kPi * r * r;
    }
    const double a1 = std::acos(std::clamp((d * d + r1 * r1 - r2 * r2) / (2 * d * r1), -1.0, 1.0));
    const double a2 = std::acos(std::clamp((d * d + r2 * r2 - r1 * r1) / (2 * d * r2), -1.0, 1.0));
    return r1 * r1 * (a1 - std::sin(2 * a1) / 2) + r2 * r2 * (a2 - std::sin(2 * a2) / 2);
}

double circle_fraction_inside_disk(double s, double d, double R) {
    if (s + d <= R) return 1.0;
    if (s - d >= R || d - s >= R) return 0.0;
    const double c = std::clamp((s * s + d * d - R * R) / (2 * s * d), -1.0, 1.0);
    // Half-angle of the arc outside B_R is acos(-c); inside fraction follows.
    return std::acos(c) / kPi;
}

bool is_simple(const PointPattern& pat, double tol) {
    const auto& pts = pat.points;
    if (pts.size() < 2) return true;
    NeighborGrid grid(pts, std::max(1e-6, tol > 0 ? 4 * tol : 1e-3));
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j : grid.within(pts[i], tol, i)) {
            if (j != i && dist2(pts[i], pts[j]) <= tol * tol) return false;
        }
    }
    return true;
}

bool all_in_window(const PointPattern& pat) {
    for (const auto& p : pat.points) {
        if (!contains(pat.window, p)) return false;
    }
    return true;
}

NeighborGrid::NeighborGrid(const std::vector<Point>& pts, double cell_size)
    : pts_(pts), cell_(cell_size) {
    if (cell_ <= 0) throw std::invalid_argument("NeighborGrid: cell size must be positive");
    double max_x, max_y;
    if (pts.empty()) {
        min_x_ = min_y_ = 0.0;
        max_x = max_y = 1.0;
    } else {
        min_x_ = max_x = pts[0].x;
        min_y_ = max_y = pts[0].y;
        for (const auto& p : pts) {
            min_x_ = std::min(min_x_, p.x);
            max_x = std::max(max_x, p.x);
            min_y_ = std::min(min_y_, p.y);
            max_y = std::max(max_y, p.y);
        }
    }
    nx_ = std::max(1, static_cast<int>((max_x - min_x_) / cell_) + 1);
    ny_ = std::max(1, static_cast<int>((max_y - min_y_) / cell_) + 1);
    cells_.resize(static_cast<std::size_t>(nx_) * ny_);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const int cx = std::clamp(static_cast<int>((pts[i].x - min_x_) / cell_), 0, nx_ - 1);
        const int cy = std::clamp(static_cast<int>((pts[i].y - min_y_) / cell_), 0, ny_ - 1);
        cells_[cell_index(cx, cy)].push_back(i);
    }
}

std::vector<std::size_t> NeighborGrid::within(const Point& p, double radius,
                                              std::size_t exclude) const {
    std::vector<std::size_t> out;
    const int span = static_cast<int>(radius / cell_) + 1;
    const int cx = std::clamp(static_cast<int>((p.x - min_x_) / cell_), 0, nx_ - 1);
    const int cy = std::clamp(static_cast<int>((p.y - min_y_) / cell_), 0, ny_ - 1);
    const double r2 = radius * radius;
    for (int gy = std::max(0, cy - span); gy <= std::min(ny_ - 1, cy + span); ++gy) {
        for (int gx = std::max(0, cx - span); gx <= std::min(nx_ - 1, cx + span); ++gx) {
            for (std::size_t i : cells_[cell_index(gx, gy)]) {
                if (i != exclude && dist2(pts_[i], p) <= r2) out.push_back(i);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool NeighborGrid::any_within(const Point& p, double radius, std::size_t exclude) const {
    const int span = static_cast<int>(radius / cell_) + 1;
    const int cx = std::clamp(static_cast<int>((p.x - min_x_) / cell_), 0, nx_ - 1);
    const int cy = std::clamp(static_cast<int>((p.y - min_y_) / cell_), 0, ny_ - 1);
    const double r2 = radius * radius;
    for (int gy = std::max(0, cy - span); gy <= std::min(ny_ - 1, cy + span); ++gy) {
        for (int gx = std::max(0, cx - span); gx <= std::min(nx_ - 1, cx + span); ++gx) {
            for (std::size_t i : cells_[cell_index(gx, gy)]) {
                if (i != exclude && dist2(pts_[i], p) <= r2) return true;
            }
        }
    }
    return false;
}

double NeighborGrid::nearest_neighbor_dist(std::size_t i) const {
    if (pts_.size() < 2) throw std::invalid_argument("nearest_neighbor_dist: need >= 2 points");
    const Point& p = pts_[i];
    const int cx = std::clamp(static_cast<int>((p.x - min_x_) / cell_), 0, nx_ - 1);
    const int cy = std::clamp(static_cast<int>((p.y - min_y_) / cell_), 0, ny_ - 1);
    double best2 = std::numeric_limits<double>::infinity();
    const int max_ring = std::max(nx_, ny_);
    for (int ring = 0; ring <= max_ring; ++ring) {
        // Once a candidate is found, one extra ring guarantees correctness
        // (points in ring r are at distance >= (r-1)*cell).
        if (std::isfinite(best2)) {
            const double safe = (ring - 1) * cell_;
            if (safe > 0 && safe * safe > best2) break;
        }
        for (int gy = cy - ring; gy <= cy + ring; ++gy) {
            if (gy < 0 || gy >= ny_) continue;
            for (int gx = cx - ring; gx <= cx + ring; ++gx) {
                if (gx < 0 || gx >= nx_) continue;
                if (std::max(std::abs(gx - cx), std::abs(gy - cy)) != ring) continue;
                for (std::size_t j : cells_[cell_index(gx, gy)]) {
                    if (j == i) continue;
                    best2 = std::min(best2, dist2(pts_[j], p));
                }
            }
        }
    }
    return std::sqrt(best2);
}

}  // namespace dpplab
