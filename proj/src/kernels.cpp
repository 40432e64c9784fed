#include "dpplab/kernels.hpp"

#include "dpplab/numerics.hpp"

namespace dpplab {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

KernelSpec ginibre_kernel() {
    KernelSpec K;
    // K(z,w) = pi^{-1} exp(-(|z|^2+|w|^2)/2 + z conj(w)); the combined
    // exponent has non-positive real part, so no overflow is possible.
    K.evaluate = [](const Point& a, const Point& b) -> std::complex<double> {
        const std::complex<double> z = to_complex(a), w = to_complex(b);
        const std::complex<double> ex =
            -0.5 * (std::norm(z) + std::norm(w)) + z * std::conj(w);
        return std::exp(ex) / kPi;
    };
    K.rho = 1.0 / kPi;
    K.sup_norm = 1.0 / kPi;
    K.phi = [](double r) { return std::exp(-0.5 * r * r) / kPi; };
    K.stationary = true;
    return K;
}

KernelSpec palm_kernel(const KernelSpec& K, const Point& x) {
    if (K.palm_depth >= KernelSpec::palm_depth_cap) {
        throw std::runtime_error("palm_kernel: conditioning depth cap exceeded");
    }
    const double kxx = K.evaluate(x, x).real();
    if (!(kxx > KernelSpec::degeneracy_tol * K.rho)) {
        throw degenerate_conditioning("palm_kernel: K(x,x) vanishes at the conditioning point");
    }
    KernelSpec P;
    const auto base = K.evaluate;
    P.evaluate = [base, x, kxx](const Point& a, const Point& b) -> std::complex<double> {
        return base(a, b) - base(a, x) * base(x, b) / kxx;
    };
    P.rho = K.rho;
    // Conservative: only enters upper bounds downstream.
    P.sup_norm = 2.0 * K.sup_norm;
    const auto base_phi = K.phi;
    P.phi = [base_phi](double r) { return 2.0 * base_phi(r); };
    P.palm_depth = K.palm_depth + 1;
    P.stationary = false;
    return P;
}

KernelSpec two_point_palm_kernel(const KernelSpec& K, const Point& x, const Point& y) {
    const KernelSpec Kx = palm_kernel(K, x);
    const double kyy = Kx.evaluate(y, y).real();
    if (!(kyy > KernelSpec::degeneracy_tol * K.rho)) {
        throw degenerate_conditioning("two_point_palm_kernel: degenerate at the second point");
    }
    return palm_kernel(Kx, y);
}

double correlation_function(const KernelSpec& K, const std::vector<Point>& points) {
    const std::size_t m = points.size();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            if (dist2(points[i], points[j]) == 0.0) {
                throw std::invalid_argument("correlation_function: duplicate points");
            }
        }
    }
    Eigen::MatrixXcd M(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                K.evaluate(points[i], points[j]);
        }
    }
    double det = complex_det(M).real();
    double scale = 1.0;
    for (std::size_t i = 0; i < m; ++i) scale *= K.sup_norm;
    if (det < 0 && det > -1e-10 * scale) det = 0.0;
    return det;
}

DecayGap correlation_decay_gap(const KernelSpec& K, const std::vector<Point>& group_p,
                               const std::vector<Point>& group_q) {
    std::vector<Point> all = group_p;
    all.insert(all.end(), group_q.begin(), group_q.end());
    const double joint = correlation_function(K, all);
    const double split = correlation_function(K, group_p) * correlation_function(K, group_q);
    double s = std::numeric_limits<double>::infinity();
    for (const auto& a : group_p) {
        for (const auto& b : group_q) s = std::min(s, dist(a, b));
    }
    const double m = static_cast<double>(all.size());
    DecayGap out;
    out.gap = std::abs(joint - split);
    out.bound = std::pow(m, 1.0 + m / 2.0) * K.phi(s) * std::pow(K.sup_norm, m - 1.0);
    return out;
}

}  // namespace dpplab
