#pragma once

#include <functional>
#include <memory>

#include "dpplab/geometry.hpp"

namespace dpplab {

struct degenerate_conditioning : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Hermitian correlation kernel with intensity, sup-norm and decay envelope.
// Evaluation closures are immutable and reentrant; Palm conditioning wraps
// them (Schur complement), deepening the chain up to palm_depth_cap.
struct KernelSpec {
    std::function<std::complex<double>(const Point&, const Point&)> evaluate;
    double rho = 0.0;
    double sup_norm = 0.0;
    std::function<double(double)> phi;
    int palm_depth = 0;
    bool stationary = false;

    static constexpr int palm_depth_cap = 4;
    // Conditioning rejected when K^x(y,y) <= this multiple of rho.
    static constexpr double degeneracy_tol = 1e-12;
};

KernelSpec ginibre_kernel();

KernelSpec palm_kernel(const KernelSpec& K, const Point& x);
KernelSpec two_point_palm_kernel(const KernelSpec& K, const Point& x, const Point& y);

// rho^(m) = det(K(x_i,x_j)); small negative fp noise clipped to 0.
double correlation_function(const KernelSpec& K, const std::vector<Point>& points);

struct DecayGap {
    double gap = 0.0;
    double bound = 0.0;
};

// |rho^(p+q)(all) - rho^(p) rho^(q)| against m^{1+m/2} phi(s) ||K||^{m-1},
// s = min cross-group distance.
DecayGap correlation_decay_gap(const KernelSpec& K, const std::vector<Point>& group_p,
                               const std::vector<Point>& group_q);

}  // namespace dpplab
