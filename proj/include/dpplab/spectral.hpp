#pragma once

#include <memory>
#include <string>

#include "dpplab/geometry.hpp"
#include "dpplab/kernels.hpp"

namespace dpplab {

class BasisImpl {
  public:
    virtual ~BasisImpl() = default;
    // Writes eigenfunctions 0..n-1 at p into out; n never exceeds the
    // construction-time count (truncation only shortens the prefix).
    virtual void eval_all(const Point& p, std::complex<double>* out, std::size_t n) const = 0;
};

// Truncated Mercer eigen-system of a kernel restricted to a compact window.
// Eigenvalues descending in [0,1]; eigenfunctions orthonormal on the window
// (analytic basis) or w.r.t. the quadrature measure (Nystrom basis).
struct SpectralBasis {
    Region window = Disk{{0, 0}, 1.0};
    std::vector<double> eigenvalues;
    double truncation_tail = 0.0;
    double trace = 0.0;  // = sum(eigenvalues) + truncation_tail
    std::shared_ptr<const BasisImpl> impl;

    std::size_t size() const { return eigenvalues.size(); }
    void eval_all(const Point& p, std::complex<double>* out) const {
        impl->eval_all(p, out, eigenvalues.size());
    }

    // Moves the smallest eigenvalues into truncation_tail while their sum
    // stays below tail_tol.
    void truncate(double tail_tol);
};

/// Ginibre restricted to B_R(0): lambda_k = P(Gamma(k+1,1) <= R^2) with
// eigenfunctions z^k e^{-|z|^2/2} normalized on the disk, k = 0,1,...
// Truncation at the first K with sum of discarded eigenvalues < tail_tol.
SpectralBasis ginibre_disk_basis(double R, double tail_tol);

// Quadrature-discretized integral operator on a tensor midpoint grid
// (grid_n x grid_n over the window's bounding box, window-indicator weights).
// Eigenvalues outside [0,1] beyond 1e-6 are rejected as invalid DPP input.
SpectralBasis nystrom_basis(const KernelSpec& K, const Region& window, int grid_n);

void export_eigenvalues_csv(const SpectralBasis& basis, const std::string& path);

}  // namespace dpplab
