#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

namespace dpplab {

// Non-negative real carried as ln(x); ln(0) = -inf is a valid state.
struct LogValue {
    double log_magnitude = -std::numeric_limits<double>::infinity();

    static LogValue from_linear(double x) {
        if (x < 0) throw std::invalid_argument("LogValue: negative input");
        return {std::log(x)};
    }
    static LogValue from_log(double lm) { return {lm}; }
    static LogValue zero() { return {-std::numeric_limits<double>::infinity()}; }
    static LogValue one() { return {0.0}; }

    double value() const { return std::exp(log_magnitude); }
    bool is_zero() const { return std::isinf(log_magnitude) && log_magnitude < 0; }

    LogValue operator*(const LogValue& o) const {
        if (is_zero() || o.is_zero()) return zero();
        return {log_magnitude + o.log_magnitude};
    }
    LogValue operator/(const LogValue& o) const {
        if (o.is_zero()) throw std::domain_error("LogValue: division by zero");
        if (is_zero()) return zero();
        return {log_magnitude - o.log_magnitude};
    }
    // log-sum-exp; exact when one side is zero.
    LogValue operator+(const LogValue& o) const {
        if (is_zero()) return o;
        if (o.is_zero()) return *this;
        const double a = std::max(log_magnitude, o.log_magnitude);
        const double b = std::min(log_magnitude, o.log_magnitude);
        return {a + std::log1p(std::exp(b - a))};
    }
    bool operator<(const LogValue& o) const { return log_magnitude < o.log_magnitude; }
};

// Q(k,x) = P(Gamma(k,1) > x) for integer k >= 1, via the finite Poisson sum
// e^{-x} sum_{l<k} x^l/l!. Relative error <= 1e-12 in the linear range.
double regularized_upper_gamma(int k, double x);
// ln Q(k,x); stable for arguments where the linear value underflows.
double log_regularized_upper_gamma(int k, double x);

// E[(N-I)^+] for N ~ Poisson(x): x(1-Q(I,x)) - I(1-Q(I+1,x)).
// Used as a rigorous tail bound for sums of 1-Q(i,x) over i > I.
double poisson_mean_excess(int I, double x);

struct EigResult {
    Eigen::VectorXd eigenvalues;   // descending
    Eigen::MatrixXcd eigenvectors; // columns, orthonormal, matching order
};

// LAPACK-backed Hermitian eigendecomposition. Rejects non-Hermitian input
// (max deviation > 1e-12 * scale).
EigResult hermitian_eig(const Eigen::MatrixXcd& M);

std::complex<double> complex_det(const Eigen::MatrixXcd& M);

// Eigenvalues of a general complex matrix (no eigenvectors).
Eigen::VectorXcd general_eigenvalues(const Eigen::MatrixXcd& M);

}  // namespace dpplab
