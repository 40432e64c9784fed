#include "dpplab/numerics.hpp"

#include <lapacke.h>

#include <algorithm>

namespace dpplab {

double regularized_upper_gamma(int k, double x) {
    if (k < 1) throw std::invalid_argument("regularized_upper_gamma: k must be >= 1");
    if (x < 0) throw std::invalid_argument("regularized_upper_gamma: x must be >= 0");
    if (x == 0.0) return 1.0;
    // Kahan-compensated forward sum of x^l/l!, l = 0..k-1.
    double term = 1.0, sum = 1.0, comp = 0.0;
    for (int l = 1; l < k; ++l) {
        term *= x / l;
        const double y = term - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if (!std::isfinite(sum)) return std::exp(log_regularized_upper_gamma(k, x));
    }
    const double q = std::exp(-x) * sum;
    if (q == 0.0 || !std::isfinite(q)) return std::exp(log_regularized_upper_gamma(k, x));
    return std::min(q, 1.0);
}

double log_regularized_upper_gamma(int k, double x) {
    if (k < 1) throw std::invalid_argument("log_regularized_upper_gamma: k must be >= 1");
    if (x < 0) throw std::invalid_argument("log_regularized_upper_gamma: x must be >= 0");
    if (x == 0.0) return 0.0;
    // log-sum-exp over l ln x - lgamma(l+1); running max avoids a second pass.
    const double lx = std::log(x);
    double m = -std::numeric_limits<double>::infinity();
    std::vector<double> logs(static_cast<std::size_t>(k));
    for (int l = 0; l < k; ++l) {
        logs[static_cast<std::size_t>(l)] = l * lx - std::lgamma(l + 1.0);
        m = std::max(m, logs[static_cast<std::size_t>(l)]);
    }
    double s = 0.0;
    for (int l = 0; l < k; ++l) s += std::exp(logs[static_cast<std::size_t>(l)] - m);
    return std::min(0.0, -x + m + std::log(s));
}

double poisson_mean_excess(int I, double x) {
    if (I < 0) throw std::invalid_argument("poisson_mean_excess: I must be >= 0");
    if (I == 0) return x;
    const double a = 1.0 - regularized_upper_gamma(I, x);
    const double b = 1.0 - regularized_upper_gamma(I + 1, x);
    return std::max(0.0, x * a - I * b);
}

EigResult hermitian_eig(const Eigen::MatrixXcd& M) {
    const auto n = M.rows();
    if (n != M.cols()) throw std::invalid_argument("hermitian_eig: square matrix required");
    double scale = 0.0, dev = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            scale = std::max(scale, std::abs(M(i, j)));
            dev = std::max(dev, std::abs(M(i, j) - std::conj(M(j, i))));
        }
    }
    if (dev > 1e-12 * std::max(scale, 1e-300)) {
        throw std::invalid_argument("hermitian_eig: matrix is not Hermitian");
    }
    if (n == 0) return {Eigen::VectorXd(0), Eigen::MatrixXcd(0, 0)};

    Eigen::MatrixXcd A = M;  // column-major, overwritten with eigenvectors
    Eigen::VectorXd w(n);
    const lapack_int info = LAPACKE_zheevd(
        LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(n),
        reinterpret_cast<lapack_complex_double*>(A.data()), static_cast<lapack_int>(n),
        w.data());
    if (info != 0) throw std::runtime_error("hermitian_eig: zheevd failed, info=" + std::to_string(info));

    EigResult out;
    out.eigenvalues = w.reverse();
    out.eigenvectors = A.rowwise().reverse();
    return out;
}

std::complex<double> complex_det(const Eigen::MatrixXcd& M) {
    if (M.rows() != M.cols()) throw std::invalid_argument("complex_det: square matrix required");
    if (M.rows() == 0) return {1.0, 0.0};
    return Eigen::PartialPivLU<Eigen::MatrixXcd>(M).determinant();
}

Eigen::VectorXcd general_eigenvalues(const Eigen::MatrixXcd& M) {
    const auto n = M.rows();
    if (n != M.cols()) throw std::invalid_argument("general_eigenvalues: square matrix required");
    if (n == 0) return Eigen::VectorXcd(0);
    Eigen::MatrixXcd A = M;
    Eigen::VectorXcd w(n);
    const lapack_int info = LAPACKE_zgeev(
        LAPACK_COL_MAJOR, 'N', 'N', static_cast<lapack_int>(n),
        reinterpret_cast<lapack_complex_double*>(A.data()), static_cast<lapack_int>(n),
        reinterpret_cast<lapack_complex_double*>(w.data()), nullptr, 1, nullptr, 1);
    if (info != 0) throw std::runtime_error("general_eigenvalues: zgeev failed, info=" + std::to_string(info));
    return w;
}

}  // namespace dpplab
