#include "dpplab/spectral.hpp"

#include <Eigen/Dense>
#include <fstream>

#include "dpplab/numerics.hpp"

namespace dpplab {

namespace {
constexpr double kPi = 3.14159265358979323846;

// Poisson(R^2) upper tails S_k = P(N > k) for k = 0..K-1, by backward
// accumulation of pmf values (no cancellation; every add is positive).
std::vector<double> poisson_upper_tails(double lambda, std::size_t K) {
    const double ll = std::log(lambda);
    // Extend past K until the remaining tail is negligible.
    std::size_t J = std::max<std::size_t>(K + 8, static_cast<std::size_t>(lambda));
    auto logpmf = [&](std::size_t j) {
        return static_cast<double>(j) * ll - lambda - std::lgamma(static_cast<double>(j) + 1.0);
    };
    while (!(static_cast<double>(J) > lambda && logpmf(J) < -60.0)) {
        J = J * 2 + 16;
        if (J > 5000000) throw std::runtime_error("poisson_upper_tails: tail did not close");
    }
    std::vector<double> pmf(J + 1);
    for (std::size_t j = 0; j <= J; ++j) pmf[j] = std::exp(logpmf(j));
    // Geometric bound on the part beyond J.
    const double r = lambda / static_cast<double>(J + 1);
    double tail = pmf[J] * r / (1.0 - r);
    std::vector<double> S(K);
    for (std::size_t j = J; j >= 1; --j) {
        if (j <= K) S[j - 1] = tail + pmf[j];
        tail += pmf[j];
    }
    for (std::size_t k = 0; k < K; ++k) {
        if (k + 1 <= J) continue;
        S[k] = 0.0;  // beyond the computed range: below 1e-26
    }
    return S;
}

class AnalyticDiskBasis final : public BasisImpl {
  public:
    AnalyticDiskBasis(double R, std::vector<double> lambdas) : R_(R), lambda_(std::move(lambdas)) {
        const std::size_t K = lambda_.size();
        step_log_.resize(K, 0.0);
        for (std::size_t k = 1; k < K; ++k) {
            step_log_[k] = -0.5 * (std::log(static_cast<double>(k)) +
                                   std::log(lambda_[k]) - std::log(lambda_[k - 1]));
        }
        base_log_ = -0.5 * std::log(kPi * lambda_[0]);
    }

    void eval_all(const Point& p, std::complex<double>* out, std::size_t n) const override {
        const std::size_t K = std::min(n, lambda_.size());
        const double r2 = p.x * p.x + p.y * p.y;
        if (r2 == 0.0) {
            out[0] = {std::exp(base_log_), 0.0};
            for (std::size_t k = 1; k < K; ++k) out[k] = {0.0, 0.0};
            return;
        }
        const double r = std::sqrt(r2);
        const double lr = std::log(r);
        // log-polar recurrence: |phi_k| = exp(L_k), phase advanced by
        // incremental rotation (drift ~ K*eps, well under tolerance).
        const std::complex<double> rot(p.x / r, p.y / r);
        double L = base_log_ - 0.5 * r2;
        std::complex<double> phase(1.0, 0.0);
        out[0] = (L > -745.0) ? std::exp(L) * phase : std::complex<double>(0.0, 0.0);
        for (std::size_t k = 1; k < K; ++k) {
            L += lr + step_log_[k];
            phase *= rot;
            out[k] = (L > -745.0) ? std::exp(L) * phase : std::complex<double>(0.0, 0.0);
        }
    }

  private:
    double R_;
    std::vector<double> lambda_;
    std::vector<double> step_log_;
    double base_log_;
};

class NystromBasis final : public BasisImpl {
  public:
    NystromBasis(KernelSpec K, std::vector<Point> nodes, Eigen::MatrixXcd weights)
        : K_(std::move(K)), nodes_(std::move(nodes)), W_(std::move(weights)) {}

    void eval_all(const Point& p, std::complex<double>* out, std::size_t k) const override {
        const Eigen::Index n = static_cast<Eigen::Index>(nodes_.size());
        const Eigen::Index cols = std::min<Eigen::Index>(static_cast<Eigen::Index>(k), W_.cols());
        Eigen::VectorXcd c(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            c(i) = K_.evaluate(p, nodes_[static_cast<std::size_t>(i)]);
        }
        Eigen::Map<Eigen::VectorXcd> o(out, cols);
        o.noalias() = W_.leftCols(cols).transpose() * c;
    }

  private:
    KernelSpec K_;
    std::vector<Point> nodes_;
    Eigen::MatrixXcd W_;  // nodes x k, column j = sqrt(w) u_j / mu_j
};

}  // namespace

void SpectralBasis::truncate(double tail_tol) {
    double dropped = 0.0;
    std::size_t keep = eigenvalues.size();
    while (keep > 0 && dropped + eigenvalues[keep - 1] < tail_tol) {
        dropped += eigenvalues[keep - 1];
        --keep;
    }
    eigenvalues.resize(keep);
    truncation_tail += dropped;
}

SpectralBasis ginibre_disk_basis(double R, double tail_tol) {
    if (R <= 0 || tail_tol <= 0) throw std::invalid_argument("ginibre_disk_basis: R, tail_tol > 0");
    constexpr std::size_t kHardCap = 20000;
    const double R2 = R * R;

    // lambda_k = P(Gamma(k+1) <= R^2) = P(Poisson(R^2) > k).
    std::size_t K_guess = static_cast<std::size_t>(R2 + 12.0 * std::sqrt(R2) + 24.0);
    K_guess = std::min(K_guess, kHardCap);
    std::vector<double> lam = poisson_upper_tails(R2, K_guess);

    double sum = 0.0;
    std::size_t K_max = 0;
    while (K_max < lam.size() && R2 - sum >= tail_tol) {
        sum += lam[K_max];
        ++K_max;
    }
    if (R2 - sum >= tail_tol) {
        if (K_guess >= kHardCap) {
            throw std::runtime_error("ginibre_disk_basis: tail_tol unreachable within hard cap");
        }
        lam = poisson_upper_tails(R2, kHardCap);
        sum = 0.0;
        K_max = 0;
        while (K_max < lam.size() && R2 - sum >= tail_tol) {
            sum += lam[K_max];
            ++K_max;
        }
        if (R2 - sum >= tail_tol) {
            throw std::runtime_error("ginibre_disk_basis: tail_tol unreachable within hard cap");
        }
    }
    lam.resize(K_max);

    SpectralBasis basis;
    basis.window = Disk{{0.0, 0.0}, R};
    basis.eigenvalues = lam;
    basis.trace = R2;
    basis.truncation_tail = std::max(0.0, R2 - sum);
    basis.impl = std::make_shared<AnalyticDiskBasis>(R, std::move(lam));
    return basis;
}

SpectralBasis nystrom_basis(const KernelSpec& K, const Region& window, int grid_n) {
    if (grid_n < 2) throw std::invalid_argument("nystrom_basis: grid_n >= 2 required");
    const Box bb = bounding_box(window);
    const double hx = (bb.x1 - bb.x0) / grid_n;
    const double hy = (bb.y1 - bb.y0) / grid_n;
    const double w = hx * hy;

    std::vector<Point> nodes;
    nodes.reserve(static_cast<std::size_t>(grid_n) * grid_n);
    for (int iy = 0; iy < grid_n; ++iy) {
        for (int ix = 0; ix < grid_n; ++ix) {
            const Point p{bb.x0 + (ix + 0.5) * hx, bb.y0 + (iy + 0.5) * hy};
            if (contains(window, p)) nodes.push_back(p);
        }
    }
    const Eigen::Index n = static_cast<Eigen::Index>(nodes.size());
    if (n == 0) throw std::invalid_argument("nystrom_basis: no quadrature nodes inside window");

    Eigen::MatrixXcd H(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            const auto v = K.evaluate(nodes[static_cast<std::size_t>(i)],
                                      nodes[static_cast<std::size_t>(j)]) * w;
            H(i, j) = v;
            H(j, i) = std::conj(v);
        }
        H(i, i) = std::complex<double>(H(i, i).real(), 0.0);
    }
    EigResult eig = hermitian_eig(H);

    const double zero_tol = 1e-6;
    std::vector<double> mu;
    std::vector<Eigen::Index> kept;
    double tail = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        double m = eig.eigenvalues(j);
        if (m > 1.0 + zero_tol || m < -zero_tol) {
            throw std::runtime_error("nystrom_basis: not a valid DPP kernel on this window");
        }
        m = std::clamp(m, 0.0, 1.0);
        // Extension divides by mu; drop numerically void modes.
        if (m < 1e-12) {
            tail += m;
            continue;
        }
        mu.push_back(m);
        kept.push_back(j);
    }

    Eigen::MatrixXcd W(n, static_cast<Eigen::Index>(kept.size()));
    const double sqrt_w = std::sqrt(w);
    for (std::size_t c = 0; c < kept.size(); ++c) {
        W.col(static_cast<Eigen::Index>(c)) =
            eig.eigenvectors.col(kept[c]) * (sqrt_w / mu[c]);
    }

    SpectralBasis basis;
    basis.window = window;
    basis.eigenvalues = mu;
    basis.truncation_tail = tail;
    double tr = 0.0;
    for (double m : mu) tr += m;
    basis.trace = tr + tail;
    basis.impl = std::make_shared<NystromBasis>(K, std::move(nodes), std::move(W));
    return basis;
}

void export_eigenvalues_csv(const SpectralBasis& basis, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("export_eigenvalues_csv: cannot open " + path);
    os.precision(17);
    os << "k,eigenvalue\n";
    for (std::size_t k = 0; k < basis.eigenvalues.size(); ++k) {
        os << k << "," << basis.eigenvalues[k] << "\n";
    }
}

}  // namespace dpplab
