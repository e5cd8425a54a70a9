#include "wiredelay/rmt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace wiredelay {

WishartSpec::WishartSpec(int n, SymmetryClass b, double mu_) : dim(n), beta(b), mu(mu_) {
    check_dim(n, "WishartSpec");
    if (!(mu > 0.5 * beta.beta * (dim - 1)))
        throw std::invalid_argument("WishartSpec: requires mu > beta (N-1)/2, got mu = " +
                                    std::to_string(mu_));
}

double sample_gamma(double shape, RngStream& rng) {
    if (!(shape > 0.0)) throw std::invalid_argument("sample_gamma: shape must be > 0");
    if (shape < 1.0) {
        // boost: G(shape) = G(shape + 1) * U^{1/shape}
        const double g = sample_gamma(shape + 1.0, rng);
        return g * std::pow(rng.next_double(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        const double x = rng.next_normal();
        const double t = 1.0 + c * x;
        if (t <= 0.0) continue;
        const double v = t * t * t;
        const double u = rng.next_double();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double sample_chi(double dof, RngStream& rng) {
    if (!(dof > 0.0)) throw std::invalid_argument("sample_chi: dof must be > 0");
    return std::sqrt(2.0 * sample_gamma(0.5 * dof, rng));
}

SpectralSample sample_wishart_eigs(const WishartSpec& spec, RngStream& rng) {
    const int n = spec.dim;
    const double b = static_cast<double>(spec.beta.beta);
    Eigen::VectorXd d(n), s(std::max(n - 1, 1));
    for (int i = 0; i < n; ++i) d(i) = sample_chi(2.0 * spec.mu - b * i, rng);
    for (int i = 0; i < n - 1; ++i) s(i) = sample_chi(b * (n - 1 - i), rng);

    // B B^T is symmetric tridiagonal: diag d_i^2 + s_{i-1}^2, off-diag d_i s_i
    Eigen::VectorXd diag(n), off(std::max(n - 1, 1));
    for (int i = 0; i < n; ++i) diag(i) = d(i) * d(i) + (i > 0 ? s(i - 1) * s(i - 1) : 0.0);
    for (int i = 0; i < n - 1; ++i) off(i) = d(i) * s(i);

    Eigen::SelfAdjointEigenSolver<RealMat> solver;
    solver.computeFromTridiagonal(diag, off.head(std::max(n - 1, 0)),
                                  Eigen::EigenvaluesOnly);
    SpectralSample out;
    out.eigenvalues.resize(n);
    for (int i = 0; i < n; ++i)
        out.eigenvalues[i] = std::max(solver.eigenvalues()(i), std::numeric_limits<double>::min());
    std::sort(out.eigenvalues.begin(), out.eigenvalues.end());
    return out;
}

SpectralSample sample_wishart_direct(const WishartSpec& spec, RngStream& rng) {
    const int n = spec.dim;
    const double cols_real = (spec.beta.beta == 1) ? 2.0 * spec.mu : spec.mu;
    const int cols = static_cast<int>(std::llround(cols_real));
    if (std::abs(cols_real - cols) > 1e-9 || cols < n)
        throw std::invalid_argument(
            "sample_wishart_direct: spec needs an integer Gaussian column count >= N "
            "(2 mu for beta=1, mu for beta=2)");

    SpectralSample out;
    out.eigenvalues.resize(n);
    if (spec.beta.beta == 1) {
        RealMat a(n, cols);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < cols; ++j) a(i, j) = rng.next_normal();
        const RealMat w = a * a.transpose();
        Eigen::SelfAdjointEigenSolver<RealMat> solver(w, Eigen::EigenvaluesOnly);
        for (int i = 0; i < n; ++i)
            out.eigenvalues[i] =
                std::max(solver.eigenvalues()(i), std::numeric_limits<double>::min());
    } else {
        Mat a(n, cols);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < cols; ++j) a(i, j) = Complex(rng.next_normal(), rng.next_normal());
        const Mat w = a * a.adjoint();
        Eigen::SelfAdjointEigenSolver<Mat> solver(w, Eigen::EigenvaluesOnly);
        for (int i = 0; i < n; ++i)
            out.eigenvalues[i] =
                std::max(solver.eigenvalues()(i), std::numeric_limits<double>::min());
    }
    std::sort(out.eigenvalues.begin(), out.eigenvalues.end());
    return out;
}

HermitianMatrix dufresne_limit_sample(const ModelParams& params, double length_over_xi,
                                      const SdeConfig& cfg, RngStream rng) {
    if (!(length_over_xi >= 8.0))
        throw std::invalid_argument(
            "dufresne_limit_sample: needs length_over_xi >= 8 for the saturated limit");
    const Mat q = exp_functional_raw(params, length_over_xi, cfg, rng);
    Eigen::SelfAdjointEigenSolver<Mat> solver(q);
    const auto& ev = solver.eigenvalues();
    if (!(ev.minCoeff() > 1e-10 * std::max(1.0, ev.maxCoeff())))
        throw NumericalError("dufresne_limit_sample: functional numerically singular");
    Mat inv = solver.eigenvectors() * ev.cwiseInverse().asDiagonal() *
              solver.eigenvectors().adjoint();
    return HermitianMatrix::project(inv);
}

double stationary_support_min(SymmetryClass beta) { return 1.0 / (4.0 * beta.beta); }

double stationary_density(SymmetryClass beta, double lambda) {
    const double b = static_cast<double>(beta.beta);
    const double disc = b * lambda - 0.25;
    if (!(disc > 0.0)) return 0.0;
    return std::sqrt(disc) / (M_PI * b * lambda * lambda);
}

}  // namespace wiredelay
