#include "wiredelay/linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace wiredelay {

bool is_finite(const Mat& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            const Complex& z = m(i, j);
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
        }
    return true;
}

void require_finite(const Mat& m, const char* what) {
    if (!is_finite(m)) throw NumericalError(std::string(what) + ": non-finite matrix entry");
}

HermitianMatrix HermitianMatrix::project(const Mat& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("HermitianMatrix: matrix not square");
    check_dim(static_cast<int>(m.rows()), "HermitianMatrix");
    require_finite(m, "HermitianMatrix::project");
    HermitianMatrix h(static_cast<int>(m.rows()));
    h.m_ = 0.5 * (m + m.adjoint());
    // Mirror exactly so (b,a) == conj((a,b)) bit-for-bit and the diagonal is real.
    const int n = h.dim();
    for (int a = 0; a < n; ++a) {
        h.m_(a, a) = Complex(h.m_(a, a).real(), 0.0);
        for (int b = a + 1; b < n; ++b) h.m_(b, a) = std::conj(h.m_(a, b));
    }
    return h;
}

HermitianMatrix HermitianMatrix::require(const Mat& m, double tol) {
    double drift = (m - m.adjoint()).norm();
    double scale = std::max(1.0, m.norm());
    if (drift > tol * scale)
        throw NumericalError("HermitianMatrix::require: Hermiticity drift " + std::to_string(drift));
    return project(m);
}

UnitaryMatrix UnitaryMatrix::require(const Mat& m, double tol) {
    if (m.rows() != m.cols()) throw std::invalid_argument("UnitaryMatrix: matrix not square");
    require_finite(m, "UnitaryMatrix::require");
    UnitaryMatrix u;
    u.m_ = m;
    double r = u.unitarity_residual();
    if (r > tol)
        throw NumericalError("UnitaryMatrix::require: unitarity residual " + std::to_string(r));
    return u;
}

double UnitaryMatrix::unitarity_residual() const {
    const int n = dim();
    return (m_.adjoint() * m_ - Mat::Identity(n, n)).norm();
}

std::vector<double> eigvals_hermitian(const HermitianMatrix& h) {
    Eigen::SelfAdjointEigenSolver<Mat> es(h.mat(), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw NumericalError("eigvals_hermitian: eigensolver failed to converge");
    std::vector<double> out(es.eigenvalues().data(), es.eigenvalues().data() + h.dim());
    return out;  // Eigen returns ascending order
}

HermitianEigen eig_hermitian(const HermitianMatrix& h) {
    Eigen::SelfAdjointEigenSolver<Mat> es(h.mat());
    if (es.info() != Eigen::Success)
        throw NumericalError("eig_hermitian: eigensolver failed to converge");
    HermitianEigen out;
    out.values.assign(es.eigenvalues().data(), es.eigenvalues().data() + h.dim());
    out.vectors = es.eigenvectors();
    return out;
}

Mat mat_exp(const Mat& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("mat_exp: matrix not square");
    require_finite(m, "mat_exp input");
    if (m.isZero(0.0)) return Mat::Identity(m.rows(), m.cols());
    double norm = m.norm();
    if (norm > 700.0)
        throw NumericalError("mat_exp: norm " + std::to_string(norm) + " would overflow");
    Mat e = m.exp();
    if (!is_finite(e))
        throw NumericalError("mat_exp: overflow at input norm " + std::to_string(norm));
    return e;
}

UnitaryMatrix unitarize(const Mat& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("unitarize: matrix not square");
    require_finite(m, "unitarize input");
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    double smax = sv(0), smin = sv(sv.size() - 1);
    if (!(smin > smax * 1e-13) || smax == 0.0)
        throw NumericalError("unitarize: singular input (condition beyond 1e13)");
    return UnitaryMatrix::require(svd.matrixU() * svd.matrixV().adjoint(), 1e-10);
}

}  // namespace wiredelay
