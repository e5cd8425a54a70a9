#pragma once

#include <Eigen/Dense>
#include <vector>

#include "wiredelay/common.hpp"

namespace wiredelay {

using Mat = Eigen::MatrixXcd;
using RealMat = Eigen::MatrixXd;
using Vec = Eigen::VectorXcd;

/// True if every entry is finite (no NaN/Inf in either component).
[[nodiscard]] bool is_finite(const Mat& m);

/// Throws NumericalError if m has a non-finite entry.
void require_finite(const Mat& m, const char* what);

/// Dense Hermitian matrix with storage-enforced conjugate symmetry:
/// entry (b,a) is stored as conj(entry (a,b)) exactly and the diagonal is real.
class HermitianMatrix {
  public:
    HermitianMatrix() = default;
    explicit HermitianMatrix(int n) : m_(Mat::Zero(n, n)) { check_dim(n, "HermitianMatrix"); }

    /// Ingest an arbitrary matrix as (M + M†)/2, then mirror entries exactly.
    static HermitianMatrix project(const Mat& m);

    /// Wrap a matrix that is already Hermitian up to `tol`; throws otherwise.
    static HermitianMatrix require(const Mat& m, double tol = 1e-9);

    [[nodiscard]] int dim() const { return static_cast<int>(m_.rows()); }
    [[nodiscard]] const Mat& mat() const { return m_; }
    [[nodiscard]] double trace_real() const { return m_.trace().real(); }

  private:
    Mat m_;
};

/// Dense unitary matrix; construction checks ‖U†U − 1‖_F ≤ 1e-10.
class UnitaryMatrix {
  public:
    UnitaryMatrix() = default;

    /// Wrap a matrix expected to be unitary; throws if the residual exceeds tol.
    static UnitaryMatrix require(const Mat& m, double tol = 1e-10);

    [[nodiscard]] int dim() const { return static_cast<int>(m_.rows()); }
    [[nodiscard]] const Mat& mat() const { return m_; }
    [[nodiscard]] double unitarity_residual() const;

  private:
    Mat m_;
};

/// Ascending eigenvalues of a Hermitian matrix.
[[nodiscard]] std::vector<double> eigvals_hermitian(const HermitianMatrix& h);

struct HermitianEigen {
    std::vector<double> values;  ///< ascending
    Mat vectors;                 ///< columns matching `values`
};

/// Eigenvalues and eigenvectors; reconstruction V D V† matches to 1e-10 ‖H‖_F.
[[nodiscard]] HermitianEigen eig_hermitian(const HermitianMatrix& h);

/// Matrix exponential by backward-stable scaling-and-squaring; exp(0) = identity exactly.
[[nodiscard]] Mat mat_exp(const Mat& m);

/// Polar factor of a nonsingular matrix: the unitary nearest in Frobenius norm.
[[nodiscard]] UnitaryMatrix unitarize(const Mat& m);

}  // namespace wiredelay
