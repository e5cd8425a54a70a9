#include "wiredelay/microscopic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "wiredelay/noise.hpp"

namespace wiredelay {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kRenormThreshold = 1e100;  // rescale the frame above this magnitude
constexpr double kSeriesCut = 1e-4;         // switch point on |kappa^2| h^2
constexpr double kCoshGuard = 300.0;        // largest |kappa| h in the evanescent branch
constexpr double kAcceptResidual = 1e-10;   // unitarity accepted outright
constexpr double kRetryResidual = 1e-8;     // unitarity accepted after the energy nudge
constexpr double kRetryShift = 1e-9;        // relative energy nudge for the retry

/// Propagation and overlap coefficients across one constant cell for a single
/// eigenchannel with kappa^2 = energy - d. All six are even entire functions
/// of kappa, hence real for real kappa^2 (trigonometric when positive,
/// hyperbolic when negative, short series across the crossover).
struct CellCoefs {
    double c;    // cos(kappa h)
    double s;    // sin(kappa h) / kappa
    double ms;   // -kappa sin(kappa h) = -kappa^2 s
    double icc;  // int_0^h cos^2
    double ics;  // int_0^h cos * (sin/kappa)
    double iss;  // int_0^h (sin/kappa)^2
};

CellCoefs cell_coefs(double a, double h) {
    CellCoefs f{};
    const double u = a * h * h;
    if (std::abs(u) < kSeriesCut) {
        f.c = 1.0 + u * (-0.5 + u * (1.0 / 24.0 - u / 720.0));
        f.s = h * (1.0 + u * (-1.0 / 6.0 + u * (1.0 / 120.0 - u / 5040.0)));
        f.icc = h * (1.0 + u * (-1.0 / 3.0 + u * (1.0 / 15.0 - u * (2.0 / 315.0))));
        f.iss = h * h * h * (1.0 / 3.0 + u * (-1.0 / 15.0 + u * (2.0 / 315.0)));
        f.ics = h * h * (0.5 + u * (-1.0 / 6.0 + u * (1.0 / 45.0 - u / 630.0)));
    } else if (a > 0.0) {
        const double kap = std::sqrt(a);
        const double sz = std::sin(kap * h), cz = std::cos(kap * h);
        f.c = cz;
        f.s = sz / kap;
        const double f1 = sz * cz / (2.0 * kap);
        f.icc = 0.5 * h + f1;
        f.iss = (0.5 * h - f1) / a;
        f.ics = sz * sz / (2.0 * a);
    } else {
        const double m = std::sqrt(-a);
        const double z = m * h;
        if (z > kCoshGuard)
            throw NumericalError("transfer_solve: evanescent growth exp(" + std::to_string(z) +
                                 ") inside one cell; potential too strong for this cell width");
        const double sh = std::sinh(z), ch = std::cosh(z);
        f.c = ch;
        f.s = sh / m;
        const double f1 = sh * ch / (2.0 * m);
        f.icc = 0.5 * h + f1;
        f.iss = (f1 - 0.5 * h) / (m * m);
        f.ics = sh * sh / (2.0 * m * m);
    }
    f.ms = -a * f.s;
    return f;
}

/// Single-channel fast path: everything is a real scalar (a 1x1 Hermitian
/// cell is real, and so is the Dirichlet solution at real energy).
void solve_scalar(const PotentialRealization& pot, const std::vector<double>& energies,
                  bool with_gram, std::vector<TransferSolution>& out) {
    const std::size_t ne = energies.size();
    std::vector<double> p(ne, 0.0), dp(ne, 1.0), g(ne, 0.0), ls(ne, 0.0);
    const double h = pot.h;
    for (const Mat& cell : pot.cells) {
        const double v = cell(0, 0).real();
        for (std::size_t e = 0; e < ne; ++e) {
            const CellCoefs f = cell_coefs(energies[e] - v, h);
            if (with_gram)
                g[e] += f.icc * p[e] * p[e] + 2.0 * f.ics * p[e] * dp[e] + f.iss * dp[e] * dp[e];
            const double pn = f.c * p[e] + f.s * dp[e];
            const double dn = f.ms * p[e] + f.c * dp[e];
            p[e] = pn;
            dp[e] = dn;
            const double mx = std::max(std::abs(pn), std::abs(dn));
            if (!(mx < kRenormThreshold)) {
                if (!std::isfinite(mx)) throw NumericalError("transfer_solve: non-finite wave frame");
                p[e] /= mx;
                dp[e] /= mx;
                g[e] /= mx * mx;
                ls[e] += std::log(mx);
            }
        }
    }
    for (std::size_t e = 0; e < ne; ++e) {
        out[e].psi = Mat::Constant(1, 1, Complex(p[e], 0.0));
        out[e].dpsi = Mat::Constant(1, 1, Complex(dp[e], 0.0));
        out[e].log_scale = ls[e];
        out[e].has_gram = with_gram;
        if (with_gram) out[e].gram = Mat::Constant(1, 1, Complex(g[e], 0.0));
    }
}

/// Closed-form spectral factorization of a 2x2 Hermitian (or real symmetric)
/// matrix; eigenvalues ascending, unitary columns. Hand-rolled because it
/// sits inside the per-cell hot loop.
template <class MatT>
void eig_closed2(const MatT& V, double* d, MatT& U) {
    using S = typename MatT::Scalar;
    const double va = std::real(V(0, 0)), vd = std::real(V(1, 1));
    const S b = V(0, 1);
    const double ab = std::abs(b);
    if (ab == 0.0) {
        if (va <= vd) {
            d[0] = va;
            d[1] = vd;
            U.setIdentity();
        } else {
            d[0] = vd;
            d[1] = va;
            U(0, 0) = S(0);
            U(0, 1) = S(1);
            U(1, 0) = S(1);
            U(1, 1) = S(0);
        }
        return;
    }
    const double half = 0.5 * (va - vd), t = 0.5 * (va + vd);
    const double r = std::hypot(half, ab);
    d[0] = t - r;
    d[1] = t + r;
    const double y = r - half;  // = d[1] - va >= 0, never cancels badly
    const double nv = std::hypot(ab, y);
    const S alpha = b / nv;
    const double bc = y / nv;
    U(0, 0) = S(-bc);
    U(0, 1) = alpha;
    U(1, 0) = Eigen::numext::conj(alpha);
    U(1, 1) = S(bc);
}

template <class MatT>
struct SolveState {
    MatT psi, dpsi, gram;
    double log_scale = 0.0;
};

/// Multichannel core, templated on the working matrix type so the class-1
/// (real symmetric) problem runs in real arithmetic and N = 2 runs on
/// fixed-size kernels. The per-cell eigenproblem is energy-independent and is
/// factored once per cell for all requested energies.
template <class MatT>
void solve_dense(const PotentialRealization& pot, const std::vector<double>& energies,
                 bool with_gram, std::vector<TransferSolution>& out) {
    using S = typename MatT::Scalar;
    constexpr bool kFixed2 = MatT::RowsAtCompileTime == 2;
    constexpr bool kRealScalar = !Eigen::NumTraits<S>::IsComplex;
    const int n = pot.n_channels;
    const std::size_t ne = energies.size();
    const double h = pot.h;

    std::vector<SolveState<MatT>> st(ne);
    for (auto& s : st) {
        s.psi = MatT::Zero(n, n);
        s.dpsi = MatT::Identity(n, n);
        if (with_gram) s.gram = MatT::Zero(n, n);
    }
    MatT V(n, n), U(n, n), phi(n, n), dphi(n, n), t1(n, n), t2(n, n), nphi(n, n), ndphi(n, n);
    std::vector<double> d(n);
    std::vector<CellCoefs> f(n);
    Eigen::SelfAdjointEigenSolver<MatT> es(n);

    for (const Mat& cell : pot.cells) {
        if constexpr (kRealScalar)
            V = cell.real();
        else
            V = cell;
        if constexpr (kFixed2) {
            eig_closed2<MatT>(V, d.data(), U);
        } else {
            es.compute(V);
            for (int i = 0; i < n; ++i) d[static_cast<std::size_t>(i)] = es.eigenvalues()[i];
            U = es.eigenvectors();
        }
        for (std::size_t e = 0; e < ne; ++e) {
            auto& s = st[e];
            for (int i = 0; i < n; ++i)
                f[static_cast<std::size_t>(i)] = cell_coefs(energies[e] - d[static_cast<std::size_t>(i)], h);
            phi.noalias() = U.adjoint() * s.psi;
            dphi.noalias() = U.adjoint() * s.dpsi;
            if (with_gram) {
                for (int i = 0; i < n; ++i) {
                    const CellCoefs& fi = f[static_cast<std::size_t>(i)];
                    t1.row(i) = fi.icc * phi.row(i) + fi.ics * dphi.row(i);
                    t2.row(i) = fi.ics * phi.row(i) + fi.iss * dphi.row(i);
                }
                s.gram.noalias() += phi.adjoint() * t1;
                s.gram.noalias() += dphi.adjoint() * t2;
            }
            for (int i = 0; i < n; ++i) {
                const CellCoefs& fi = f[static_cast<std::size_t>(i)];
                nphi.row(i) = fi.c * phi.row(i) + fi.s * dphi.row(i);
                ndphi.row(i) = fi.ms * phi.row(i) + fi.c * dphi.row(i);
            }
            s.psi.noalias() = U * nphi;
            s.dpsi.noalias() = U * ndphi;
            const double mx = std::max(s.psi.cwiseAbs().maxCoeff(), s.dpsi.cwiseAbs().maxCoeff());
            if (!(mx < kRenormThreshold)) {
                if (!std::isfinite(mx)) throw NumericalError("transfer_solve: non-finite wave frame");
                s.psi /= mx;
                s.dpsi /= mx;
                if (with_gram) s.gram /= mx * mx;
                s.log_scale += std::log(mx);
            }
        }
    }
    for (std::size_t e = 0; e < ne; ++e) {
        if constexpr (kRealScalar) {
            out[e].psi = st[e].psi.template cast<Complex>();
            out[e].dpsi = st[e].dpsi.template cast<Complex>();
            if (with_gram) out[e].gram = (0.5 * (st[e].gram + st[e].gram.adjoint())).template cast<Complex>();
        } else {
            out[e].psi = st[e].psi;
            out[e].dpsi = st[e].dpsi;
            if (with_gram) out[e].gram = 0.5 * (st[e].gram + st[e].gram.adjoint());
        }
        out[e].log_scale = st[e].log_scale;
        out[e].has_gram = with_gram;
    }
}

/// S = (k psi - i dpsi)(k psi + i dpsi)^{-1}. For Hermitian cells and real
/// energy the denominator is provably nonsingular (its null vector would make
/// the Hermitian form psi^dag dpsi take an imaginary value), so this form is
/// stable even where psi itself is singular. Any common rescaling of the
/// frame cancels.
Mat smatrix_core(const TransferSolution& sol, double k) {
    const Complex i1(0.0, 1.0);
    Mat a = k * sol.psi + i1 * sol.dpsi;
    Mat b = k * sol.psi - i1 * sol.dpsi;
    return a.transpose().partialPivLu().solve(b.transpose()).transpose();
}

double unitary_defect(const Mat& s) {
    const int n = static_cast<int>(s.rows());
    return (s.adjoint() * s - Mat::Identity(n, n)).norm();
}

std::vector<double> ws_energies(double base, double de, bool richardson) {
    std::vector<double> es = {base - de, base + de, base};
    if (richardson) {
        es.push_back(base - 0.5 * de);
        es.push_back(base + 0.5 * de);
    }
    return es;
}

}  // namespace

void PotentialRealization::validate() const {
    check_dim(n_channels, "PotentialRealization");
    if (!(h > 0.0) || !std::isfinite(h))
        throw std::invalid_argument("PotentialRealization: cell width must be > 0");
    const int n = n_channels;
    for (const Mat& cell : cells) {
        if (cell.rows() != n || cell.cols() != n)
            throw std::invalid_argument("PotentialRealization: cell shape mismatch");
        double mx = 0.0;
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) mx = std::max(mx, std::abs(cell(r, c)));
        if (!std::isfinite(mx)) throw std::invalid_argument("PotentialRealization: non-finite cell entry");
        const double tol = 1e-12 * (1.0 + mx);
        for (int r = 0; r < n; ++r)
            for (int c = r; c < n; ++c) {
                if (std::abs(cell(r, c) - std::conj(cell(c, r))) > tol)
                    throw std::invalid_argument("PotentialRealization: cell is not Hermitian");
                if (beta.beta == 1 &&
                    (cell(r, c).imag() != 0.0 || cell(c, r).imag() != 0.0))
                    throw std::invalid_argument(
                        "PotentialRealization: class-1 cells must be real symmetric");
            }
    }
}

PotentialRealization build_potential(const ModelParams& params, double h, double length,
                                     RngStream rng) {
    if (!(h > 0.0) || !std::isfinite(h))
        throw std::invalid_argument("build_potential: cell width must be > 0");
    double bound = 0.05 / params.k;
    if (params.sigma > 0.0) bound = std::min(bound, params.xi() / 1e4);
    if (h > bound * (1.0 + 1e-12))
        throw std::invalid_argument(
            "build_potential: cell width " + std::to_string(h) +
            " too coarse; need h <= min(0.05/k, xi/1e4) = " + std::to_string(bound));
    if (!(length > 0.0) || !std::isfinite(length))
        throw std::invalid_argument("build_potential: length must be > 0");
    const auto m = static_cast<long long>(std::llround(length / h));
    if (m < 1 || std::abs(static_cast<double>(m) * h - length) > 1e-9 * length)
        throw std::invalid_argument("build_potential: length must be a whole multiple of the cell width");

    PotentialRealization pot;
    pot.n_channels = params.n_channels;
    pot.beta = params.beta;
    pot.h = h;
    pot.master_seed = rng.master_seed();
    pot.stream_id = rng.stream_id();
    pot.cells.resize(static_cast<std::size_t>(m));
    if (params.sigma == 0.0) {
        for (Mat& cell : pot.cells) cell = Mat::Zero(params.n_channels, params.n_channels);
        return pot;
    }
    const NoiseSpec spec(params.n_channels, params.beta, params.sigma / h);
    for (Mat& cell : pot.cells) fill_increment(spec, rng, cell);
    return pot;
}

void save_potential_csv(const PotentialRealization& pot, const std::string& path) {
    pot.validate();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_potential_csv: cannot open " + path);
    char buf[160];
    out << "n_channels,beta,h,length,master_seed,stream_id\n";
    std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%llu,%llu\n", pot.n_channels, pot.beta.beta,
                  pot.h, pot.length(), static_cast<unsigned long long>(pot.master_seed),
                  static_cast<unsigned long long>(pot.stream_id));
    out << buf;
    out << "cell,row,col,re,im\n";
    const int n = pot.n_channels;
    for (std::size_t j = 0; j < pot.cells.size(); ++j)
        for (int r = 0; r < n; ++r)
            for (int c = r; c < n; ++c) {
                const Complex v = pot.cells[j](r, c);
                std::snprintf(buf, sizeof(buf), "%zu,%d,%d,%.17g,%.17g\n", j, r, c, v.real(),
                              v.imag());
                out << buf;
            }
    if (!out) throw std::runtime_error("save_potential_csv: write failed for " + path);
}

PotentialRealization load_potential_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("load_potential_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != "n_channels,beta,h,length,master_seed,stream_id")
        throw std::invalid_argument("load_potential_csv: bad header in " + path);
    if (!std::getline(in, line)) throw std::invalid_argument("load_potential_csv: missing metadata row");
    int n = 0, beta_int = 0;
    double h = 0.0, length = 0.0;
    unsigned long long seed = 0, stream = 0;
    if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf,%llu,%llu", &n, &beta_int, &h, &length, &seed,
                    &stream) != 6)
        throw std::invalid_argument("load_potential_csv: malformed metadata row");
    if (!std::getline(in, line) || line != "cell,row,col,re,im")
        throw std::invalid_argument("load_potential_csv: bad column header");
    check_dim(n, "load_potential_csv");
    if (!(h > 0.0) || !(length > 0.0))
        throw std::invalid_argument("load_potential_csv: non-positive geometry");
    const auto m = static_cast<long long>(std::llround(length / h));
    if (m < 1 || std::abs(static_cast<double>(m) * h - length) > 1e-9 * length)
        throw std::invalid_argument("load_potential_csv: length is not a whole multiple of h");

    PotentialRealization pot;
    pot.n_channels = n;
    pot.beta = SymmetryClass(beta_int);
    pot.h = h;
    pot.master_seed = seed;
    pot.stream_id = stream;
    pot.cells.assign(static_cast<std::size_t>(m), Mat::Zero(n, n));
    const long long expected_rows = m * n * (n + 1) / 2;
    long long rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        unsigned long long j = 0;
        int r = 0, c = 0;
        double re = 0.0, im = 0.0;
        if (std::sscanf(line.c_str(), "%llu,%d,%d,%lf,%lf", &j, &r, &c, &re, &im) != 5)
            throw std::invalid_argument("load_potential_csv: malformed data row: " + line);
        if (j >= pot.cells.size() || r < 0 || c < r || c >= n)
            throw std::invalid_argument("load_potential_csv: index out of range in row: " + line);
        pot.cells[j](r, c) = Complex(re, im);
        if (c != r) pot.cells[j](c, r) = Complex(re, -im);
        ++rows;
    }
    if (rows != expected_rows)
        throw std::invalid_argument("load_potential_csv: expected " + std::to_string(expected_rows) +
                                    " data rows, found " + std::to_string(rows));
    pot.validate();
    return pot;
}

std::vector<TransferSolution> transfer_solve_multi(const PotentialRealization& pot,
                                                   const std::vector<double>& energies,
                                                   bool with_gram) {
    pot.validate();
    if (energies.empty()) throw std::invalid_argument("transfer_solve: no energies given");
    for (double e : energies)
        if (!(e > 0.0) || !std::isfinite(e))
            throw std::invalid_argument("transfer_solve: energy must be > 0 (all channels open)");

    std::vector<TransferSolution> out(energies.size());
    const bool real_path = pot.beta.beta == 1;
    if (pot.n_channels == 1)
        solve_scalar(pot, energies, with_gram, out);
    else if (pot.n_channels == 2 && real_path)
        solve_dense<Eigen::Matrix2d>(pot, energies, with_gram, out);
    else if (pot.n_channels == 2)
        solve_dense<Eigen::Matrix2cd>(pot, energies, with_gram, out);
    else if (real_path)
        solve_dense<Eigen::MatrixXd>(pot, energies, with_gram, out);
    else
        solve_dense<Eigen::MatrixXcd>(pot, energies, with_gram, out);
    return out;
}

TransferSolution transfer_solve(const PotentialRealization& pot, double energy, bool with_gram) {
    return transfer_solve_multi(pot, {energy}, with_gram)[0];
}

UnitaryMatrix smatrix(const PotentialRealization& pot, double energy, double* energy_used) {
    Mat s = smatrix_core(transfer_solve(pot, energy), std::sqrt(energy));
    if (unitary_defect(s) <= kAcceptResidual) {
        if (energy_used) *energy_used = energy;
        return UnitaryMatrix::require(s, kAcceptResidual);
    }
    const double shifted = energy * (1.0 + kRetryShift);
    s = smatrix_core(transfer_solve(pot, shifted), std::sqrt(shifted));
    const double defect = unitary_defect(s);
    if (defect <= kRetryResidual) {
        if (energy_used) *energy_used = shifted;
        return UnitaryMatrix::require(s, kRetryResidual);
    }
    throw NumericalError("smatrix: unitarity defect " + std::to_string(defect) +
                         " persists after energy nudge");
}

WignerSmithResult wigner_smith(const PotentialRealization& pot, double energy, double delta_energy,
                               bool richardson) {
    if (!(energy > 0.0) || !std::isfinite(energy))
        throw std::invalid_argument("wigner_smith: energy must be > 0");
    const double de = delta_energy == 0.0 ? 1e-6 * energy : delta_energy;
    const double ratio = de / energy;
    if (!(ratio >= 1e-8 && ratio <= 1e-4))
        throw std::invalid_argument("wigner_smith: delta_energy / energy must lie in [1e-8, 1e-4]");

    const int n = pot.n_channels;
    std::vector<Mat> s;
    double base = energy;
    for (int attempt = 0;; ++attempt) {
        const std::vector<double> es = ws_energies(base, de, richardson);
        const std::vector<TransferSolution> sols = transfer_solve_multi(pot, es, false);
        s.clear();
        double worst = 0.0;
        for (std::size_t i = 0; i < sols.size(); ++i) {
            s.push_back(smatrix_core(sols[i], std::sqrt(es[i])));
            worst = std::max(worst, unitary_defect(s.back()));
        }
        if (worst <= kRetryResidual) break;
        if (attempt == 1)
            throw NumericalError("wigner_smith: unitarity defect " + std::to_string(worst) +
                                 " persists after energy nudge");
        base = energy * (1.0 + kRetryShift);
    }

    const Mat& s_minus = s[0];
    const Mat& s_plus = s[1];
    const Mat& s0 = s[2];
    const double diff_norm = (s_plus - s_minus).norm();
    if (diff_norm < 64.0 * std::numeric_limits<double>::epsilon() * std::sqrt(static_cast<double>(n)))
        throw NumericalError("wigner_smith: finite difference below roundoff; increase delta_energy");

    const Complex pref(0.0, -0.5 / de);
    Mat q_raw = pref * (s0.adjoint() * (s_plus - s_minus));
    const double scale = std::max(q_raw.norm(), std::numeric_limits<double>::min());
    WignerSmithResult out;
    out.hermiticity_residual = (q_raw - q_raw.adjoint()).norm() / scale;
    out.q = HermitianMatrix::project(q_raw);
    out.energy_used = base;
    out.fd_error_estimate = std::numeric_limits<double>::quiet_NaN();
    if (richardson) {
        const Complex pref_half(0.0, -1.0 / de);
        const Mat q_half = pref_half * (s0.adjoint() * (s[4] - s[3]));
        const HermitianMatrix qh = HermitianMatrix::project(q_half);
        out.fd_error_estimate = (4.0 / 3.0) * (qh.mat() - out.q.mat()).norm() /
                                std::max(out.q.mat().norm(), std::numeric_limits<double>::min());
    }
    return out;
}

KreinFriedelReport krein_friedel_report(const PotentialRealization& pot, double energy,
                                        double delta_energy) {
    const WignerSmithResult ws = wigner_smith(pot, energy, delta_energy, false);
    const double e_used = ws.energy_used;
    const double k = std::sqrt(e_used);
    const int n = pot.n_channels;

    const TransferSolution sol = transfer_solve(pot, e_used, true);
    const Mat s = smatrix_core(sol, k);
    const double defect = unitary_defect(s);
    if (defect > kRetryResidual)
        throw NumericalError("krein_friedel: unitarity defect " + std::to_string(defect));

    // Scattering states with unit incoming flux are Psi_D * A with
    // A = Psi_D(L)^{-1} (1 + S) / sqrt(4 pi k); the stored rescaling of the
    // frame cancels between psi^{-1} and the overlap matrix.
    const Mat w = sol.psi.partialPivLu().solve(Mat::Identity(n, n) + s);
    const Mat lhs = (w.adjoint() * sol.gram * w) / (4.0 * kPi * k);
    const Complex quarter(0.0, 4.0 * e_used);
    const Mat rhs = (ws.q.mat() + (s - s.adjoint()) / quarter) / (2.0 * kPi);

    KreinFriedelReport rep;
    rep.lhs = lhs;
    rep.rhs = rhs;
    const double rhs_norm = std::max(rhs.norm(), std::numeric_limits<double>::min());
    rep.residual = (lhs - rhs).norm() / rhs_norm;
    const double tr_rhs = std::abs(rhs.trace());
    rep.trace_residual = std::abs(lhs.trace() - rhs.trace()) /
                         std::max(tr_rhs, std::numeric_limits<double>::min());
    return rep;
}

double krein_friedel_residual(const PotentialRealization& pot, double energy, double delta_energy) {
    return krein_friedel_report(pot, energy, delta_energy).residual;
}

}  // namespace wiredelay
