#include "wiredelay/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "wiredelay/linalg.hpp"
#include "wiredelay/parallel.hpp"
#include "wiredelay/rmt.hpp"
#include "wiredelay/stats.hpp"

namespace wiredelay {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kNegativeFloor = -1e-3;
constexpr int kFilterStride = 4;
constexpr double kCarrierDepth = 1.0;  ///< pole depth of the smooth reference carrier

struct Monitors {
    double mass = 0.0;
    double defect = 0.0;
    double worst_im = 0.0;
};

/// Monotonized-central slope limiter, applied to real and imaginary parts
/// separately: zero across extrema, else the smallest of the one-sided
/// differences (doubled) and the centered one.
double mc_limit(double a, double b) {
    if (a * b <= 0.0) return 0.0;
    const double c = 0.5 * (a + b);
    const double m = std::min({std::abs(2.0 * a), std::abs(2.0 * b), std::abs(c)});
    return c > 0.0 ? m : -m;
}

/// One march of the resolvent flow at a fixed imaginary offset, on the
/// compactified coordinate theta with lambda = c0 + a tan(theta/2). The
/// unknown is the residual R = (g - c) dz/dtheta against the smooth carrier
/// c(z) = 1/(z + i d): the carrier has the same unit mass and the same 1/z
/// decay as the initial resolvent, but its pole sits a depth d below the
/// line, so the residual never carries a feature sharper than d near the
/// origin (subtracting 1/z itself would plant an eps-wide spike there).
/// R obeys the exact conservation law  d_s R = d_theta Phi  on the periodic
/// circle, with
///   Phi = Phi(c) + A R - beta (z R / z_theta)^2,
///   A = (2 beta z - 1 - 2 beta z^2 c) / z_theta,
/// an algebraic identity with the original flux in which every coefficient
/// stays finite on the closed circle; at the point at infinity the flux
/// reduces to the constant beta. Cells update as
/// R_j += (ds/dtheta)(F_{j+1/2} - F_{j-1/2}) with a limited second-order
/// reconstruction and an interface dissipation scaled by the modulus of the
/// local transport speed dPhi/dR, under a CFL-limited step.
///
/// The true resolvent is analytic above the line Im z = eps, which on the
/// circle means its Fourier series carries non-negative frequencies only.
/// The discrete march manufactures small negative-frequency content, which
/// the quasilinear flow amplifies at a rate proportional to the wavenumber;
/// periodically projecting back onto the non-negative-frequency class (the
/// identity on the true solution) removes it. The projection leaves the
/// mean mode -- and with it the conserved total mass -- untouched.
class March {
  public:
    March(const ResolventGridConfig& cfg, double eps_line, double beta, double nu)
        : m_(static_cast<std::size_t>(cfg.n_theta)),
          dth_(2.0 * kPi / static_cast<double>(cfg.n_theta)),
          a_(cfg.map_scale),
          c0_(cfg.map_center),
          eps_(eps_line),
          beta_(beta),
          nu_(nu),
          cfl_(cfg.cfl),
          cap_(8.0 / eps_line),
          center_(cfg.map_center, eps_line) {
        inv_zt_c_.resize(m_);
        car_c_.resize(m_);
        acoef_c_.resize(m_);
        zr_c_.resize(m_);
        zz_c_.resize(m_);
        lam_c_.resize(m_);
        w_c_.resize(m_);
        inv_zt_if_.resize(m_);
        phic_if_.resize(m_);
        acoef_if_.resize(m_);
        zr_if_.resize(m_);
        tsub_if_.resize(m_);
        R_.resize(m_);
        for (std::size_t j = 0; j < m_; ++j) {
            const double th = -kPi + (static_cast<double>(j) + 0.5) * dth_;
            const double ct = std::cos(th);
            const double st = std::sin(th);
            const double h = 1.0 + ct;  // = 2 cos^2(theta/2) > 0 at cell centers
            const Complex z = center_ + Complex(a_ * st / h, 0.0);
            const Complex car = carrier(z);
            car_c_[j] = car;
            inv_zt_c_[j] = h / a_;
            acoef_c_[j] = (2.0 * beta_ * z - 1.0 - 2.0 * beta_ * z * z * car) * (h / a_);
            zr_c_[j] = center_ * (h / a_) + st;
            const Complex zc = center_ * std::cos(0.5 * th) + a_ * std::sin(0.5 * th);
            zz_c_[j] = 2.0 * zc * zc / a_;
            lam_c_[j] = z.real();
            w_c_[j] = dth_ * a_ / h;
            max_zr2_ = std::max(max_zr2_, std::norm(zr_c_[j]));
            // g(z; 0) = 1/z, i.e. R(0) = (1/z - c) dz/dtheta, with
            // 1/z - c = i d / (z (z + i d)).
            R_[j] = Complex(0.0, kCarrierDepth) / (z * (z + Complex(0.0, kCarrierDepth))) *
                    (a_ / h);
        }
        for (std::size_t i = 0; i < m_; ++i) {
            if (i + 1 == m_) {  // interface at theta = pi: the point at infinity
                phic_if_[i] = Complex(beta_, 0.0);
                inv_zt_if_[i] = 0.0;
                acoef_if_[i] = Complex(0.0, 0.0);
                zr_if_[i] = Complex(0.0, 0.0);
                tsub_if_[i] = Complex(1.0, 0.0);
                continue;
            }
            const double th = -kPi + static_cast<double>(i + 1) * dth_;
            const double ct = std::cos(th);
            const double st = std::sin(th);
            const double h = 1.0 + ct;
            const Complex z = center_ + Complex(a_ * st / h, 0.0);
            const Complex car = carrier(z);
            phic_if_[i] = 2.0 * (beta_ * z - 0.5) * car - beta_ * z * z * car * car;
            inv_zt_if_[i] = h / a_;
            acoef_if_[i] = (2.0 * beta_ * z - 1.0 - 2.0 * beta_ * z * z * car) * (h / a_);
            zr_if_[i] = center_ * (h / a_) + st;
            const Complex zd = z + Complex(0.0, kCarrierDepth);
            tsub_if_[i] = (z * z + 2.0 * Complex(0.0, kCarrierDepth) * z) / (zd * zd);
        }
        stage_.resize(m_);
        flux_.resize(m_);
        slope_.resize(m_);
        spec_.resize(m_);
    }

    void advance_to(double target) {
        while (s_ < target - 1e-14) {
            const double ds = std::min(max_step(), target - s_);
            step(ds);
            s_ += ds;
            if (++since_filter_ >= kFilterStride) {
                filter();
                since_filter_ = 0;
            }
        }
        filter();  // projection is the identity on the analytic class
        since_filter_ = 0;
    }

    /// g on arbitrary lambda nodes of the line Im z = eps: the residual is
    /// interpolated in theta (periodic cubic), the carrier part is exact.
    [[nodiscard]] std::vector<Complex> sample(const std::vector<double>& lambdas) const {
        std::vector<Complex> out(lambdas.size());
        for (std::size_t u = 0; u < lambdas.size(); ++u) {
            const double lam = lambdas[u];
            const double th = 2.0 * std::atan((lam - c0_) / a_);
            const double inv_zt = (1.0 + std::cos(th)) / a_;
            out[u] = carrier(Complex(lam, eps_)) + sample_residual(th) * inv_zt;
        }
        return out;
    }

    [[nodiscard]] Monitors monitors() const {
        Complex sum(0.0, 0.0);
        double worst = -1e300;
        for (std::size_t j = 0; j < m_; ++j) {
            sum += R_[j];
            worst = std::max(worst, cell_im_g(j));
        }
        Monitors mon;
        mon.mass = 1.0 - (dth_ / kPi) * sum.imag();
        mon.defect = std::abs(mon.mass - 1.0);
        mon.worst_im = worst;
        return mon;
    }

    [[nodiscard]] std::size_t cells() const { return m_; }
    [[nodiscard]] double cell_lambda(std::size_t j) const { return lam_c_[j]; }
    [[nodiscard]] double cell_measure(std::size_t j) const { return w_c_[j]; }
    [[nodiscard]] double cell_im_g(std::size_t j) const {
        return (car_c_[j] + R_[j] * inv_zt_c_[j]).imag();
    }

  private:
    [[nodiscard]] Complex carrier(const Complex& z) const {
        return 1.0 / (z + Complex(0.0, kCarrierDepth));
    }
    [[nodiscard]] Complex sample_residual(double theta) const {
        const double x = (theta + kPi) / dth_ - 0.5;  // cell j sits at x = j
        const double fl = std::floor(x);
        const auto j1 = static_cast<long>(fl);
        const double t = x - fl;
        const auto at = [&](long j) {
            const long mm = static_cast<long>(m_);
            return R_[static_cast<std::size_t>(((j % mm) + mm) % mm)];
        };
        const Complex p0 = at(j1 - 1), p1 = at(j1), p2 = at(j1 + 1), p3 = at(j1 + 2);
        return 0.5 * (2.0 * p1 + (-p0 + p2) * t + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * (t * t) +
                      (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * (t * t * t));
    }

    [[nodiscard]] double max_step() const {
        double speed = 1e-12;
        for (std::size_t j = 0; j < m_; ++j)
            speed = std::max(speed,
                             std::abs(acoef_c_[j] - 2.0 * beta_ * zr_c_[j] * zr_c_[j] * R_[j]));
        double ds = cfl_ * dth_ / speed;
        if (nu_ > 0.0) ds = std::min(ds, cfl_ * dth_ * dth_ / (2.0 * nu_ * max_zr2_ + 1e-300));
        return ds;
    }

    /// Interface fluxes of the state `in`, left in flux_ (entry i = interface
    /// between cells i and i+1 mod m). The march reads d_s R = +d_theta F, so
    /// the dissipative term enters with the opposite sign to the textbook
    /// right-moving convention.
    void compute_fluxes(const std::vector<Complex>& in) {
        for (std::size_t j = 0; j < m_; ++j) {
            const std::size_t jp = (j + 1 == m_) ? 0 : j + 1;
            const std::size_t jm = (j == 0) ? m_ - 1 : j - 1;
            const Complex fwd = in[jp] - in[j];
            const Complex bwd = in[j] - in[jm];
            slope_[j] = Complex(mc_limit(fwd.real(), bwd.real()), mc_limit(fwd.imag(), bwd.imag()));
        }
        for (std::size_t i = 0; i < m_; ++i) {
            const std::size_t ip = (i + 1 == m_) ? 0 : i + 1;
            const Complex gl = in[i] + 0.5 * slope_[i];
            const Complex gr = in[ip] - 0.5 * slope_[ip];
            const Complex zr2 = zr_if_[i] * zr_if_[i];
            const auto phi = [&](const Complex& r) {
                return phic_if_[i] + acoef_if_[i] * r - beta_ * zr2 * r * r;
            };
            const double al = std::abs(acoef_if_[i] - 2.0 * beta_ * zr2 * gl);
            const double ar = std::abs(acoef_if_[i] - 2.0 * beta_ * zr2 * gr);
            Complex f = 0.5 * (phi(gl) + phi(gr)) + 0.5 * std::max(al, ar) * (gr - gl);
            if (nu_ > 0.0)
                f += nu_ * (tsub_if_[i] +
                            inv_zt_if_[i] * (zz_c_[ip] * in[ip] - zz_c_[i] * in[i]) / dth_);
            flux_[i] = f;
        }
    }

    void step(double ds) {
        const double r = ds / dth_;
        compute_fluxes(R_);
        for (std::size_t j = 0; j < m_; ++j) {
            const std::size_t jm = (j == 0) ? m_ - 1 : j - 1;
            stage_[j] = R_[j] + r * (flux_[j] - flux_[jm]);
        }
        compute_fluxes(stage_);
        for (std::size_t j = 0; j < m_; ++j) {
            const std::size_t jm = (j == 0) ? m_ - 1 : j - 1;
            R_[j] = 0.5 * R_[j] + 0.5 * (stage_[j] + r * (flux_[j] - flux_[jm]));
            if (std::abs(R_[j]) * inv_zt_c_[j] > cap_)
                throw NumericalError(
                    "solve_resolvent_pde: solution steepened beyond the grid resolution at s = " +
                    std::to_string(s_) + "; refine n_theta or increase eps");
        }
    }

    /// Project onto the non-negative-frequency class: discrete Fourier bins
    /// m/2 .. m-1 alias the negative wavenumbers (and the ambiguous Nyquist
    /// mode), which an upper-half-plane-analytic residual cannot carry.
    void filter() {
        fft_.fwd(spec_, R_);
        for (std::size_t q = m_ / 2; q < m_; ++q) spec_[q] = Complex(0.0, 0.0);
        fft_.inv(R_, spec_);
    }

    std::size_t m_;
    double dth_, a_, c0_, eps_, beta_, nu_, cfl_, cap_;
    Complex center_;
    std::vector<double> inv_zt_c_, lam_c_, w_c_, inv_zt_if_;
    std::vector<Complex> car_c_, acoef_c_, zr_c_, zz_c_, phic_if_, acoef_if_, zr_if_, tsub_if_;
    double max_zr2_ = 0.0;
    std::vector<Complex> R_, stage_, flux_, slope_, spec_;
    double s_ = 0.0;
    int since_filter_ = 0;
    Eigen::FFT<double> fft_;
};

}  // namespace

void ResolventGridConfig::validate() const {
    if (!std::isfinite(lambda_min) || !std::isfinite(lambda_max) || !(lambda_min < lambda_max))
        throw std::invalid_argument("ResolventGridConfig: need lambda_min < lambda_max");
    if (n_lambda < 64) throw std::invalid_argument("ResolventGridConfig: n_lambda must be >= 64");
    if (!(eps > 0.0) || eps > 0.1)
        throw std::invalid_argument("ResolventGridConfig: eps must lie in (0, 0.1]");
    if (n_theta < 256 || n_theta % 2 != 0)
        throw std::invalid_argument("ResolventGridConfig: n_theta must be even and >= 256");
    if (!(map_scale > 0.0) || !std::isfinite(map_scale) || !std::isfinite(map_center) ||
        std::abs(map_center) > 50.0)
        throw std::invalid_argument("ResolventGridConfig: map_scale must be > 0 and map_center sane");
    const double cell0 = (2.0 * kPi / n_theta) * (map_scale * map_scale + map_center * map_center) /
                         (2.0 * map_scale);
    if (cell0 > eps / 6.0 + 1e-15)
        throw std::invalid_argument(
            "ResolventGridConfig: cell width near the origin must be <= eps/6 so the half-offset "
            "line is resolved; raise n_theta or eps, or adjust the map");
    if (!(s_max > 0.0)) throw std::invalid_argument("ResolventGridConfig: s_max must be > 0");
    if (n_snapshots < 2) throw std::invalid_argument("ResolventGridConfig: n_snapshots must be >= 2");
    if (!(cfl > 0.0) || cfl >= 1.0)
        throw std::invalid_argument("ResolventGridConfig: cfl must lie in (0, 1)");
}

int ResolventField::snapshot_index(double s) const {
    for (std::size_t j = 0; j < s_grid.size(); ++j)
        if (std::abs(s_grid[j] - s) <= 1e-9 * std::max(1.0, std::abs(s)))
            return static_cast<int>(j);
    throw std::invalid_argument("ResolventField: length " + std::to_string(s) +
                                " is not a stored snapshot");
}

ResolventField solve_resolvent_pde(const ResolventGridConfig& config, SymmetryClass beta,
                                   int n_for_subleading) {
    config.validate();
    if (n_for_subleading < 0)
        throw std::invalid_argument("solve_resolvent_pde: n_for_subleading must be >= 0");
    const double nu =
        n_for_subleading > 0 ? (2.0 - beta.beta) / static_cast<double>(n_for_subleading) : 0.0;

    ResolventField field;
    field.eps = config.eps;
    field.n_subleading = n_for_subleading;
    field.lambda_grid.resize(static_cast<std::size_t>(config.n_lambda));
    const double dl = (config.lambda_max - config.lambda_min) / (config.n_lambda - 1);
    for (int i = 0; i < config.n_lambda; ++i)
        field.lambda_grid[static_cast<std::size_t>(i)] = config.lambda_min + i * dl;
    field.s_grid.resize(static_cast<std::size_t>(config.n_snapshots));
    for (int j = 0; j < config.n_snapshots; ++j)
        field.s_grid[static_cast<std::size_t>(j)] =
            config.s_max * static_cast<double>(j) / (config.n_snapshots - 1);

    March full(config, config.eps, beta.beta, nu);
    March half(config, 0.5 * config.eps, beta.beta, nu);
    for (double s : field.s_grid) {
        full.advance_to(s);
        half.advance_to(s);
        field.g.push_back(full.sample(field.lambda_grid));
        field.g_half.push_back(half.sample(field.lambda_grid));
        const Monitors mon = full.monitors();
        field.mass.push_back(mon.mass);
        field.scheme_defect.push_back(mon.defect);
        field.worst_im.push_back(std::max(mon.worst_im, half.monitors().worst_im));

        // Whole-line functionals of the extrapolated density, evaluated on
        // the circle where the quadrature covers the entire real axis.
        double m1 = 0.0;
        double l1 = 0.0;
        for (std::size_t j = 0; j < full.cells(); ++j) {
            const double rho = (2.0 * half.cell_im_g(j) - full.cell_im_g(j)) * (-1.0 / kPi);
            const double lam = full.cell_lambda(j);
            const double w = full.cell_measure(j);
            m1 += lam * rho * w;
            l1 += std::abs(rho - stationary_density(beta, lam)) * w;
        }
        field.first_moment.push_back(m1);
        field.stationary_l1.push_back(l1);
    }
    return field;
}

DensityCurve density_from_resolvent(const ResolventField& field, double s) {
    const auto j = static_cast<std::size_t>(field.snapshot_index(s));
    const std::size_t m = field.lambda_grid.size();
    DensityCurve curve;
    curve.lambda_grid = field.lambda_grid;
    curve.s = s;
    curve.rho.resize(m);
    double worst = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double rho =
            (2.0 * field.g_half[j][i].imag() - field.g[j][i].imag()) * (-1.0 / kPi);
        worst = std::min(worst, rho);
        curve.rho[i] = std::max(rho, 0.0);
    }
    if (worst < kNegativeFloor)
        throw NumericalError("density_from_resolvent: negative density " + std::to_string(worst) +
                             " beyond tolerance (instability or sign error)");
    const double dl = curve.lambda_grid[1] - curve.lambda_grid[0];
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        acc += ((i == 0 || i + 1 == m) ? 0.5 : 1.0) * curve.rho[i];
    curve.mass = acc * dl;
    return curve;
}

DensityCurve empirical_density(const ModelParams& params, double length, std::size_t n_draws,
                               const SdeConfig& cfg, const StreamKey& streams, double lambda_min,
                               double lambda_max, int bins, int workers) {
    if (params.n_channels < 16 || params.n_channels > 64)
        throw std::invalid_argument("empirical_density: channel count must lie in [16, 64]");
    if (n_draws * static_cast<std::size_t>(params.n_channels) < 10000)
        throw std::invalid_argument("empirical_density: need at least 1e4 eigenvalues");
    if (bins < 8) throw std::invalid_argument("empirical_density: need at least 8 bins");
    if (!(lambda_max > lambda_min))
        throw std::invalid_argument("empirical_density: empty window");
    cfg.validate();

    const double x_hat = length / params.xi();
    const auto n = static_cast<std::size_t>(params.n_channels);
    std::vector<std::vector<double>> slots(n_draws);
    parallel_for_indexed(n_draws, workers, [&](std::uint64_t t) {
        const Mat q = exp_functional_raw(params, x_hat, cfg, streams.at(t));
        std::vector<double> eigs = eigvals_hermitian(HermitianMatrix::project(q));
        for (double& e : eigs) e *= static_cast<double>(params.n_channels);
        slots[t] = std::move(eigs);
    });

    Histogram hist(lambda_min, lambda_max, bins);
    for (std::size_t t = 0; t < n_draws; ++t) {
        if (slots[t].size() != n)
            throw NumericalError("empirical_density: draw produced a wrong-sized spectrum");
        for (double e : slots[t]) hist.add(e);
    }

    DensityCurve curve;
    curve.s = static_cast<double>(params.n_channels) * x_hat;
    curve.rho = hist.density();
    curve.rho_std_error = hist.density_std_error();
    curve.lambda_grid.resize(static_cast<std::size_t>(bins));
    for (int b = 0; b < bins; ++b)
        curve.lambda_grid[static_cast<std::size_t>(b)] = hist.bin_center(b);
    double acc = 0.0;
    for (double r : curve.rho) acc += r;
    curve.mass = acc * hist.bin_width();
    return curve;
}

double density_l1_distance(const DensityCurve& a, const DensityCurve& b) {
    if (a.lambda_grid.size() != b.lambda_grid.size())
        throw std::invalid_argument("density_l1_distance: grid size mismatch");
    for (std::size_t i = 0; i < a.lambda_grid.size(); ++i)
        if (std::abs(a.lambda_grid[i] - b.lambda_grid[i]) > 1e-9)
            throw std::invalid_argument("density_l1_distance: grids differ");
    const double dl = a.lambda_grid[1] - a.lambda_grid[0];
    double acc = 0.0;
    for (std::size_t i = 0; i < a.rho.size(); ++i) {
        const double w = (i == 0 || i + 1 == a.rho.size()) ? 0.5 : 1.0;
        acc += w * std::abs(a.rho[i] - b.rho[i]);
    }
    return acc * dl;
}

}  // namespace wiredelay
