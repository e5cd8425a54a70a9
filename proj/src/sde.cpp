#include "wiredelay/sde.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/QR>

#include "wiredelay/noise.hpp"

namespace wiredelay {

namespace {

std::int64_t steps_for(double x_end, double dx, const char* who) {
    if (!(x_end >= 0.0) || !std::isfinite(x_end))
        throw std::invalid_argument(std::string(who) + ": length must be finite and >= 0");
    const std::int64_t n = static_cast<std::int64_t>(std::llround(x_end / dx));
    if (std::abs(static_cast<double>(n) * dx - x_end) > 1e-9 * (x_end + dx))
        throw std::invalid_argument(std::string(who) +
                                    ": length must be an integer multiple of cfg.dx");
    return n;
}

double unitary_residual(const Mat& m) {
    const int n = static_cast<int>(m.rows());
    return (m.adjoint() * m - Mat::Identity(n, n)).norm();
}

/// dM = a_strat M dx + dB M with Hermitian isotropic dB. In the Ito scheme
/// the drift picks up the quadratic modulus of the noise, dB dB = mu_noise dx,
/// scaled by the square of the test-hook noise amplitude.
class DecayStepper {
  public:
    DecayStepper(int n, SymmetryClass beta, const SdeConfig& cfg, double a_strat, double mu_noise)
        : spec_(n, beta, cfg.dx),
          scheme_(cfg.scheme),
          scale_(cfg.noise_scale),
          a_strat_(a_strat),
          a_ito_(a_strat + 0.5 * cfg.noise_scale * cfg.noise_scale * mu_noise) {}

    void step(Mat& m, RngStream& rng) {
        fill_increment(spec_, rng, db_);
        if (scale_ != 1.0) db_ *= scale_;
        const double dx = spec_.dx;
        if (scheme_ == SdeScheme::ItoEuler) {
            g0_.noalias() = db_ * m;
            m += (a_ito_ * dx) * m + g0_;
            return;
        }
        g0_.noalias() = db_ * m;
        pred_ = (1.0 + a_strat_ * dx) * m + g0_;
        g1_.noalias() = db_ * pred_;
        m += (0.5 * a_strat_ * dx) * (m + pred_) + 0.5 * (g0_ + g1_);
    }

  private:
    NoiseSpec spec_;
    SdeScheme scheme_;
    double scale_, a_strat_, a_ito_;
    Mat db_, g0_, g1_, pred_;
};

/// Same drift structure driven by an independent-entry (Ginibre) increment;
/// the Ito correction is dChi dChi = dx 1 for the real class and 0 for the
/// complex class.
class GinibreStepper {
  public:
    GinibreStepper(int n, SymmetryClass beta, const SdeConfig& cfg, double a_strat)
        : spec_(n, beta, cfg.dx),
          scheme_(cfg.scheme),
          scale_(cfg.noise_scale),
          a_strat_(a_strat),
          a_ito_(a_strat + (beta.beta == 1 ? 0.5 * cfg.noise_scale * cfg.noise_scale : 0.0)) {}

    void step(Mat& m, RngStream& rng) {
        fill_ginibre_increment(spec_, rng, db_);
        if (scale_ != 1.0) db_ *= scale_;
        const double dx = spec_.dx;
        if (scheme_ == SdeScheme::ItoEuler) {
            g0_.noalias() = db_ * m;
            m += (a_ito_ * dx) * m + g0_;
            return;
        }
        g0_.noalias() = db_ * m;
        pred_ = (1.0 + a_strat_ * dx) * m + g0_;
        g1_.noalias() = db_ * pred_;
        m += (0.5 * a_strat_ * dx) * (m + pred_) + 0.5 * (g0_ + g1_);
    }

  private:
    NoiseSpec spec_;
    SdeScheme scheme_;
    double scale_, a_strat_, a_ito_;
    Mat db_, g0_, g1_, pred_;
};

void check_record_stride(std::int64_t n_steps, int stride, const char* who) {
    if (stride < 0) throw std::invalid_argument(std::string(who) + ": record_stride must be >= 0");
    if (stride > 0 && n_steps % stride != 0)
        throw std::invalid_argument(std::string(who) +
                                    ": record_stride must divide the step count");
}

}  // namespace

Trajectory integrate_lambda(const ModelParams& params, double length_over_xi,
                            const SdeConfig& cfg, RngStream rng, int record_stride) {
    cfg.validate();
    const std::int64_t n = steps_for(length_over_xi, cfg.dx, "integrate_lambda");
    check_record_stride(n, record_stride, "integrate_lambda");

    Trajectory traj;
    traj.process_tag = "decay_flow";
    traj.master_seed = rng.master_seed();
    traj.stream_id = rng.stream_id();

    const int dim = params.n_channels;
    Mat lam = Mat::Identity(dim, dim);
    traj.grid.push_back(0.0);
    traj.states.push_back(lam);

    DecayStepper stepper(dim, params.beta, cfg, -params.mu(), params.mu());
    for (std::int64_t i = 1; i <= n; ++i) {
        stepper.step(lam, rng);
        if (i % cfg.renorm_every == 0 && !lam.allFinite())
            throw NumericalError("integrate_lambda: non-finite state at x = " +
                                 std::to_string(static_cast<double>(i) * cfg.dx));
        if (record_stride > 0 && i % record_stride == 0) {
            traj.grid.push_back(static_cast<double>(i) * cfg.dx);
            traj.states.push_back(lam);
        }
    }
    if (record_stride == 0 && n > 0) {
        traj.grid.push_back(static_cast<double>(n) * cfg.dx);
        traj.states.push_back(lam);
    }
    require_finite(traj.states.back(), "integrate_lambda");
    return traj;
}

Mat exp_functional_raw(const ModelParams& params, double length_over_xi, const SdeConfig& cfg,
                       RngStream rng) {
    cfg.validate();
    const std::int64_t n = steps_for(length_over_xi, cfg.dx, "exp_functional");
    const int dim = params.n_channels;
    if (n == 0) return Mat::Zero(dim, dim);

    Mat lam = Mat::Identity(dim, dim);
    Mat acc = 0.5 * Mat::Identity(dim, dim);  // trapezoid endpoint weight at x = 0
    DecayStepper stepper(dim, params.beta, cfg, -params.mu(), params.mu());
    for (std::int64_t i = 1; i <= n; ++i) {
        stepper.step(lam, rng);
        const double w = (i == n) ? 0.5 : 1.0;
        acc.noalias() += w * (lam.adjoint() * lam);
        if (i % cfg.renorm_every == 0 && !acc.allFinite())
            throw NumericalError("exp_functional: non-finite state at x = " +
                                 std::to_string(static_cast<double>(i) * cfg.dx));
    }
    acc *= cfg.dx;
    require_finite(acc, "exp_functional");
    return acc;
}

HermitianMatrix exp_functional(const ModelParams& params, double length, const SdeConfig& cfg,
                               RngStream rng) {
    const Mat q = exp_functional_raw(params, length / params.xi(), cfg, rng);
    return HermitianMatrix::project(2.0 * params.tau_xi() * q);
}

Mat integrate_qtilde_raw(const ModelParams& params, double length_over_xi, const SdeConfig& cfg,
                         RngStream rng) {
    cfg.validate();
    const std::int64_t n = steps_for(length_over_xi, cfg.dx, "integrate_qtilde");
    const int dim = params.n_channels;
    const double dx = cfg.dx;
    const double mu = params.mu();
    const double half_beta = 0.5 * params.beta.beta;
    const double s2 = cfg.noise_scale * cfg.noise_scale;
    const NoiseSpec spec(dim, params.beta, dx);
    const Mat id = Mat::Identity(dim, dim);

    Mat q = Mat::Zero(dim, dim);
    Mat db, g0, g1, pred, tmp;
    for (std::int64_t i = 1; i <= n; ++i) {
        fill_increment(spec, rng, db);
        if (cfg.noise_scale != 1.0) db *= cfg.noise_scale;
        if (cfg.scheme == SdeScheme::ItoEuler) {
            // drift: Stratonovich part plus the noise-induced correction
            tmp = (id - 2.0 * mu * q) +
                  s2 * (half_beta * (q.trace() * id - static_cast<double>(dim) * q) + 2.0 * mu * q);
            g0.noalias() = q * db;
            g1.noalias() = db * q;
            q += dx * tmp + g0 + g1;
        } else {
            g0.noalias() = q * db + db * q;
            pred = q + dx * (id - 2.0 * mu * q) + g0;
            g1.noalias() = pred * db + db * pred;
            q += dx * (id - mu * (q + pred)) + 0.5 * (g0 + g1);
        }
        tmp = q.adjoint();
        q = 0.5 * (q + tmp);
        if (i % cfg.renorm_every == 0 && !q.allFinite())
            throw NumericalError("integrate_qtilde: non-finite state at x = " +
                                 std::to_string(static_cast<double>(i) * dx));
    }
    require_finite(q, "integrate_qtilde");
    return q;
}

HermitianMatrix integrate_qtilde(const ModelParams& params, double length, const SdeConfig& cfg,
                                 RngStream rng) {
    const Mat q = integrate_qtilde_raw(params, length / params.xi(), cfg, rng);
    return HermitianMatrix::project(2.0 * params.tau_xi() * q);
}

namespace {

constexpr double kUnitaryDriftWarn = 1e-6;
const Complex kMinusI(0.0, -1.0);

}  // namespace

StildeResult integrate_stilde(const ModelParams& params, double length, const SdeConfig& cfg,
                              RngStream rng) {
    cfg.validate();
    if (cfg.scheme != SdeScheme::StratonovichHeun)
        throw std::invalid_argument("integrate_stilde: only the Stratonovich scheme is defined");
    const double x_end = length / params.xi();
    const std::int64_t n = steps_for(x_end, cfg.dx, "integrate_stilde");
    const int dim = params.n_channels;
    const NoiseSpec spec(dim, params.beta, cfg.dx);
    const double root2 = std::sqrt(2.0);

    Mat s = -Mat::Identity(dim, dim);
    Mat db1, db2, db3, aplus, aminus, g0, g1, pred;
    int warnings = 0;

    auto diffusion = [&](const Mat& state, Mat& out) {
        out.noalias() = state * aplus * state;
        out += aminus;
        out.noalias() += root2 * (state * db3 + db3 * state);
        out *= kMinusI;
    };

    for (std::int64_t i = 1; i <= n; ++i) {
        fill_increment(spec, rng, db1);
        fill_increment(spec, rng, db2);
        fill_increment(spec, rng, db3);
        if (cfg.noise_scale != 1.0) {
            db1 *= cfg.noise_scale;
            db2 *= cfg.noise_scale;
            db3 *= cfg.noise_scale;
        }
        aplus = db1 + Complex(0.0, 1.0) * db2;
        aminus = db1 + Complex(0.0, -1.0) * db2;
        diffusion(s, g0);
        pred = s + g0;
        diffusion(pred, g1);
        s += 0.5 * (g0 + g1);

        if (i % cfg.renorm_every == 0 || i == n) {
            require_finite(s, "integrate_stilde");
            if (unitary_residual(s) > kUnitaryDriftWarn) ++warnings;
            if (params.beta.beta == 1) {
                pred = s.transpose();
                s = 0.5 * (s + pred);
            }
            s = unitarize(s).mat();
        }
    }

    StildeResult out;
    out.s = UnitaryMatrix::require(s);
    out.unitarity_warnings = warnings;
    return out;
}

namespace {

struct CoupledScratch {
    Mat db1, db2, db3, aplus, aminus;
    Mat f0l, f0r, f1l, f1r, w0, w1, gq0, gq1;
    Mat ulp, urp, qp, t1, t2;
};

/// Diffusion coefficients of the joint (U_L, U_R) flow and the Hermitian
/// driver W of the delay-matrix equation, all at the given factor pair.
void coupled_diffusion(const Mat& ul, const Mat& ur, CoupledScratch& sc, const double root2,
                       Mat& fl, Mat& fr, Mat& w) {
    // fl = -i[ (1/2) aminus UR† + (1/2) UL UR aplus UL + sqrt(2) dB3 UL ]
    sc.t1.noalias() = ul * ur;
    sc.t2.noalias() = sc.t1 * sc.aplus;  // UL UR aplus
    fl.noalias() = 0.5 * (sc.aminus * ur.adjoint());
    fl.noalias() += 0.5 * (sc.t2 * ul);
    fl.noalias() += root2 * (sc.db3 * ul);
    fl *= kMinusI;

    // fr = -i[ (1/2) UL† aminus + (1/2) UR aplus UL UR + sqrt(2) UR dB3 ]
    sc.t2.noalias() = ur * sc.aplus;  // UR aplus
    fr.noalias() = 0.5 * (ul.adjoint() * sc.aminus);
    fr.noalias() += 0.5 * (sc.t2 * sc.t1);
    fr.noalias() += root2 * (ur * sc.db3);
    fr *= kMinusI;

    // w = (P1 - P1†)/(2i) + (P2 + P2†)/2 with P1 = UR dB1 UL, P2 = UR dB2 UL
    sc.t1.noalias() = ur * sc.db1;
    sc.t2.noalias() = sc.t1 * ul;  // P1
    w = Complex(0.0, -0.5) * sc.t2;
    w += Complex(0.0, 0.5) * sc.t2.adjoint();
    sc.t1.noalias() = ur * sc.db2;
    sc.t2.noalias() = sc.t1 * ul;  // P2
    w += 0.5 * sc.t2;
    w += 0.5 * sc.t2.adjoint();
}

}  // namespace

CoupledResult integrate_coupled_from(const ModelParams& params, double length,
                                     const SdeConfig& cfg, RngStream rng, const Mat& u_left0,
                                     const Mat& u_right0) {
    cfg.validate();
    if (cfg.scheme != SdeScheme::StratonovichHeun)
        throw std::invalid_argument("integrate_coupled: only the Stratonovich scheme is defined");
    const int dim = params.n_channels;
    if (u_left0.rows() != dim || u_left0.cols() != dim || u_right0.rows() != dim ||
        u_right0.cols() != dim)
        throw std::invalid_argument("integrate_coupled: initial factors have wrong shape");
    if (unitary_residual(u_left0) > 1e-8 || unitary_residual(u_right0) > 1e-8)
        throw std::invalid_argument("integrate_coupled: initial factors must be unitary");
    if ((u_left0 * u_right0 + Mat::Identity(dim, dim)).norm() > 1e-8)
        throw std::invalid_argument(
            "integrate_coupled: initial factors must multiply to the closed-channel value -1");

    const double x_end = length / params.xi();
    const std::int64_t n = steps_for(x_end, cfg.dx, "integrate_coupled");
    const NoiseSpec spec(dim, params.beta, cfg.dx);
    const double root2 = std::sqrt(2.0);
    const double dx = cfg.dx;
    const Mat id = Mat::Identity(dim, dim);

    Mat ul = u_left0, ur = u_right0, q = Mat::Zero(dim, dim);
    CoupledScratch sc;
    int warnings = 0;

    for (std::int64_t i = 1; i <= n; ++i) {
        fill_increment(spec, rng, sc.db1);
        fill_increment(spec, rng, sc.db2);
        fill_increment(spec, rng, sc.db3);
        if (cfg.noise_scale != 1.0) {
            sc.db1 *= cfg.noise_scale;
            sc.db2 *= cfg.noise_scale;
            sc.db3 *= cfg.noise_scale;
        }
        sc.aplus = sc.db1 + Complex(0.0, 1.0) * sc.db2;
        sc.aminus = sc.db1 + Complex(0.0, -1.0) * sc.db2;

        coupled_diffusion(ul, ur, sc, root2, sc.f0l, sc.f0r, sc.w0);
        sc.gq0.noalias() = q * sc.w0 + sc.w0 * q;
        sc.ulp = ul + sc.f0l;
        sc.urp = ur + sc.f0r;
        sc.qp = q + dx * id + sc.gq0;

        coupled_diffusion(sc.ulp, sc.urp, sc, root2, sc.f1l, sc.f1r, sc.w1);
        sc.gq1.noalias() = sc.qp * sc.w1 + sc.w1 * sc.qp;

        ul += 0.5 * (sc.f0l + sc.f1l);
        ur += 0.5 * (sc.f0r + sc.f1r);
        q += dx * id + 0.5 * (sc.gq0 + sc.gq1);
        sc.t1 = q.adjoint();
        q = 0.5 * (q + sc.t1);

        if (i % cfg.renorm_every == 0 || i == n) {
            require_finite(ul, "integrate_coupled");
            require_finite(ur, "integrate_coupled");
            require_finite(q, "integrate_coupled");
            if (unitary_residual(ul) > kUnitaryDriftWarn || unitary_residual(ur) > kUnitaryDriftWarn)
                ++warnings;
            ul = unitarize(ul).mat();
            ur = unitarize(ur).mat();
        }
    }

    CoupledResult out;
    out.u_left = UnitaryMatrix::require(ul);
    out.u_right = UnitaryMatrix::require(ur);
    out.qtilde = HermitianMatrix::project(2.0 * params.tau_xi() * q);
    out.unitarity_warnings = warnings;
    return out;
}

CoupledResult integrate_coupled(const ModelParams& params, double length, const SdeConfig& cfg,
                                RngStream rng) {
    const int dim = params.n_channels;
    const Mat init = Complex(0.0, 1.0) * Mat::Identity(dim, dim);
    return integrate_coupled_from(params, length, cfg, rng, init, init);
}

GinibreFlowResult integrate_rider_valko(double mu, int n_channels, SymmetryClass beta,
                                        double length_over_xi, const SdeConfig& cfg,
                                        RngStream rng, int record_stride) {
    cfg.validate();
    check_dim(n_channels, "integrate_rider_valko");
    if (!(mu > 0.0))
        throw std::invalid_argument("integrate_rider_valko: mu must be > 0");
    const std::int64_t n = steps_for(length_over_xi, cfg.dx, "integrate_rider_valko");
    check_record_stride(n, record_stride, "integrate_rider_valko");

    GinibreFlowResult out;
    out.path.process_tag = "ginibre_flow";
    out.path.master_seed = rng.master_seed();
    out.path.stream_id = rng.stream_id();

    Mat m = Mat::Identity(n_channels, n_channels);
    Mat acc = 0.5 * Mat::Identity(n_channels, n_channels);
    out.path.grid.push_back(0.0);
    out.path.states.push_back(m);

    GinibreStepper stepper(n_channels, beta, cfg, -mu);
    for (std::int64_t i = 1; i <= n; ++i) {
        stepper.step(m, rng);
        const double w = (i == n) ? 0.5 : 1.0;
        acc.noalias() += w * (m.adjoint() * m);
        if (i % cfg.renorm_every == 0 && !m.allFinite())
            throw NumericalError("integrate_rider_valko: non-finite state at x = " +
                                 std::to_string(static_cast<double>(i) * cfg.dx));
        if (record_stride > 0 && i % record_stride == 0) {
            out.path.grid.push_back(static_cast<double>(i) * cfg.dx);
            out.path.states.push_back(m);
        }
    }
    if (record_stride == 0 && n > 0) {
        out.path.grid.push_back(static_cast<double>(n) * cfg.dx);
        out.path.states.push_back(m);
    }
    if (n == 0)
        acc.setZero();
    else
        acc *= cfg.dx;
    require_finite(acc, "integrate_rider_valko");
    out.integral = acc;
    return out;
}

std::vector<Estimate> lyapunov_spectrum(const ModelParams& params, double length_over_xi,
                                        const SdeConfig& cfg, RngStream rng, bool noise_only) {
    cfg.validate();
    if (length_over_xi < 50.0)
        throw std::invalid_argument("lyapunov_spectrum: need a path of at least 50 in units of "
                                    "the localization length");
    const std::int64_t n = steps_for(length_over_xi, cfg.dx, "lyapunov_spectrum");
    const int dim = params.n_channels;
    const double a_strat = noise_only ? 0.0 : -params.mu();

    // 17 path segments: the first absorbs the frame-alignment transient and is
    // discarded; the remaining 16 give the value and its block standard error.
    constexpr int kSegments = 17;
    std::vector<std::vector<double>> seg_logs(kSegments, std::vector<double>(dim, 0.0));
    std::vector<std::int64_t> seg_steps(kSegments, 0);

    Mat frame = Mat::Identity(dim, dim);
    DecayStepper stepper(dim, params.beta, cfg, a_strat, params.mu());
    std::int64_t last_qr = 0;
    for (std::int64_t i = 1; i <= n; ++i) {
        stepper.step(frame, rng);
        if (i % cfg.renorm_every == 0 || i == n) {
            require_finite(frame, "lyapunov_spectrum");
            Eigen::HouseholderQR<Mat> qr(frame);
            const Mat& packed = qr.matrixQR();
            const std::int64_t mid = (last_qr + i - 1) / 2;
            const int seg = static_cast<int>((mid * kSegments) / n);
            for (int c = 0; c < dim; ++c) seg_logs[seg][c] += std::log(std::abs(packed(c, c)));
            seg_steps[seg] += i - last_qr;
            last_qr = i;
            frame = qr.householderQ();
        }
    }

    std::vector<Estimate> out(dim);
    for (int c = 0; c < dim; ++c) {
        double total_log = 0.0;
        std::int64_t total_steps = 0;
        ScalarAccumulator rates;
        for (int b = 1; b < kSegments; ++b) {
            if (seg_steps[b] == 0) continue;
            total_log += seg_logs[b][c];
            total_steps += seg_steps[b];
            rates.add(seg_logs[b][c] / (static_cast<double>(seg_steps[b]) * cfg.dx));
        }
        if (total_steps == 0)
            throw NumericalError("lyapunov_spectrum: empty accumulation blocks");
        out[c].value = total_log / (static_cast<double>(total_steps) * cfg.dx);
        out[c].std_error = rates.std_error();
    }
    return out;
}

}  // namespace wiredelay
