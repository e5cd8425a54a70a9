#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wiredelay/linalg.hpp"
#include "wiredelay/model.hpp"
#include "wiredelay/sde.hpp"
#include "wiredelay/stats.hpp"

namespace wiredelay {

/// e^u - 1 - u, evaluated by series for small |u| to avoid cancellation.
[[nodiscard]] double expm1_minus_x(double u);

/// Ensemble-mean trace of the time-delay matrix at physical length L:
/// N L / k (ballistic value, exact at all orders in the disorder strength).
[[nodiscard]] double mean_trace(const ModelParams& params, double length);

struct SecondMoments {
    double sq_of_trace = 0.0;     ///< < (tr Q)^2 >
    double trace_of_square = 0.0; ///< < tr(Q^2) >
    double difference = 0.0;      ///< their difference, evaluated in closed form
};

/// Closed-form second moments at physical length L (units of time squared).
[[nodiscard]] SecondMoments second_moments(const ModelParams& params, double length);

struct ProperTimeStats {
    double mean = 0.0;       ///< < tau_a > = L / k
    double second = 0.0;     ///< < tau_a^2 >
    double cross = 0.0;      ///< < tau_a tau_b >, a != b
    double variance = 0.0;   ///< < tau_a^2 > - < tau_a >^2
    double covariance = 0.0; ///< < tau_a tau_b > - < tau_a >^2
};

/// Per-channel proper-time statistics; throws std::invalid_argument for a
/// single channel, where no off-diagonal pair exists.
[[nodiscard]] ProperTimeStats proper_time_stats(const ModelParams& params, double length);

/// The linear part of the closed second-moment evolution, acting on the
/// vector (< (tr Q)^2 >, < tr Q^2 >); its eigenvalues are 1 and -beta/2
/// (in units of 4 / localization length).
[[nodiscard]] RealMat moment_matrix(SymmetryClass beta);

struct MomentSpectral {
    double lambda_plus = 0.0;
    double lambda_minus = 0.0;
    RealMat proj_plus;
    RealMat proj_minus;
};

/// Spectral decomposition of moment_matrix (exact rational projectors).
[[nodiscard]] MomentSpectral moment_spectral(SymmetryClass beta);

/// Independent evolution of the same two moments by a fixed-step RK4
/// integration of the coupled linear system, for cross-validation of the
/// closed forms. n_steps 0 selects max(1000, ceil(4096 L/xi)).
[[nodiscard]] SecondMoments integrate_moment_ode(const ModelParams& params, double length,
                                                 std::int64_t n_steps = 0);

enum class SdeBackend {
    kExpFunctional,  ///< delay matrix via the exponential functional of the decaying flow
    kDirectFlow,     ///< delay matrix via its own closed stochastic flow
};

struct McMomentResult {
    EnsembleStats trace;            ///< tr Q per trajectory
    EnsembleStats trace_squared;    ///< (tr Q)^2 per trajectory
    EnsembleStats trace_of_square;  ///< tr(Q^2) per trajectory
};

/// Monte Carlo moments of the delay matrix at physical length L over
/// n_traj independent trajectories (streams key.at(0..n_traj-1)).
[[nodiscard]] McMomentResult mc_moments(const ModelParams& params, double length,
                                        std::uint64_t n_traj, const SdeConfig& cfg,
                                        const StreamKey& key, SdeBackend backend,
                                        int workers = 1);

struct MomentRow {
    int n_channels = 0;
    int beta = 0;
    double L_over_xi = 0.0;
    std::string quantity;
    double closed = 0.0;
    double ode = 0.0;
    double mc = 0.0;
    double mc_std_error = 0.0;
};

using MomentReport = std::vector<MomentRow>;

/// Rows (mean trace, both second moments) comparing closed form, the ODE
/// cross-check, and Monte Carlo at a single (params, L) point.
[[nodiscard]] MomentReport moment_report_rows(const ModelParams& params, double length,
                                              const McMomentResult& mc);

}  // namespace wiredelay
