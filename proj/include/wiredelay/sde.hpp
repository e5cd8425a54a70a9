#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wiredelay/linalg.hpp"
#include "wiredelay/model.hpp"
#include "wiredelay/rng.hpp"
#include "wiredelay/stats.hpp"

namespace wiredelay {

/// Identity of a reproducible stream family: trajectory t draws from
/// RngStream(master, salt + t), independent of scheduling and worker count.
struct StreamKey {
    std::uint64_t master = 0;
    std::uint64_t salt = 0;
    [[nodiscard]] RngStream at(std::uint64_t t) const { return RngStream(master, salt + t); }
};

/// A sampled matrix path on a uniform grid of the dimensionless coordinate
/// x (position / localization length).
struct Trajectory {
    std::vector<double> grid;
    std::vector<Mat> states;
    std::string process_tag;
    std::uint64_t master_seed = 0;
    std::uint64_t stream_id = 0;
};

/// Matrix geometric Brownian motion with drift: dM = -mu M dx + dB M
/// (Stratonovich; the Ito scheme integrates the converted drift -mu/2).
/// record_stride 0 keeps endpoints only; otherwise it must divide the step count.
[[nodiscard]] Trajectory integrate_lambda(const ModelParams& params, double length_over_xi,
                                          const SdeConfig& cfg, RngStream rng,
                                          int record_stride = 0);

/// Dimensionless exponential functional of the decaying flow:
/// integral of M†M dx along one realization (trapezoid on the step grid).
[[nodiscard]] Mat exp_functional_raw(const ModelParams& params, double length_over_xi,
                                     const SdeConfig& cfg, RngStream rng);

/// Time-delay matrix sample built from the exponential functional,
/// rescaled to physical time units.
[[nodiscard]] HermitianMatrix exp_functional(const ModelParams& params, double length,
                                             const SdeConfig& cfg, RngStream rng);

/// Direct integration of the delay-matrix flow, dimensionless form:
/// dq = (1 - 2 mu q)dx + (q dB + dB q) (Stratonovich) or the equivalent
/// Ito drift 1 + (beta/2)(tr(q) 1 - N q).
[[nodiscard]] Mat integrate_qtilde_raw(const ModelParams& params, double length_over_xi,
                                       const SdeConfig& cfg, RngStream rng);

/// Same flow rescaled to physical time units.
[[nodiscard]] HermitianMatrix integrate_qtilde(const ModelParams& params, double length,
                                               const SdeConfig& cfg, RngStream rng);

struct StildeResult {
    UnitaryMatrix s;
    int unitarity_warnings = 0;  ///< drift beyond 1e-6 observed before renormalization
};

/// Effective scattering-matrix flow (Stratonovich only), S(0) = -1:
/// dS = -i{ (dB1 - i dB2) + S (dB1 + i dB2) S + sqrt(2)(S dB3 + dB3 S) }.
[[nodiscard]] StildeResult integrate_stilde(const ModelParams& params, double length,
                                            const SdeConfig& cfg, RngStream rng);

struct CoupledResult {
    UnitaryMatrix u_left, u_right;
    HermitianMatrix qtilde;  ///< physical time units
    int unitarity_warnings = 0;
};

/// Coupled unitary-factorization flow (Stratonovich only):
/// evolves (U_L, U_R) whose product tracks the S flow above, together with
/// the delay matrix driven by the Hermitian combination
/// W = (1/2i)(U_R dB1 U_L - h.c.) + (1/2)(U_R dB2 U_L + h.c.).
/// Default initialization U_L(0) = U_R(0) = i 1 (principal square root of -1).
[[nodiscard]] CoupledResult integrate_coupled(const ModelParams& params, double length,
                                              const SdeConfig& cfg, RngStream rng);

/// Same flow from an explicit admissible unitary splitting of S(0) = -1.
[[nodiscard]] CoupledResult integrate_coupled_from(const ModelParams& params, double length,
                                                   const SdeConfig& cfg, RngStream rng,
                                                   const Mat& u_left0, const Mat& u_right0);

struct GinibreFlowResult {
    Trajectory path;
    Mat integral;  ///< dimensionless integral of M†M dx over the path
};

/// Non-Hermitian-noise companion flow dM = -mu M dx + dChi M (Stratonovich;
/// Ito converts the drift to -(mu - 1/2) for the real class, -mu for the
/// complex class), with dChi an independent-entry Ginibre increment.
[[nodiscard]] GinibreFlowResult integrate_rider_valko(double mu, int n_channels,
                                                      SymmetryClass beta, double length_over_xi,
                                                      const SdeConfig& cfg, RngStream rng,
                                                      int record_stride = 0);

/// Lyapunov spectrum (descending, units of inverse localization length) via
/// periodic QR re-orthonormalization; standard errors from 16 path blocks.
/// noise_only drops the -mu drift (pure multiplicative-noise flow).
[[nodiscard]] std::vector<Estimate> lyapunov_spectrum(const ModelParams& params,
                                                      double length_over_xi, const SdeConfig& cfg,
                                                      RngStream rng, bool noise_only = false);

}  // namespace wiredelay
