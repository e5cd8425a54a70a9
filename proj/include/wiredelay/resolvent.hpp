#pragma once

#include <cstdint>
#include <vector>

#include "wiredelay/common.hpp"
#include "wiredelay/model.hpp"
#include "wiredelay/sde.hpp"

namespace wiredelay {

/// Grid and marching configuration for the large-channel-count resolvent
/// flow. Lengths are expressed in the rescaled coordinate s = N L / xi, in
/// which the leading equation has no free parameter besides beta.
///
/// The march runs on the compactified coordinate theta defined by
///   lambda = map_center + map_scale * tan(theta / 2),   theta in (-pi, pi),
/// so the whole real line (including the point at infinity) is covered by a
/// uniform periodic grid of n_theta cells. The flow is integrated in exact
/// flux form on that circle, which conserves the total spectral mass to
/// rounding error, and the upper-half-plane analyticity of the resolvent is
/// enforced by projecting onto the non-negative Fourier modes of the circle.
///
/// Resolution rule: cells near lambda = 0 (where the density peak and the
/// lower support edge live) have width ~ dtheta * (map_scale^2 +
/// map_center^2) / (2 map_scale); this must not exceed eps / 6 so the
/// half-offset line eps/2 spans several cells. validate() enforces it.
///
/// lambda_min / lambda_max / n_lambda describe the uniform readout grid on
/// which g is sampled for export; they do not affect the march itself.
struct ResolventGridConfig {
    double lambda_min = -2.0;
    double lambda_max = 22.0;
    int n_lambda = 4801;      ///< uniform readout nodes, endpoints included
    double eps = 0.012;       ///< imaginary offset; a second march runs at eps/2
    int n_theta = 4096;       ///< periodic cells on the compactified circle (even)
    double map_center = 0.5;  ///< center of the tangent map
    double map_scale = 1.0;   ///< scale of the tangent map
    double s_max = 4.0;
    int n_snapshots = 9;      ///< stored s values, uniformly spaced from 0
    double cfl = 0.4;

    void validate() const;
};

/// Complex resolvent g(lambda + i eps; s) of the scaled delay spectrum,
/// marched in s and sampled on the uniform readout grid at snapshot
/// lengths. Two offsets (eps and eps/2) are kept so densities can be
/// extrapolated toward the real axis.
struct ResolventField {
    std::vector<double> lambda_grid;
    double eps = 0.0;
    std::vector<double> s_grid;
    std::vector<std::vector<Complex>> g;       ///< [snapshot][node] at eps
    std::vector<std::vector<Complex>> g_half;  ///< same at eps/2
    int n_subleading = 0;    ///< 0 = strict large-N (subleading flux dropped)

    // Monitors, one entry per snapshot; all are whole-line quantities
    // evaluated on the compactified circle, not readout-window integrals.
    std::vector<double> mass;           ///< total spectral mass (stays 1 up to rounding)
    std::vector<double> scheme_defect;  ///< |mass - 1|: conservation defect of the march
    std::vector<double> worst_im;       ///< max Im g over the circle (should stay <= 0)
    std::vector<double> first_moment;   ///< whole-line integral of lambda * density (extrapolated)
    std::vector<double> stationary_l1;  ///< whole-line L1 distance to the stationary density

    [[nodiscard]] int snapshot_index(double s) const;  ///< throws if s is not stored
};

/// One normalized eigenvalue-density curve at rescaled length s. Produced
/// either from the resolvent field (then rho_std_error is empty) or from a
/// Monte Carlo histogram (then per-bin standard errors are attached).
struct DensityCurve {
    std::vector<double> lambda_grid;  ///< nodes (field) or bin centers (histogram)
    std::vector<double> rho;
    std::vector<double> rho_std_error;
    double s = 0.0;
    double mass = 0.0;  ///< integral over the curve's own grid
};

/// March the deterministic resolvent flow
///   d_s g = d_z [ 2 (beta z - 1/2) g - beta z^2 g^2 ]   (z = lambda + i eps)
/// from g(z; 0) = 1/z. The residual (g - 1/z) dz/dtheta obeys a conservation
/// law on the compactified circle and is advanced with a second-order
/// limited reconstruction, a local dissipation proportional to the modulus
/// of the transport speed, CFL-limited steps, and a periodic spectral
/// projection onto upper-half-plane-analytic states. n_for_subleading > 0
/// retains the next-order flux term (2 - beta)/N * d_z(z^2 g); 0 drops it.
[[nodiscard]] ResolventField solve_resolvent_pde(const ResolventGridConfig& config,
                                                 SymmetryClass beta, int n_for_subleading = 0);

/// Density at a stored snapshot: rho_eps = -(1/pi) Im g, extrapolated toward
/// the real axis with the two-offset rule 2 rho_{eps/2} - rho_eps. Negative
/// excursions beyond -1e-3 raise NumericalError (sign convention or
/// instability); smaller ones -- extrapolation undershoot next to steep
/// edges -- are clipped to zero.
[[nodiscard]] DensityCurve density_from_resolvent(const ResolventField& field, double s);

/// Monte Carlo density of the scaled delay spectrum: eigenvalues of N times
/// the dimensionless exponential functional, one draw per stream, binned on
/// [lambda_min, lambda_max). Requires 16 <= N <= 64 (the large-N regime the
/// field describes) and n_draws * N >= 1e4 eigenvalues.
[[nodiscard]] DensityCurve empirical_density(const ModelParams& params, double length,
                                             std::size_t n_draws, const SdeConfig& cfg,
                                             const StreamKey& streams, double lambda_min,
                                             double lambda_max, int bins, int workers = 1);

/// L1 distance between two curves on a common grid, integrated with the
/// trapezoid rule: int |rho_a - rho_b| d lambda. Grids must match.
[[nodiscard]] double density_l1_distance(const DensityCurve& a, const DensityCurve& b);

}  // namespace wiredelay
