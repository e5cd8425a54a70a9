#pragma once

#include <vector>

#include "wiredelay/linalg.hpp"
#include "wiredelay/model.hpp"
#include "wiredelay/rng.hpp"
#include "wiredelay/sde.hpp"

namespace wiredelay {

/// Parameters of the inverse-delay-matrix ensemble: eigenvalue density
/// proportional to prod |g_i - g_j|^beta * prod g^a e^{-g/2} with
/// a = mu - 1 - (beta/2)(N-1). Exists only for mu > beta (N-1)/2.
struct WishartSpec {
    int dim = 1;
    SymmetryClass beta{2};
    double mu = 1.0;

    WishartSpec(int n, SymmetryClass b, double mu_);

    /// One-body exponent a; zero exactly at the wire drift mu = 1 + (beta/2)(N-1).
    [[nodiscard]] double exponent() const {
        return mu - 1.0 - 0.5 * beta.beta * (dim - 1);
    }
};

/// One spectral draw: sorted positive eigenvalues.
struct SpectralSample {
    std::vector<double> eigenvalues;  ///< ascending
    int n_draws = 1;
};

/// Standard Gamma(shape, scale 1) deviate (Marsaglia-Tsang squeeze, with the
/// shape < 1 boost); consumption per draw is variable, so give each logical
/// sample its own stream when reproducibility across worker counts matters.
[[nodiscard]] double sample_gamma(double shape, RngStream& rng);

/// chi-distributed deviate with (possibly non-integer) dof degrees of freedom.
[[nodiscard]] double sample_chi(double dof, RngStream& rng);

/// One eigenvalue draw via the bidiagonal beta-ensemble construction:
/// diagonal chi_{2mu}, chi_{2mu-beta}, ..., chi_{2mu-beta(N-1)}, subdiagonal
/// chi_{beta(N-1)}, ..., chi_beta; eigenvalues of B B^T.
[[nodiscard]] SpectralSample sample_wishart_eigs(const WishartSpec& spec, RngStream& rng);

/// Independent dense construction (A A^dagger with Gaussian A) for specs whose
/// column count is an integer: beta=1 needs 2 mu integer, beta=2 needs mu
/// integer. Used to cross-validate the bidiagonal parameter map.
[[nodiscard]] SpectralSample sample_wishart_direct(const WishartSpec& spec, RngStream& rng);

/// One draw of the rescaled inverse delay matrix 2 tau_xi Qtilde^{-1} from a
/// long-wire trajectory of the exponential functional. Requires
/// length_over_xi >= 8 so the functional has saturated; throws NumericalError
/// if the functional is numerically singular (callers may then resample from
/// a fresh stream).
[[nodiscard]] HermitianMatrix dufresne_limit_sample(const ModelParams& params,
                                                    double length_over_xi, const SdeConfig& cfg,
                                                    RngStream rng);

/// Lower support edge 1/(4 beta) of the stationary eigenvalue density.
[[nodiscard]] double stationary_support_min(SymmetryClass beta);

/// Stationary density of the rescaled delay eigenvalues,
/// rho(l) = sqrt(beta l - 1/4) / (pi beta l^2) for l >= 1/(4 beta), else 0.
/// Unit-normalized; its first moment diverges.
[[nodiscard]] double stationary_density(SymmetryClass beta, double lambda);

}  // namespace wiredelay
