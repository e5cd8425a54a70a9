#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "wiredelay/common.hpp"

namespace wiredelay {

/// Physical configuration of the multichannel wire. Derived scales are
/// recomputed on demand so they can never go stale.
struct ModelParams {
    int n_channels = 1;
    SymmetryClass beta{2};
    double k = 1.0;      ///< wave number (1/length)
    double sigma = 1.0;  ///< disorder strength (1/length^3)

    ModelParams() = default;
    ModelParams(int n, SymmetryClass b, double k_, double sigma_)
        : n_channels(n), beta(b), k(k_), sigma(sigma_) {
        check_dim(n, "ModelParams");
        if (!(k > 0.0)) throw std::invalid_argument("ModelParams: k must be > 0");
        if (!(sigma >= 0.0)) throw std::invalid_argument("ModelParams: sigma must be >= 0");
    }

    /// Drift coefficient mu = 1 + (beta/2)(N-1).
    [[nodiscard]] double mu() const { return 1.0 + 0.5 * beta.beta * (n_channels - 1); }
    /// Localization length xi = 8 k^2 / sigma. sigma = 0 (a clean wire) has no
    /// such scale, so any op that needs one rejects it here.
    [[nodiscard]] double xi() const {
        if (sigma == 0.0) throw std::invalid_argument("ModelParams: length scale undefined at sigma = 0");
        return 8.0 * k * k / sigma;
    }
    /// Group velocity v = 2k.
    [[nodiscard]] double v() const { return 2.0 * k; }
    /// Ballistic time scale tau_xi = xi / v.
    [[nodiscard]] double tau_xi() const { return xi() / v(); }
    /// Elastic mean free path ell_e = xi / (4 mu).
    [[nodiscard]] double ell_e() const { return xi() / (4.0 * mu()); }
    /// Weak-disorder validity flag (warn, don't reject, outside it).
    [[nodiscard]] bool weak_disorder() const { return sigma / (k * k * k) <= 1e-2; }
};

enum class SdeScheme { ItoEuler, StratonovichHeun };

/// Step-size and scheme configuration for the dimensionless-coordinate
/// integrators (dx in units of the localization length).
struct SdeConfig {
    double dx = 1e-3;
    SdeScheme scheme = SdeScheme::StratonovichHeun;
    int renorm_every = 100;    ///< steps between re-unitarization / cleanup
    double noise_scale = 1.0;  ///< test hook: 0 turns the noise off (drift-only paths)

    void validate() const {
        if (!(dx > 0.0) || dx > 1e-3 + 1e-15)
            throw std::invalid_argument("SdeConfig: dx must be in (0, 1e-3], got " + std::to_string(dx));
        if (renorm_every < 1) throw std::invalid_argument("SdeConfig: renorm_every must be >= 1");
        if (noise_scale < 0.0) throw std::invalid_argument("SdeConfig: noise_scale must be >= 0");
    }
};

}  // namespace wiredelay
