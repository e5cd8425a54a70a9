#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wiredelay/linalg.hpp"
#include "wiredelay/model.hpp"
#include "wiredelay/rng.hpp"

namespace wiredelay {

/// Piecewise-constant matrix potential on [0, L]: cell j covers
/// [j h, (j+1) h) and carries one Hermitian coupling matrix V_j (real
/// symmetric in symmetry class beta = 1). The fields are public so tests and
/// deterministic scenarios can assemble a realization directly;
/// build_potential() is the sampling contract for disordered draws.
struct PotentialRealization {
    int n_channels = 1;
    SymmetryClass beta{2};
    double h = 0.0;               ///< cell width (length units)
    std::vector<Mat> cells;       ///< V_j, each n_channels x n_channels Hermitian
    std::uint64_t master_seed = 0;
    std::uint64_t stream_id = 0;  ///< stream the cells were drawn from (0 if assembled by hand)

    [[nodiscard]] double length() const { return h * static_cast<double>(cells.size()); }
    /// Shape/Hermiticity sanity check; throws std::invalid_argument on failure.
    void validate() const;
};

/// Draw one disorder realization: independent Hermitian cells whose entries
/// carry the channel-isotropic pair correlator with variance scale sigma / h,
/// so the piecewise-constant potential converges to white noise as h -> 0.
/// Preconditions: h > 0, length a whole multiple of h, and h small enough to
/// resolve both the wavelength and the localization length
/// (h <= min(0.05 / k, xi / 1e4); the second bound is vacuous at sigma = 0).
/// sigma = 0 produces exactly-zero cells and consumes no randomness.
[[nodiscard]] PotentialRealization build_potential(const ModelParams& params, double h,
                                                   double length, RngStream rng);

/// Plain-text round-trippable storage: a header row with the shape and seed
/// metadata, then one row per (cell, entry) with split real/imag parts.
void save_potential_csv(const PotentialRealization& pot, const std::string& path);
[[nodiscard]] PotentialRealization load_potential_csv(const std::string& path);

/// Matrix wave frame at x = L for the Dirichlet initial data
/// Psi(0) = 0, Psi'(0) = 1. To keep long/strongly-localized runs inside
/// floating-point range the frame is stored rescaled: the true solution is
/// exp(log_scale) * (psi, dpsi), and the accumulated overlap integral
/// int_0^L Psi^dag Psi dx is exp(2 log_scale) * gram. In benign regimes
/// log_scale stays exactly 0 and the fields are the literal solution.
struct TransferSolution {
    Mat psi;                ///< Psi(L), rescaled
    Mat dpsi;               ///< Psi'(L), rescaled
    double log_scale = 0.0; ///< log of the positive factor divided out
    Mat gram;               ///< int_0^L Psi^dag Psi dx, rescaled (empty unless requested)
    bool has_gram = false;
};

/// Integrate -Psi'' + V Psi = energy * Psi across all cells by exact
/// propagation in each cell's eigenbasis. energy must be > 0 (open channels).
[[nodiscard]] TransferSolution transfer_solve(const PotentialRealization& pot, double energy,
                                              bool with_gram = false);

/// Same solve at several energies in one sweep; the per-cell eigenproblem is
/// energy-independent and is factored once, which is what makes
/// finite-difference energy derivatives affordable on long wires.
[[nodiscard]] std::vector<TransferSolution> transfer_solve_multi(
    const PotentialRealization& pot, const std::vector<double>& energies, bool with_gram = false);

/// Reflection matrix of the half-line scatterer at wave number k = sqrt(energy),
/// with incoming/outgoing plane waves referenced to x = L:
/// S = (k Psi - i Psi')(k Psi + i Psi')^{-1}, evaluated without forming the
/// log-derivative so resonant (near-singular Psi(L)) energies stay stable.
/// A unitarity defect above 1e-10 triggers one retry at energy * (1 + 1e-9),
/// accepted up to 1e-8; the energy actually used is written to *energy_used
/// when provided. Throws NumericalError if both attempts fail.
[[nodiscard]] UnitaryMatrix smatrix(const PotentialRealization& pot, double energy,
                                    double* energy_used = nullptr);

struct WignerSmithResult {
    HermitianMatrix q;                ///< time-delay matrix (time units)
    double hermiticity_residual = 0.0;  ///< pre-projection asymmetry, relative
    double fd_error_estimate = 0.0;   ///< Richardson estimate of the finite-difference error (NaN if skipped)
    double energy_used = 0.0;         ///< energy after any stability retry
};

/// Time-delay matrix from the energy derivative of S:
/// Q = -i S^dag [S(e + de) - S(e - de)] / (2 de), projected to Hermitian.
/// delta_energy = 0 selects the default step 1e-6 * energy; the relative step
/// must lie in [1e-8, 1e-4]. With richardson = true the difference is repeated
/// at de / 2 and the O(de^2) error estimate is attached.
[[nodiscard]] WignerSmithResult wigner_smith(const PotentialRealization& pot, double energy,
                                             double delta_energy = 0.0, bool richardson = true);

struct KreinFriedelReport {
    Mat lhs;               ///< int_0^L Psi^dag Psi dx for the unit-flux scattering states
    Mat rhs;               ///< (1/2pi) [Q + (S - S^dag)/(4 i energy)]
    double residual = 0.0;       ///< ||lhs - rhs||_F / ||rhs||_F
    double trace_residual = 0.0; ///< |tr lhs - tr rhs| / |tr rhs|
};

/// Self-consistency check tying the dwell time of the scattering states to
/// the time-delay matrix: for the exact S(energy) the two sides agree, so the
/// residual measures only the finite-difference and linear-algebra error.
[[nodiscard]] KreinFriedelReport krein_friedel_report(const PotentialRealization& pot,
                                                      double energy, double delta_energy = 0.0);
[[nodiscard]] double krein_friedel_residual(const PotentialRealization& pot, double energy,
                                            double delta_energy = 0.0);

}  // namespace wiredelay
