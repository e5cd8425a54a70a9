#pragma once

#include <vector>

#include "wiredelay/linalg.hpp"
#include "wiredelay/model.hpp"
#include "wiredelay/rng.hpp"

namespace wiredelay {

/// Parameters of one isotropic Hermitian white-noise increment.
struct NoiseSpec {
    int dim = 1;
    SymmetryClass beta{2};
    double dx = 1e-3;

    NoiseSpec(int n, SymmetryClass b, double dx_) : dim(n), beta(b), dx(dx_) {
        check_dim(n, "NoiseSpec");
        if (!(dx > 0.0)) throw std::invalid_argument("NoiseSpec: dx must be > 0");
    }
};

/// Channel-isotropic pair correlator
/// C_{ab,cd} = (beta/2) d_ac d_bd + (1 - beta/2) d_ad d_bc.
[[nodiscard]] double correlator_expected(const SymmetryClass& beta, int a, int b, int c, int d);

/// One Hermitian increment dB with E[dB_ab dB*_cd] = C_{ab,cd} dx.
/// Entries are sampled upper-triangle row-major (diagonal first in each row),
/// so the uniform consumption per increment is fixed.
[[nodiscard]] HermitianMatrix sample_increment(const NoiseSpec& spec, RngStream& rng);

/// Same draw, written into a caller-owned matrix (no allocation when `out`
/// already has the right shape); identical consumption order and values.
void fill_increment(const NoiseSpec& spec, RngStream& rng, Mat& out);

/// Raw (non-Hermitian) Ginibre-type increment: all entries independent,
/// real N(0, dx) for beta=1, and N(0, dx) + i N(0, dx) for beta=2 so that the
/// Hermitian part carries exactly the isotropic correlator above.
[[nodiscard]] Mat sample_ginibre_increment(const NoiseSpec& spec, RngStream& rng);

/// Allocation-free variant of the Ginibre draw, same order and values.
void fill_ginibre_increment(const NoiseSpec& spec, RngStream& rng, Mat& out);

struct CorrelatorEntry {
    int a, b, c, d;
    Complex empirical;   ///< mean of dB_ab conj(dB_cd) / dx
    double expected;     ///< C_{ab,cd} (real for both symmetry classes)
    double se_re, se_im; ///< Monte Carlo standard errors per component
    double max_sigma;    ///< worst |empirical - expected| / se over components
};

struct CorrelatorReport {
    std::vector<CorrelatorEntry> entries;  ///< all N^4 index quadruples
    int flagged = 0;                       ///< entries beyond 4 standard errors
    double worst_sigma = 0.0;
};

/// Empirical check of the increment correlator over n_samples draws.
[[nodiscard]] CorrelatorReport verify_correlator(const NoiseSpec& spec, std::size_t n_samples,
                                                 RngStream& rng);

struct SandwichReport {
    Mat empirical;  ///< mean of dB * O * dB / dx
    Mat expected;   ///< (beta/2) tr(O) 1 + (1 - beta/2) O^T
    Mat se;         ///< per-entry standard error (max of components, stored real)
    double worst_sigma = 0.0;
};

/// Empirical check of the quadratic ("sandwich") rule E[dB O dB].
[[nodiscard]] SandwichReport sandwich_check(const NoiseSpec& spec, const Mat& O,
                                            std::size_t n_samples, RngStream& rng);

}  // namespace wiredelay
