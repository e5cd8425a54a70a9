#include "wiredelay/noise.hpp"

#include "wiredelay/stats.hpp"

#include <cmath>

namespace wiredelay {

double correlator_expected(const SymmetryClass& beta, int a, int b, int c, int d) {
    double half_beta = 0.5 * beta.beta;
    return half_beta * ((a == c && b == d) ? 1.0 : 0.0) +
           (1.0 - half_beta) * ((a == d && b == c) ? 1.0 : 0.0);
}

void fill_increment(const NoiseSpec& spec, RngStream& rng, Mat& out) {
    const int n = spec.dim;
    const double sd_diag = std::sqrt(spec.dx);
    const double sd_off = std::sqrt(0.5 * spec.dx);
    out.resize(n, n);
    for (int a = 0; a < n; ++a) {
        out(a, a) = Complex(sd_diag * rng.next_normal(), 0.0);
        for (int b = a + 1; b < n; ++b) {
            if (spec.beta.beta == 1) {
                double x = sd_off * rng.next_normal();
                out(a, b) = Complex(x, 0.0);
                out(b, a) = Complex(x, 0.0);
            } else {
                double re = sd_off * rng.next_normal();
                double im = sd_off * rng.next_normal();
                out(a, b) = Complex(re, im);
                out(b, a) = Complex(re, -im);
            }
        }
    }
}

HermitianMatrix sample_increment(const NoiseSpec& spec, RngStream& rng) {
    Mat m;
    fill_increment(spec, rng, m);
    return HermitianMatrix::project(m);
}

void fill_ginibre_increment(const NoiseSpec& spec, RngStream& rng, Mat& out) {
    const int n = spec.dim;
    const double sd = std::sqrt(spec.dx);
    out.resize(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            if (spec.beta.beta == 1) {
                out(a, b) = Complex(sd * rng.next_normal(), 0.0);
            } else {
                out(a, b) = Complex(sd * rng.next_normal(), sd * rng.next_normal());
            }
        }
}

Mat sample_ginibre_increment(const NoiseSpec& spec, RngStream& rng) {
    Mat m;
    fill_ginibre_increment(spec, rng, m);
    return m;
}

CorrelatorReport verify_correlator(const NoiseSpec& spec, std::size_t n_samples, RngStream& rng) {
    if (n_samples < 10000)
        throw std::invalid_argument("verify_correlator: need at least 1e4 samples");
    const int n = spec.dim;
    const std::size_t pairs = static_cast<std::size_t>(n) * n;
    std::vector<ScalarAccumulator> acc_re(pairs * pairs), acc_im(pairs * pairs);

    std::vector<Complex> flat(pairs);
    for (std::size_t s = 0; s < n_samples; ++s) {
        HermitianMatrix db = sample_increment(spec, rng);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) flat[static_cast<std::size_t>(a) * n + b] = db.mat()(a, b);
        for (std::size_t p = 0; p < pairs; ++p)
            for (std::size_t q = 0; q < pairs; ++q) {
                Complex prod = flat[p] * std::conj(flat[q]) / spec.dx;
                acc_re[p * pairs + q].add(prod.real());
                acc_im[p * pairs + q].add(prod.imag());
            }
    }

    CorrelatorReport rep;
    rep.entries.reserve(pairs * pairs);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    std::size_t idx = (static_cast<std::size_t>(a) * n + b) * pairs +
                                      static_cast<std::size_t>(c) * n + d;
                    CorrelatorEntry e{a, b, c, d,
                                      Complex(acc_re[idx].mean(), acc_im[idx].mean()),
                                      correlator_expected(spec.beta, a, b, c, d),
                                      acc_re[idx].std_error(), acc_im[idx].std_error(), 0.0};
                    double zr = e.se_re > 0 ? std::abs(e.empirical.real() - e.expected) / e.se_re : 0.0;
                    // A deterministically-zero imaginary part has se == 0; skip it.
                    double zi = e.se_im > 0 ? std::abs(e.empirical.imag()) / e.se_im : 0.0;
                    e.max_sigma = std::max(zr, zi);
                    rep.worst_sigma = std::max(rep.worst_sigma, e.max_sigma);
                    if (e.max_sigma > 4.0) ++rep.flagged;
                    rep.entries.push_back(e);
                }
    return rep;
}

SandwichReport sandwich_check(const NoiseSpec& spec, const Mat& O, std::size_t n_samples,
                              RngStream& rng) {
    const int n = spec.dim;
    if (O.rows() != n || O.cols() != n)
        throw std::invalid_argument("sandwich_check: O dimension mismatch");
    std::vector<ScalarAccumulator> acc_re(static_cast<std::size_t>(n) * n),
        acc_im(static_cast<std::size_t>(n) * n);
    for (std::size_t s = 0; s < n_samples; ++s) {
        HermitianMatrix db = sample_increment(spec, rng);
        Mat prod = db.mat() * O * db.mat() / spec.dx;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                acc_re[static_cast<std::size_t>(j) * n + i].add(prod(i, j).real());
                acc_im[static_cast<std::size_t>(j) * n + i].add(prod(i, j).imag());
            }
    }

    SandwichReport rep;
    rep.empirical = Mat(n, n);
    rep.se = Mat(n, n);
    double half_beta = 0.5 * spec.beta.beta;
    rep.expected = half_beta * O.trace() * Mat::Identity(n, n) + (1.0 - half_beta) * O.transpose();
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            std::size_t idx = static_cast<std::size_t>(j) * n + i;
            rep.empirical(i, j) = Complex(acc_re[idx].mean(), acc_im[idx].mean());
            double sr = acc_re[idx].std_error(), si = acc_im[idx].std_error();
            rep.se(i, j) = Complex(sr, si);
            double zr = sr > 0 ? std::abs(rep.empirical(i, j).real() - rep.expected(i, j).real()) / sr
                               : 0.0;
            double zi = si > 0 ? std::abs(rep.empirical(i, j).imag() - rep.expected(i, j).imag()) / si
                               : 0.0;
            rep.worst_sigma = std::max({rep.worst_sigma, zr, zi});
        }
    return rep;
}

}  // namespace wiredelay
