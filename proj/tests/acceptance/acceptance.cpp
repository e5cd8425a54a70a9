// Full-scale validation gate. Each numbered criterion exercises the
// toolkit end to end at production sample sizes and prints exactly one
// PASS/FAIL line; the exit code is nonzero iff any requested criterion
// failed. Run with no arguments for all twelve, or pass criterion numbers
// to run a subset (e.g. "acceptance 2 11").

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "wiredelay/experiments.hpp"
#include "wiredelay/microscopic.hpp"
#include "wiredelay/moments.hpp"
#include "wiredelay/noise.hpp"
#include "wiredelay/parallel.hpp"
#include "wiredelay/resolvent.hpp"
#include "wiredelay/rmt.hpp"

using namespace wiredelay;

namespace {

constexpr std::uint64_t kSeed = 20260825;
int g_workers = 1;

/// Disjoint stream families: one block per (criterion, sub-ensemble).
StreamKey acc_key(int criterion, std::uint64_t sub) {
    return StreamKey{kSeed, (static_cast<std::uint64_t>(criterion) << 40) | (sub << 24)};
}

ModelParams wire(int n, int beta) { return ModelParams(n, SymmetryClass(beta), 1.0, 1e-3); }

std::string fmt(const char* pattern, ...) {
    char buf[512];
    va_list args;
    va_start(args, pattern);
    std::vsnprintf(buf, sizeof(buf), pattern, args);
    va_end(args);
    return buf;
}

// ---------------------------------------------------------------------------
// 1. Increment correlator at one million samples per symmetry combination.
// ---------------------------------------------------------------------------
bool criterion_1(std::string& detail) {
    const std::vector<std::pair<int, int>> combos = {{2, 1}, {2, 2}, {4, 1}};
    double worst = 0.0;
    int flagged = 0;
    for (std::size_t i = 0; i < combos.size(); ++i) {
        const NoiseSpec spec(combos[i].first, SymmetryClass(combos[i].second), 1e-3);
        RngStream rng = acc_key(1, i).at(0);
        const CorrelatorReport rep = verify_correlator(spec, 1000000, rng);
        worst = std::max(worst, rep.worst_sigma);
        flagged += rep.flagged;
    }
    detail = fmt("pair correlator, 1e6 increments, 3 symmetry combos: worst %.2f sigma, "
                 "%d entries beyond 4 sigma",
                 worst, flagged);
    return flagged == 0;
}

// ---------------------------------------------------------------------------
// 2. Ensemble mean trace against the ballistic value, both backends.
// ---------------------------------------------------------------------------
bool criterion_2(std::string& detail) {
    const std::vector<double> xs = {0.5, 1.0, 2.0};
    bool ok = true;
    double worst_ratio = 0.0;
    std::string worst_tag = "-";
    std::uint64_t sub = 0;
    for (SdeBackend backend : {SdeBackend::kExpFunctional, SdeBackend::kDirectFlow}) {
        for (int n : {1, 2, 4}) {
            for (int b : {1, 2}) {
                const ModelParams p = wire(n, b);
                for (double x : xs) {
                    const double length = x * p.xi();
                    const McMomentResult mc = mc_moments(p, length, 10000, SdeConfig{},
                                                         acc_key(2, sub++), backend, g_workers);
                    const double closed = mean_trace(p, length);
                    const double dev = std::abs(mc.trace.mean() - closed);
                    const double bound =
                        std::max(3.0 * mc.trace.std_error(), 0.01 * std::abs(closed));
                    const double ratio = dev / bound;
                    if (ratio > worst_ratio) {
                        worst_ratio = ratio;
                        worst_tag = fmt("N=%d beta=%d L/xi=%g %s", n, b, x,
                                        backend == SdeBackend::kExpFunctional ? "functional"
                                                                              : "direct");
                    }
                    if (dev > bound) ok = false;
                }
            }
        }
    }
    detail = fmt("mean trace vs ballistic value, 36 runs x 1e4 trajectories: worst "
                 "deviation %.2f of bound (%s)",
                 worst_ratio, worst_tag.c_str());
    return ok;
}

// ---------------------------------------------------------------------------
// 3. Second moments against the closed forms (median-of-means estimator).
// ---------------------------------------------------------------------------
bool criterion_3(std::string& detail) {
    const std::vector<double> xs = {0.5, 1.0, 1.5};
    bool ok = true;
    double worst_z = 0.0;
    std::string worst_tag = "-";
    double degeneracy = 0.0;
    std::uint64_t sub = 0;
    for (int n : {1, 2, 3}) {
        for (int b : {1, 2}) {
            const ModelParams p = wire(n, b);
            for (double x : xs) {
                const double length = x * p.xi();
                const SecondMoments closed = second_moments(p, length);
                if (n == 1)
                    degeneracy = std::max(
                        degeneracy, std::abs(closed.sq_of_trace - closed.trace_of_square) /
                                        std::abs(closed.sq_of_trace));
                const McMomentResult mc =
                    mc_moments(p, length, 30000, SdeConfig{}, acc_key(3, sub++),
                               SdeBackend::kExpFunctional, g_workers);
                const struct {
                    const char* name;
                    double mc_value, mc_se, closed_value;
                } rows[] = {
                    {"sq_tr", mc.trace_squared.median_of_means(),
                     mc.trace_squared.mom_std_error(), closed.sq_of_trace},
                    {"tr_sq", mc.trace_of_square.median_of_means(),
                     mc.trace_of_square.mom_std_error(), closed.trace_of_square},
                };
                for (const auto& r : rows) {
                    const double z = std::abs(r.mc_value - r.closed_value) / r.mc_se;
                    if (z > worst_z) {
                        worst_z = z;
                        worst_tag = fmt("N=%d beta=%d L/xi=%g %s", n, b, x, r.name);
                    }
                    if (z > 3.0) ok = false;
                }
            }
        }
    }
    if (degeneracy > 1e-12) ok = false;
    detail = fmt("second moments vs closed forms, 3e4 trajectories: worst %.2f sigma (%s); "
                 "single-channel closed-form degeneracy %.1e",
                 worst_z, worst_tag.c_str(), degeneracy);
    return ok;
}

// ---------------------------------------------------------------------------
// 4. Independent ODE integration of the moment system vs the closed forms.
// ---------------------------------------------------------------------------
bool criterion_4(std::string& detail) {
    double worst = 0.0;
    for (int n : {1, 2, 3, 4}) {
        for (int b : {1, 2}) {
            const ModelParams p = wire(n, b);
            for (double x : {0.5, 1.0, 1.5, 2.0}) {
                const double length = x * p.xi();
                const SecondMoments closed = second_moments(p, length);
                const SecondMoments ode = integrate_moment_ode(p, length);
                worst = std::max(worst, std::abs(ode.sq_of_trace - closed.sq_of_trace) /
                                            std::abs(closed.sq_of_trace));
                worst = std::max(worst, std::abs(ode.trace_of_square - closed.trace_of_square) /
                                            std::abs(closed.trace_of_square));
            }
        }
    }
    detail = fmt("moment ODE vs closed forms over the full lattice: worst relative error %.2e",
                 worst);
    return worst <= 1e-8;
}

// ---------------------------------------------------------------------------
// 5. Long-wire limit of the inverse delay matrix.
// ---------------------------------------------------------------------------
HermitianMatrix draw_limit_sample(const ModelParams& p, const StreamKey& key, std::uint64_t t,
                                  std::uint64_t n_draws) {
    for (int attempt = 0;; ++attempt) {
        try {
            return dufresne_limit_sample(p, 8.0, SdeConfig{}, key.at(t + attempt * n_draws));
        } catch (const NumericalError&) {
            if (attempt >= 2) throw;
        }
    }
}

bool criterion_5(std::string& detail) {
    bool ok = true;
    std::ostringstream note;

    {  // (a) single channel: limit law is exponential with rate 1/2.
        const ModelParams p = wire(1, 2);
        const StreamKey key = acc_key(5, 0);
        constexpr std::uint64_t kDraws = 10000;
        std::vector<double> values(kDraws);
        parallel_for_indexed(kDraws, g_workers, [&](std::uint64_t t) {
            values[t] = draw_limit_sample(p, key, t, kDraws).trace_real();
        });
        const double ks = ks_statistic(
            values, [](double g) { return g <= 0.0 ? 0.0 : 1.0 - std::exp(-0.5 * g); });
        const double critical = ks_critical(kDraws, 0.01);
        if (ks > critical) ok = false;
        note << fmt("KS %.4f (crit %.4f)", ks, critical);
    }

    double worst_mean_z = 0.0, worst_cross_z = 0.0;
    std::uint64_t sub = 1;
    for (int n : {2, 3}) {
        for (int b : {1, 2}) {
            const ModelParams p = wire(n, b);
            constexpr std::uint64_t kDraws = 4000;
            const StreamKey key = acc_key(5, sub++);
            const StreamKey ref_key = acc_key(5, sub++);

            std::vector<double> traces(kDraws);
            parallel_for_indexed(kDraws, g_workers, [&](std::uint64_t t) {
                traces[t] = draw_limit_sample(p, key, t, kDraws).trace_real();
            });
            std::vector<double> ref_traces(kDraws);
            const WishartSpec spec(n, p.beta, p.mu());
            parallel_for_indexed(kDraws, g_workers, [&](std::uint64_t t) {
                RngStream rng = ref_key.at(t);
                const SpectralSample s = sample_wishart_eigs(spec, rng);
                double tr = 0.0;
                for (double e : s.eigenvalues) tr += e;
                ref_traces[t] = tr;
            });

            EnsembleStats m1, m2, r1, r2;
            for (std::uint64_t t = 0; t < kDraws; ++t) {
                m1.add(traces[t]);
                m2.add(traces[t] * traces[t]);
                r1.add(ref_traces[t]);
                r2.add(ref_traces[t] * ref_traces[t]);
            }
            // (b) first moment against the closed value 2 N mu.
            const double closed = 2.0 * n * p.mu();
            const double z_closed = std::abs(m1.mean() - closed) / m1.std_error();
            worst_mean_z = std::max(worst_mean_z, z_closed);
            if (z_closed > 3.0) ok = false;
            // (c) first two trace moments against the spectral sampler.
            const double z1 = std::abs(m1.mean() - r1.mean()) /
                              std::hypot(m1.std_error(), r1.std_error());
            const double z2 = std::abs(m2.mean() - r2.mean()) /
                              std::hypot(m2.std_error(), r2.std_error());
            worst_cross_z = std::max(worst_cross_z, std::max(z1, z2));
            if (z1 > 3.0 || z2 > 3.0) ok = false;
        }
    }
    detail = fmt("long-wire inverse-delay limit: %s; mean-trace worst %.2f sigma; "
                 "sampler cross-check worst %.2f sigma",
                 note.str().c_str(), worst_mean_z, worst_cross_z);
    return ok;
}

// ---------------------------------------------------------------------------
// 6. Coupled unitary-pair flow vs the reduced delay-matrix flow.
// ---------------------------------------------------------------------------
bool criterion_6(std::string& detail) {
    bool ok = true;
    double worst_z = 0.0;
    std::uint64_t sub = 0;
    for (int b : {1, 2}) {
        const ModelParams p = wire(2, b);
        const double length = p.xi();
        constexpr std::uint64_t kTraj = 10000;
        const StreamKey key_direct = acc_key(6, sub++);
        const StreamKey key_coupled = acc_key(6, sub++);

        std::vector<double> direct(kTraj), coupled(kTraj);
        parallel_for_indexed(kTraj, g_workers, [&](std::uint64_t t) {
            direct[t] = integrate_qtilde(p, length, SdeConfig{}, key_direct.at(t)).trace_real();
            coupled[t] =
                integrate_coupled(p, length, SdeConfig{}, key_coupled.at(t)).qtilde.trace_real();
        });
        EnsembleStats d1, c1, d2, c2;
        for (std::uint64_t t = 0; t < kTraj; ++t) {
            d1.add(direct[t]);
            c1.add(coupled[t]);
            d2.add(direct[t] * direct[t]);
            c2.add(coupled[t] * coupled[t]);
        }
        const double z_mean =
            std::abs(d1.mean() - c1.mean()) / std::hypot(d1.std_error(), c1.std_error());
        const double z_sq = std::abs(d2.median_of_means() - c2.median_of_means()) /
                            std::hypot(d2.mom_std_error(), c2.mom_std_error());
        worst_z = std::max(worst_z, std::max(z_mean, z_sq));
        if (z_mean > 3.0 || z_sq > 3.0) ok = false;
    }
    detail = fmt("coupled flow vs reduced flow, N=2, both classes, 1e4 each: worst %.2f "
                 "combined sigma",
                 worst_z);
    return ok;
}

// ---------------------------------------------------------------------------
// 7. Hermitian-noise functional vs independent-entry-noise functional.
// ---------------------------------------------------------------------------
bool criterion_7(std::string& detail) {
    bool ok = true;
    double worst_z = 0.0;
    std::uint64_t sub = 0;
    for (int b : {1, 2}) {
        const ModelParams p = wire(2, b);
        constexpr std::uint64_t kTraj = 10000;
        const StreamKey key_h = acc_key(7, sub++);
        const StreamKey key_g = acc_key(7, sub++);
        std::vector<double> herm(kTraj), gini(kTraj);
        parallel_for_indexed(kTraj, g_workers, [&](std::uint64_t t) {
            herm[t] = exp_functional_raw(p, 1.0, SdeConfig{}, key_h.at(t)).trace().real();
            gini[t] = integrate_rider_valko(p.mu(), 2, p.beta, 1.0, SdeConfig{}, key_g.at(t))
                          .integral.trace()
                          .real();
        });
        EnsembleStats h1, g1, h2, g2;
        for (std::uint64_t t = 0; t < kTraj; ++t) {
            h1.add(herm[t]);
            g1.add(gini[t]);
            h2.add(herm[t] * herm[t]);
            g2.add(gini[t] * gini[t]);
        }
        const double z_mean =
            std::abs(h1.mean() - g1.mean()) / std::hypot(h1.std_error(), g1.std_error());
        const double z_sq = std::abs(h2.median_of_means() - g2.median_of_means()) /
                            std::hypot(h2.mom_std_error(), g2.mom_std_error());
        worst_z = std::max(worst_z, std::max(z_mean, z_sq));
        if (z_mean > 3.0 || z_sq > 3.0) ok = false;
    }
    detail = fmt("two noise conventions, matched decay rate, N=2, 1e4 each: worst %.2f "
                 "combined sigma",
                 worst_z);
    return ok;
}

// ---------------------------------------------------------------------------
// 8. Growth-rate spectrum of the linear flow.
// ---------------------------------------------------------------------------
bool criterion_8(std::string& detail) {
    bool ok = true;
    double worst_z = 0.0;
    std::string worst_tag = "-";
    std::uint64_t sub = 0;
    for (int n : {2, 3}) {
        for (int b : {1, 2}) {
            const ModelParams p = wire(n, b);
            const StreamKey key = acc_key(8, sub++);
            const std::vector<Estimate> pure =
                lyapunov_spectrum(p, 1000.0, SdeConfig{}, key.at(0), true);
            const std::vector<Estimate> full =
                lyapunov_spectrum(p, 1000.0, SdeConfig{}, key.at(1));
            for (int i = 0; i < n; ++i) {
                const double predicted = 0.5 * b * (n - 2 * (i + 1) + 1);
                const double z = std::abs(pure[static_cast<std::size_t>(i)].value - predicted) /
                                 pure[static_cast<std::size_t>(i)].std_error;
                if (z > worst_z) {
                    worst_z = z;
                    worst_tag = fmt("noise-only N=%d beta=%d #%d", n, b, i + 1);
                }
                if (z > 3.0) ok = false;
            }
            const double z_top = std::abs(full.front().value + 1.0) / full.front().std_error;
            if (z_top > worst_z) {
                worst_z = z_top;
                worst_tag = fmt("full top N=%d beta=%d", n, b);
            }
            if (z_top > 3.0) ok = false;
        }
    }
    detail = fmt("growth rates over 1e3 localization lengths: worst %.2f sigma (%s)", worst_z,
                 worst_tag.c_str());
    return ok;
}

// ---------------------------------------------------------------------------
// 9. Dwell-time identity on exact solver output.
// ---------------------------------------------------------------------------
bool criterion_9(std::string& detail) {
    const double energy = 1.0;
    const double de = 5e-7;  // relative FD step 5e-7 of the energy
    double worst = 0.0;
    bool ok = true;
    double ratio_lo = 1e300, ratio_hi = 0.0;
    for (int n : {1, 2}) {
        const ModelParams p(n, SymmetryClass(1), 1.0, 1e-3);
        const StreamKey key = acc_key(9, static_cast<std::uint64_t>(n));
        std::vector<double> residuals(10);
        parallel_for_indexed(10, g_workers, [&](std::uint64_t t) {
            const PotentialRealization pot = build_potential(p, 0.05, 1000.0, key.at(t));
            residuals[t] = krein_friedel_residual(pot, energy, de);
        });
        for (double r : residuals) {
            worst = std::max(worst, r);
            if (r > 1e-6) ok = false;
        }
        // Quadratic convergence in the finite-difference step.
        const PotentialRealization pot = build_potential(p, 0.05, 1000.0, key.at(0));
        const double ratio = krein_friedel_residual(pot, energy, 2e-6) /
                             krein_friedel_residual(pot, energy, 1e-6);
        ratio_lo = std::min(ratio_lo, ratio);
        ratio_hi = std::max(ratio_hi, ratio);
        if (ratio < 3.5 || ratio > 4.5) ok = false;
    }
    detail = fmt("dwell-time identity, 10 realizations x N in {1,2}: worst residual %.2e "
                 "(bound 1e-6); step-halving ratio %.2f..%.2f (expect 4)",
                 worst, ratio_lo, ratio_hi);
    return ok;
}

// ---------------------------------------------------------------------------
// 10. Wave-equation ensemble vs the effective description at one
// localization length.
// ---------------------------------------------------------------------------
bool criterion_10(std::string& detail) {
    bool ok = true;
    std::ostringstream note;
    for (int n : {1, 2}) {
        const ModelParams p(n, SymmetryClass(1), 1.0, 1e-3);
        const double h = 0.05;
        const auto n_cells = static_cast<std::uint64_t>(std::llround(p.xi() / h));
        const double length = h * static_cast<double>(n_cells);
        constexpr std::uint64_t kReal = 1000;
        const StreamKey key = acc_key(10, static_cast<std::uint64_t>(n));

        std::vector<double> traces(kReal);
        parallel_for_indexed(kReal, g_workers, [&](std::uint64_t t) {
            const PotentialRealization pot = build_potential(p, h, length, key.at(t));
            traces[t] = wigner_smith(pot, 1.0, 0.0, false).q.trace_real();
        });
        EnsembleStats m1, m2;
        for (double tr : traces) {
            m1.add(tr);
            m2.add(tr * tr);
        }
        const double ballistic = mean_trace(p, length);
        const double z = std::abs(m1.mean() - ballistic) / m1.std_error();
        const double closed_sq = second_moments(p, length).sq_of_trace;
        const double rel_sq = std::abs(m2.mean() - closed_sq) / closed_sq;
        if (z > 3.0) ok = false;
        if (rel_sq > 0.10) ok = false;
        note << fmt("[N=%d: mean %.2f sigma, squared-trace dev %.1f%%] ", n, z, 100.0 * rel_sq);
    }
    detail = fmt("wave-equation ensemble at one localization length, 1e3 realizations: %s",
                 note.str().c_str());
    return ok;
}

// ---------------------------------------------------------------------------
// 11. Spectral-density flow: conservation, growth law, stationary limit,
// histogram comparison.
// ---------------------------------------------------------------------------
double binned_l1(const DensityCurve& fine, const DensityCurve& hist) {
    const double width = hist.lambda_grid[1] - hist.lambda_grid[0];
    double acc = 0.0;
    for (std::size_t b = 0; b < hist.lambda_grid.size(); ++b) {
        const double lo = hist.lambda_grid[b] - 0.5 * width;
        const double hi = hist.lambda_grid[b] + 0.5 * width;
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < fine.lambda_grid.size(); ++i) {
            if (fine.lambda_grid[i] < lo || fine.lambda_grid[i] >= hi) continue;
            sum += fine.rho[i];
            ++count;
        }
        if (count == 0) throw std::invalid_argument("binned_l1: fine grid misses a bin");
        acc += std::abs(sum / static_cast<double>(count) - hist.rho[b]) * width;
    }
    return acc;
}

bool criterion_11(std::string& detail) {
    const SymmetryClass beta(2);
    ResolventGridConfig grid;  // acceptance-grade defaults
    grid.s_max = 24.0;
    grid.n_snapshots = 25;  // snapshot spacing 1 in rescaled length
    const ResolventField field = solve_resolvent_pde(grid, beta);

    // (a) mass conservation drift per unit rescaled length.
    double drift = 0.0;
    for (std::size_t j = 1; j < field.s_grid.size(); ++j)
        drift = std::max(drift, std::abs(field.mass[j] - 1.0) / field.s_grid[j]);
    const bool ok_a = drift <= 1e-3;

    // (b) growth rate of the first spectral moment (fitted while the whole
    // distribution is still well inside the fine part of the grid).
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t j = 0; j < field.s_grid.size() && field.s_grid[j] <= 8.0; ++j) {
        sxy += field.s_grid[j] * field.first_moment[j];
        sxx += field.s_grid[j] * field.s_grid[j];
    }
    const double slope = sxy / sxx;
    const bool ok_b = std::abs(slope - 1.0) <= 0.005;

    // (c) long-length density against the stationary curve on the readout
    // window.
    const DensityCurve late = density_from_resolvent(field, grid.s_max);
    DensityCurve stat;
    stat.lambda_grid = late.lambda_grid;
    stat.s = late.s;
    stat.rho.reserve(stat.lambda_grid.size());
    for (double l : stat.lambda_grid) stat.rho.push_back(stationary_density(beta, l));
    const double stat_l1 = density_l1_distance(late, stat);
    const bool ok_c = stat_l1 <= 0.02;

    // (d) histogram comparison at two intermediate lengths, 32 channels,
    // 1e4 draws each.
    const ModelParams p(32, beta, 1.0, 1e-3);
    SdeConfig sim;
    sim.dx = 6.25e-4;
    bool ok_d = true;
    std::ostringstream dnote;
    const struct {
        double s, hi;
        int bins;
    } panels[] = {{1.0, 4.0, 40}, {2.0, 8.0, 64}};
    for (std::size_t i = 0; i < 2; ++i) {
        const double s = panels[i].s;
        const double length = s / 32.0 * p.xi();
        const DensityCurve emp =
            empirical_density(p, length, 10000, sim, acc_key(11, i), 0.0, panels[i].hi,
                              panels[i].bins, g_workers);
        const double dist = binned_l1(density_from_resolvent(field, s), emp);
        if (dist > 0.05) ok_d = false;
        dnote << fmt("L1(s=%g)=%.4f ", s, dist);
    }

    detail = fmt("density flow: mass drift %.1e/unit length; moment slope %.4f; stationary "
                 "L1 %.4f; histogram %s(bounds 1e-3, 0.5%%, 0.02, 0.05)",
                 drift, slope, stat_l1, dnote.str().c_str());
    return ok_a && ok_b && ok_c && ok_d;
}

// ---------------------------------------------------------------------------
// 12. Byte-identical experiment outputs across reruns and worker counts.
// ---------------------------------------------------------------------------
std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool criterion_12(std::string& detail) {
    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / "wiredelay_acceptance_repro";
    fs::remove_all(base);

    bool ok = true;
    std::ostringstream note;
    const struct {
        ExperimentKind kind;
        std::uint64_t n_traj;
        const char* data_file;
    } cases[] = {
        {ExperimentKind::Moments, 200, "moments.csv"},
        {ExperimentKind::Dufresne, 60, "dufresne_spectra.csv"},
    };
    for (const auto& c : cases) {
        ExperimentConfig cfg;
        cfg.experiment = c.kind;
        cfg.n_traj = c.n_traj;
        cfg.master_seed = kSeed;
        cfg.output.directory = (base / (std::string(experiment_name(c.kind)) + "_a")).string();
        const RunOutcome a = run_experiment(cfg, 1);
        cfg.output.directory = (base / (std::string(experiment_name(c.kind)) + "_b")).string();
        const RunOutcome b = run_experiment(cfg, 3);

        const std::string da = slurp(fs::path(a.files.front()).parent_path() / c.data_file);
        const std::string db = slurp(fs::path(b.files.front()).parent_path() / c.data_file);
        const std::string sa = slurp(fs::path(a.files.front()).parent_path() / "summary.json");
        const std::string sb = slurp(fs::path(b.files.front()).parent_path() / "summary.json");
        const bool same = !da.empty() && da == db && !sa.empty() && sa == sb;
        if (!same) ok = false;
        note << experiment_name(c.kind) << (same ? " identical; " : " DIFFERS; ");
    }
    fs::remove_all(base);
    detail = fmt("1 vs 3 workers, same seed: %s", note.str().c_str());
    return ok;
}

using CriterionFn = bool (*)(std::string&);

struct Criterion {
    int number;
    CriterionFn fn;
};

const Criterion kCriteria[] = {
    {1, criterion_1},  {2, criterion_2},  {3, criterion_3},  {4, criterion_4},
    {5, criterion_5},  {6, criterion_6},  {7, criterion_7},  {8, criterion_8},
    {9, criterion_9},  {10, criterion_10}, {11, criterion_11}, {12, criterion_12},
};

}  // namespace

int main(int argc, char** argv) {
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--workers" && i + 1 < argc) {
            g_workers = std::max(1, std::atoi(argv[++i]));
            continue;
        }
        const int n = std::atoi(arg.c_str());
        if (n < 1 || n > 12) {
            std::fprintf(stderr, "usage: %s [--workers K] [criterion numbers 1..12]\n", argv[0]);
            return 2;
        }
        selected.insert(n);
    }

    int failed = 0, run_count = 0;
    for (const Criterion& c : kCriteria) {
        if (!selected.empty() && !selected.count(c.number)) continue;
        ++run_count;
        std::string det;
        bool pass = false;
        try {
            pass = c.fn(det);
        } catch (const std::exception& e) {
            det = std::string("aborted: ") + e.what();
        }
        if (!pass) ++failed;
        std::printf("CRITERION %2d %s  %s\n", c.number, pass ? "PASS" : "FAIL", det.c_str());
        std::fflush(stdout);
    }
    if (run_count > 1)
        std::printf("ACCEPTANCE SUMMARY: %d/%d criteria passed\n", run_count - failed,
                    run_count);
    return failed == 0 ? 0 : 1;
}
