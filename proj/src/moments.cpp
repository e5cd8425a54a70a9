#include "wiredelay/moments.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "wiredelay/parallel.hpp"

namespace wiredelay {

double expm1_minus_x(double u) {
    if (std::abs(u) < 1e-3) {
        // sum_{n>=2} u^n / n! in Horner form, truncated at n = 7
        return 0.5 * u * u *
               (1.0 + u / 3.0 * (1.0 + u / 4.0 * (1.0 + u / 5.0 * (1.0 + u / 6.0 * (1.0 + u / 7.0)))));
    }
    return std::expm1(u) - u;
}

double mean_trace(const ModelParams& params, double length) {
    return static_cast<double>(params.n_channels) * length / params.k;
}

SecondMoments second_moments(const ModelParams& params, double length) {
    const double x = length / params.xi();
    const double tau = params.tau_xi();
    const double n = static_cast<double>(params.n_channels);
    const double b = static_cast<double>(params.beta.beta);
    const double c = 1.0 / (1.0 + b / 2.0);
    const double grow = expm1_minus_x(4.0 * x);
    const double decay = expm1_minus_x(-2.0 * b * x);
    const double front = 0.5 * n * tau * tau;
    SecondMoments out;
    out.sq_of_trace = front * ((1.0 + b * n / 2.0) * c * grow + (4.0 / (b * b)) * (n - 1.0) * c * decay);
    out.trace_of_square = front * ((1.0 + b * n / 2.0) * c * grow - (2.0 / b) * (n - 1.0) * c * decay);
    out.difference = 2.0 * tau * tau * n * (n - 1.0) * decay / (b * b);
    return out;
}

ProperTimeStats proper_time_stats(const ModelParams& params, double length) {
    if (params.n_channels < 2) {
        throw std::invalid_argument(
            "proper_time_stats: cross-channel statistics need at least two channels");
    }
    const double n = static_cast<double>(params.n_channels);
    const SecondMoments m = second_moments(params, length);
    ProperTimeStats out;
    out.mean = length / params.k;
    out.second = m.trace_of_square / n;
    out.cross = m.difference / (n * (n - 1.0));
    out.variance = out.second - out.mean * out.mean;
    out.covariance = out.cross - out.mean * out.mean;
    return out;
}

RealMat moment_matrix(SymmetryClass beta) {
    const double b = static_cast<double>(beta.beta);
    RealMat m(2, 2);
    m << 0.0, 1.0, b / 2.0, 1.0 - b / 2.0;
    return m;
}

MomentSpectral moment_spectral(SymmetryClass beta) {
    const double b = static_cast<double>(beta.beta);
    const double c = 1.0 / (1.0 + b / 2.0);
    MomentSpectral out;
    out.lambda_plus = 1.0;
    out.lambda_minus = -b / 2.0;
    out.proj_plus = RealMat(2, 2);
    out.proj_plus << b / 2.0, 1.0, b / 2.0, 1.0;
    out.proj_plus *= c;
    out.proj_minus = RealMat(2, 2);
    out.proj_minus << 1.0, -1.0, -b / 2.0, b / 2.0;
    out.proj_minus *= c;
    return out;
}

SecondMoments integrate_moment_ode(const ModelParams& params, double length,
                                   std::int64_t n_steps) {
    const double x = length / params.xi();
    if (n_steps <= 0) {
        n_steps = std::max<std::int64_t>(1000, static_cast<std::int64_t>(std::ceil(4096.0 * x)));
    }
    const double h = length / static_cast<double>(n_steps);
    const double n = static_cast<double>(params.n_channels);
    const double k2 = params.k * params.k;
    const RealMat coupling = (4.0 / params.xi()) * moment_matrix(params.beta);
    Eigen::Vector2d source_dir(n, 1.0);
    auto rhs = [&](double ell, const Eigen::Vector2d& v) -> Eigen::Vector2d {
        return (2.0 * n * ell / k2) * source_dir + coupling * v;
    };
    Eigen::Vector2d v = Eigen::Vector2d::Zero();
    double ell = 0.0;
    for (std::int64_t i = 0; i < n_steps; ++i) {
        const Eigen::Vector2d k1 = rhs(ell, v);
        const Eigen::Vector2d k2v = rhs(ell + 0.5 * h, v + 0.5 * h * k1);
        const Eigen::Vector2d k3 = rhs(ell + 0.5 * h, v + 0.5 * h * k2v);
        const Eigen::Vector2d k4 = rhs(ell + h, v + h * k3);
        v += (h / 6.0) * (k1 + 2.0 * k2v + 2.0 * k3 + k4);
        ell += h;
    }
    SecondMoments out;
    out.sq_of_trace = v(0);
    out.trace_of_square = v(1);
    out.difference = v(0) - v(1);
    return out;
}

McMomentResult mc_moments(const ModelParams& params, double length, std::uint64_t n_traj,
                          const SdeConfig& cfg, const StreamKey& key, SdeBackend backend,
                          int workers) {
    std::vector<double> tr(n_traj), tr_sq(n_traj), sq_tr(n_traj);
    parallel_for_indexed(n_traj, workers, [&](std::uint64_t t) {
        const HermitianMatrix q = (backend == SdeBackend::kExpFunctional)
                                      ? exp_functional(params, length, cfg, key.at(t))
                                      : integrate_qtilde(params, length, cfg, key.at(t));
        const double trace = q.trace_real();
        tr[t] = trace;
        sq_tr[t] = trace * trace;
        tr_sq[t] = q.mat().squaredNorm();  // tr(Q^2) for Hermitian Q
    });
    McMomentResult out;
    for (std::uint64_t t = 0; t < n_traj; ++t) {
        out.trace.add(tr[t]);
        out.trace_squared.add(sq_tr[t]);
        out.trace_of_square.add(tr_sq[t]);
    }
    return out;
}

MomentReport moment_report_rows(const ModelParams& params, double length,
                                const McMomentResult& mc) {
    const double x = length / params.xi();
    const SecondMoments closed = second_moments(params, length);
    const SecondMoments ode = integrate_moment_ode(params, length);
    MomentReport rows;
    MomentRow base;
    base.n_channels = params.n_channels;
    base.beta = params.beta.beta;
    base.L_over_xi = x;

    MomentRow r = base;
    r.quantity = "mean_trace";
    r.closed = mean_trace(params, length);
    r.ode = r.closed;
    r.mc = mc.trace.mean();
    r.mc_std_error = mc.trace.std_error();
    rows.push_back(r);

    r = base;
    r.quantity = "sq_of_trace";
    r.closed = closed.sq_of_trace;
    r.ode = ode.sq_of_trace;
    r.mc = mc.trace_squared.median_of_means();
    r.mc_std_error = mc.trace_squared.mom_std_error();
    rows.push_back(r);

    r = base;
    r.quantity = "trace_of_square";
    r.closed = closed.trace_of_square;
    r.ode = ode.trace_of_square;
    r.mc = mc.trace_of_square.median_of_means();
    r.mc_std_error = mc.trace_of_square.mom_std_error();
    rows.push_back(r);
    return rows;
}

}  // namespace wiredelay
