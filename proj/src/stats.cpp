#include "wiredelay/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wiredelay {

void ScalarAccumulator::add(double x) {
    ++n_;
    double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
}

double ScalarAccumulator::mean() const { return mean_; }

double ScalarAccumulator::variance() const {
    return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
}

double ScalarAccumulator::std_error() const {
    return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

void ScalarAccumulator::merge(const ScalarAccumulator& other) {
    if (other.n_ == 0) return;
    if (n_ == 0) {
        *this = other;
        return;
    }
    double na = static_cast<double>(n_), nb = static_cast<double>(other.n_);
    double d = other.mean_ - mean_;
    double n = na + nb;
    m2_ += other.m2_ + d * d * na * nb / n;
    mean_ += d * nb / n;
    n_ += other.n_;
}

EnsembleStats::EnsembleStats(int n_blocks) {
    if (n_blocks < 2) throw std::invalid_argument("EnsembleStats: need at least 2 blocks");
    blocks_.resize(static_cast<std::size_t>(n_blocks));
}

void EnsembleStats::add(double x) {
    all_.add(x);
    blocks_[next_block_].add(x);
    next_block_ = (next_block_ + 1) % blocks_.size();
}

double EnsembleStats::median_of_means() const {
    std::vector<double> bm;
    bm.reserve(blocks_.size());
    for (const auto& b : blocks_)
        if (b.count() > 0) bm.push_back(b.mean());
    return median(std::move(bm));
}

double EnsembleStats::mom_std_error() const {
    ScalarAccumulator spread;
    for (const auto& b : blocks_)
        if (b.count() > 0) spread.add(b.mean());
    if (spread.count() < 2) return 0.0;
    // Asymptotic efficiency factor of the median for near-normal block means.
    return 1.2533 * std::sqrt(spread.variance() / static_cast<double>(spread.count()));
}

Histogram::Histogram(double lo, double hi, int bins) : lo_(lo), hi_(hi) {
    if (!(hi > lo) || bins < 1) throw std::invalid_argument("Histogram: bad range or bin count");
    width_ = (hi - lo) / bins;
    counts_.assign(static_cast<std::size_t>(bins), 0);
}

void Histogram::add(double x) {
    ++n_total_;
    if (x < lo_ || x >= hi_) {
        ++n_outside_;
        return;
    }
    auto i = static_cast<std::size_t>((x - lo_) / width_);
    if (i >= counts_.size()) i = counts_.size() - 1;  // guard x == hi - ulp
    ++counts_[i];
}

std::vector<double> Histogram::density() const {
    std::vector<double> d(counts_.size(), 0.0);
    if (n_total_ == 0) return d;
    double norm = 1.0 / (static_cast<double>(n_total_) * width_);
    for (std::size_t i = 0; i < counts_.size(); ++i) d[i] = static_cast<double>(counts_[i]) * norm;
    return d;
}

std::vector<double> Histogram::density_std_error() const {
    std::vector<double> se(counts_.size(), 0.0);
    if (n_total_ == 0) return se;
    double n = static_cast<double>(n_total_);
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        double p = static_cast<double>(counts_[i]) / n;
        se[i] = std::sqrt(p * (1.0 - p) / n) / width_;
    }
    return se;
}

double l1_distance(const std::vector<double>& a, const std::vector<double>& b, double dx) {
    if (a.size() != b.size()) throw std::invalid_argument("l1_distance: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s * dx;
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw std::invalid_argument("ks_statistic: no samples");
    std::sort(samples.begin(), samples.end());
    double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double f = cdf(samples[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    return d;
}

double ks_critical(std::size_t n, double alpha) {
    double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    double rn = std::sqrt(static_cast<double>(n));
    return c / (rn + 0.12 + 0.11 / rn);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need n >= 2");
    double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double denom = n * sxx - sx * sx;
    LineFit f;
    f.slope = (n * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / n;
    return f;
}

double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median: empty");
    std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    std::nth_element(v.begin(), v.begin() + mid - 1, v.begin() + mid);
    return 0.5 * (v[mid - 1] + hi);
}

}  // namespace wiredelay
