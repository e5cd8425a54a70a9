#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace wiredelay {

/// Streaming mean/variance accumulator (Welford).
class ScalarAccumulator {
  public:
    void add(double x);
    [[nodiscard]] std::size_t count() const { return n_; }
    [[nodiscard]] double mean() const;
    [[nodiscard]] double variance() const;  ///< unbiased sample variance
    [[nodiscard]] double std_error() const; ///< sqrt(variance / n)
    void merge(const ScalarAccumulator& other);

  private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// Monte Carlo ensemble summary for one scalar observable. Samples are
/// assigned to blocks round-robin in arrival order, so the median-of-means
/// estimate is reproducible whenever samples arrive in trajectory order.
/// Heavy-tailed observables get both the plain mean and the median of the
/// block means (the latter is bias-prone but far tighter in spread).
class EnsembleStats {
  public:
    explicit EnsembleStats(int n_blocks = 16);
    void add(double x);
    [[nodiscard]] std::size_t count() const { return all_.count(); }
    [[nodiscard]] double mean() const { return all_.mean(); }
    [[nodiscard]] double std_error() const { return all_.std_error(); }
    [[nodiscard]] double median_of_means() const;
    /// 1.2533 sd(block means)/sqrt(B): asymptotic std error of a median.
    [[nodiscard]] double mom_std_error() const;
    [[nodiscard]] int n_blocks() const { return static_cast<int>(blocks_.size()); }

  private:
    ScalarAccumulator all_;
    std::vector<ScalarAccumulator> blocks_;
    std::size_t next_block_ = 0;
};

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Fixed uniform-bin histogram on [lo, hi); outside samples are counted but
/// excluded, so densities are normalized by the *total* sample count and
/// mass that escaped the window shows up as a deficit.
class Histogram {
  public:
    Histogram(double lo, double hi, int bins);
    void add(double x);
    [[nodiscard]] int bins() const { return static_cast<int>(counts_.size()); }
    [[nodiscard]] double lo() const { return lo_; }
    [[nodiscard]] double hi() const { return hi_; }
    [[nodiscard]] double bin_width() const { return width_; }
    [[nodiscard]] double bin_center(int i) const { return lo_ + (i + 0.5) * width_; }
    [[nodiscard]] std::size_t total() const { return n_total_; }
    [[nodiscard]] std::size_t outside() const { return n_outside_; }
    [[nodiscard]] std::vector<double> density() const;
    [[nodiscard]] std::vector<double> density_std_error() const;

  private:
    double lo_, hi_, width_;
    std::vector<std::size_t> counts_;
    std::size_t n_total_ = 0, n_outside_ = 0;
};

/// L1 distance between two curves sampled on the same uniform grid.
[[nodiscard]] double l1_distance(const std::vector<double>& a, const std::vector<double>& b,
                                 double dx);

/// Two-sided Kolmogorov-Smirnov statistic against a continuous CDF.
[[nodiscard]] double ks_statistic(std::vector<double> samples,
                                  const std::function<double(double)>& cdf);

/// Critical KS value at significance alpha (finite-n corrected asymptotic).
[[nodiscard]] double ks_critical(std::size_t n, double alpha);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Ordinary least-squares line fit.
[[nodiscard]] LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Median of a list (copies; not streaming).
[[nodiscard]] double median(std::vector<double> v);

}  // namespace wiredelay
