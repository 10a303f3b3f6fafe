#pragma once

// Estimators shared by the experiments: Hill tail index, batch means,
// two-sample KS, chi-square goodness of fit, weighted line fits and the
// two-scale CLT diagnostic.

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rwre/errors.hpp"

namespace rwre::stats {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double x) const { return lo <= x && x <= hi; }
};

struct TailIndexEstimate {
    double index = 0.0;
    Interval ci;
    std::size_t k = 0;
    std::size_t n = 0;
};

/// Classical Hill estimator on the k largest order statistics, CI
/// index * (1 -+ 1.96/sqrt(k)). Requires positive samples and k in [10, n/2].
TailIndexEstimate hill(std::vector<double> samples, std::size_t k);
/// k = floor(sqrt(n)).
TailIndexEstimate hill(std::vector<double> samples);
std::size_t default_hill_k(std::size_t n);

enum class TailVerdict { MomentFinite, MomentInfinite, Inconclusive };
std::string to_string(TailVerdict v);

struct MomentVerdict {
    TailVerdict verdict = TailVerdict::Inconclusive;
    bool bounded = false;  // no tail at all: the sample top is flat
    TailIndexEstimate tail;
    std::size_t n = 0;
};

/// E[X^alpha] appears infinite when the Hill upper bound is <= alpha and
/// finite when the lower bound is >= alpha + 0.25.
TailVerdict classify(const TailIndexEstimate& est, double alpha);
/// Verdict for E[X^alpha] from positive samples of X. A flat sample top
/// (no spread among the largest order statistics) counts as finite.
MomentVerdict moment_verdict(const std::vector<double>& samples, double alpha);

struct MeanEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    Interval ci;
    std::size_t n = 0;
};

/// Wilson score interval for a binomial proportion; usable at zero counts.
Interval wilson(std::uint64_t successes, std::uint64_t n, double z = 1.96);

/// Mean with a normal 95% interval.
MeanEstimate mean_ci(const std::vector<double>& xs);

/// Batch means with Student-t 95% interval; the tail of the series that does
/// not fill a batch is dropped.
MeanEstimate batch_means(const std::vector<double>& series, std::size_t batches = 32);

/// Ratio of sums sum(num)/sum(den) with a batch-means interval on per-batch ratios.
MeanEstimate batch_ratio(const std::vector<double>& num, const std::vector<double>& den, std::size_t batches = 32);

struct KsResult {
    double statistic = 0.0;
    double critical = 0.0;  // at the requested level
    std::size_t n1 = 0, n2 = 0;
    bool reject() const { return statistic > critical; }
};

/// Two-sample Kolmogorov-Smirnov; critical value c(a) sqrt((n+m)/(nm)) with
/// c(a) = sqrt(-ln(a/2)/2).
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b, double level = 0.01);

struct ChiSquareResult {
    double statistic = 0.0;
    int dof = 0;
    double pValue = 0.0;
    std::vector<double> observed;
    std::vector<double> expected;
};

/// Goodness of fit of counts against probabilities (which should cover all
/// mass); adjacent cells are pooled from the right until every expected
/// count is >= minExpected.
ChiSquareResult chi_square_gof(const std::vector<double>& counts, const std::vector<double>& probs,
                               double minExpected = 5.0);

/// Geometric law on {1, 2, ...} with success probability q.
ChiSquareResult geometric_gof(const std::vector<std::uint64_t>& values, double q);

struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double slopeStderr = 0.0;
    Interval slopeCi;
    double rSquared = 0.0;
};

/// Weighted least squares y = a + b x. With known per-point variances the
/// weights are their inverses and the slope error is not rescaled.
LineFit weighted_line_fit(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& w);

struct CltDiagnostic {
    int dim = 0;
    std::vector<double> covariance;    // at n, row-major d x d
    std::vector<double> covariance4n;  // at 4n
    std::vector<double> covStderr;
    std::vector<double> cov4nStderr;
    std::vector<double> stabilityRatio;  // cov4n / cov entrywise (NaN when cov is 0)
    std::vector<bool> scaleStable;
    std::vector<double> kurtosis;    // m4 / m2^2 per axis at 4n
    std::vector<bool> normalKurtosis;
    double minEigenvalue = 0.0;
    double minEigenvalue4n = 0.0;
};

/// Rows are walk endpoints X_n (resp. X_{4n}) minus the start. Needs >= 200 walks per scale.
CltDiagnostic clt_diagnostic(const std::vector<std::vector<double>>& atN, const std::vector<std::vector<double>>& at4N,
                             double n, const std::vector<double>& vhat);

/// Sample covariance of rows, row-major.
std::vector<double> covariance(const std::vector<std::vector<double>>& rows);
double min_eigenvalue(const std::vector<double>& symmetric, int dim);

}  // namespace rwre::stats
