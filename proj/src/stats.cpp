#include "rwre/stats.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace rwre::stats {

namespace {

constexpr double kZ95 = 1.959963984540054;

double t_quantile(std::size_t dof) {
    boost::math::students_t t(static_cast<double>(dof));
    return boost::math::quantile(boost::math::complement(t, 0.025));
}

// Mean log-excess of the k largest values over the (k+1)-th, samples sorted descending.
double mean_log_excess(const std::vector<double>& desc, std::size_t k) {
    const double base = std::log(desc[k]);
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += std::log(desc[i]) - base;
    return s / static_cast<double>(k);
}

std::vector<double> sorted_desc(std::vector<double> samples) {
    for (double x : samples)
        if (!(x > 0.0) || !std::isfinite(x)) throw ParameterError("hill: samples must be positive and finite");
    std::sort(samples.begin(), samples.end(), std::greater<>());
    return samples;
}

}  // namespace

std::size_t default_hill_k(std::size_t n) {
    auto k = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
    return std::clamp<std::size_t>(k, 10, std::max<std::size_t>(10, n / 2));
}

TailIndexEstimate hill(std::vector<double> samples, std::size_t k) {
    const std::size_t n = samples.size();
    if (k < 10 || 2 * k > n) throw ParameterError("hill: need 10 <= k <= n/2");
    const auto desc = sorted_desc(std::move(samples));
    const double m = mean_log_excess(desc, k);
    if (!(m > 0.0)) throw ParameterError("hill: no spread among the top order statistics");
    TailIndexEstimate e;
    e.index = 1.0 / m;
    const double half = kZ95 / std::sqrt(static_cast<double>(k));
    e.ci = {e.index * (1.0 - half), e.index * (1.0 + half)};
    e.k = k;
    e.n = n;
    return e;
}

TailIndexEstimate hill(std::vector<double> samples) {
    const std::size_t k = default_hill_k(samples.size());
    return hill(std::move(samples), k);
}

std::string to_string(TailVerdict v) {
    switch (v) {
    case TailVerdict::MomentFinite: return "moment-appears-finite";
    case TailVerdict::MomentInfinite: return "moment-appears-infinite";
    case TailVerdict::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

TailVerdict classify(const TailIndexEstimate& est, double alpha) {
    if (est.ci.hi <= alpha) return TailVerdict::MomentInfinite;
    if (est.ci.lo >= alpha + 0.25) return TailVerdict::MomentFinite;
    return TailVerdict::Inconclusive;
}

MomentVerdict moment_verdict(const std::vector<double>& samples, double alpha) {
    if (!(alpha > 0.0)) throw ParameterError("moment verdict: alpha must be positive");
    MomentVerdict out;
    out.n = samples.size();
    const std::size_t k = default_hill_k(samples.size());
    if (2 * k > samples.size()) throw InsufficientData("moment verdict: need at least 20 samples");
    const auto desc = sorted_desc(samples);
    if (!(mean_log_excess(desc, k) > 0.0)) {
        out.bounded = true;
        out.verdict = TailVerdict::MomentFinite;
        out.tail.index = std::numeric_limits<double>::infinity();
        out.tail.ci = {out.tail.index, out.tail.index};
        out.tail.k = k;
        out.tail.n = samples.size();
        return out;
    }
    out.tail = hill(samples, k);
    out.verdict = classify(out.tail, alpha);
    return out;
}

MeanEstimate mean_ci(const std::vector<double>& xs) {
    if (xs.size() < 2) throw InsufficientData("mean: need at least 2 samples");
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    MeanEstimate e;
    e.mean = mean;
    e.stderr_ = std::sqrt(ss / (n - 1.0) / n);
    e.ci = {mean - kZ95 * e.stderr_, mean + kZ95 * e.stderr_};
    e.n = xs.size();
    return e;
}

MeanEstimate batch_means(const std::vector<double>& series, std::size_t batches) {
    if (batches < 2) throw ParameterError("batch means: need at least 2 batches");
    const std::size_t size = series.size() / batches;
    if (size == 0) throw InsufficientData("batch means: fewer samples than batches");
    std::vector<double> means(batches);
    for (std::size_t b = 0; b < batches; ++b) {
        double s = 0.0;
        for (std::size_t i = b * size; i < (b + 1) * size; ++i) s += series[i];
        means[b] = s / static_cast<double>(size);
    }
    auto e = mean_ci(means);
    const double t = t_quantile(batches - 1);
    e.ci = {e.mean - t * e.stderr_, e.mean + t * e.stderr_};
    e.n = size * batches;
    return e;
}

MeanEstimate batch_ratio(const std::vector<double>& num, const std::vector<double>& den, std::size_t batches) {
    if (num.size() != den.size()) throw ParameterError("batch ratio: length mismatch");
    if (batches < 2) throw ParameterError("batch ratio: need at least 2 batches");
    const std::size_t size = num.size() / batches;
    if (size == 0) throw InsufficientData("batch ratio: fewer samples than batches");
    std::vector<double> ratios(batches);
    double totNum = 0.0, totDen = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
        double sn = 0.0, sd = 0.0;
        for (std::size_t i = b * size; i < (b + 1) * size; ++i) {
            sn += num[i];
            sd += den[i];
        }
        if (!(sd > 0.0)) throw InsufficientData("batch ratio: empty denominator in a batch");
        ratios[b] = sn / sd;
        totNum += sn;
        totDen += sd;
    }
    auto e = mean_ci(ratios);
    e.mean = totNum / totDen;
    const double t = t_quantile(batches - 1);
    e.ci = {e.mean - t * e.stderr_, e.mean + t * e.stderr_};
    e.n = size * batches;
    return e;
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b, double level) {
    if (a.empty() || b.empty()) throw InsufficientData("ks: empty sample");
    if (!(level > 0.0 && level < 1.0)) throw ParameterError("ks: level must lie in (0, 1)");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double n = static_cast<double>(a.size()), m = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    KsResult r;
    r.statistic = d;
    r.critical = std::sqrt(-std::log(level / 2.0) / 2.0) * std::sqrt((n + m) / (n * m));
    r.n1 = a.size();
    r.n2 = b.size();
    return r;
}

ChiSquareResult chi_square_gof(const std::vector<double>& counts, const std::vector<double>& probs,
                               double minExpected) {
    if (counts.size() != probs.size() || counts.empty()) throw ParameterError("chi-square: cell count mismatch");
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    if (!(total > 0.0)) throw InsufficientData("chi-square: no observations");

    ChiSquareResult r;
    double pendObs = 0.0, pendExp = 0.0;
    for (std::size_t c = counts.size(); c-- > 0;) {
        pendObs += counts[c];
        pendExp += probs[c] * total;
        if (pendExp >= minExpected) {
            r.observed.push_back(pendObs);
            r.expected.push_back(pendExp);
            pendObs = pendExp = 0.0;
        }
    }
    if (pendExp > 0.0 || pendObs > 0.0) {
        if (r.observed.empty()) {
            r.observed.push_back(pendObs);
            r.expected.push_back(pendExp);
        } else {
            r.observed.back() += pendObs;
            r.expected.back() += pendExp;
        }
    }
    std::reverse(r.observed.begin(), r.observed.end());
    std::reverse(r.expected.begin(), r.expected.end());
    if (r.observed.size() < 2) throw InsufficientData("chi-square: fewer than 2 cells after pooling");

    for (std::size_t c = 0; c < r.observed.size(); ++c) {
        const double diff = r.observed[c] - r.expected[c];
        r.statistic += diff * diff / r.expected[c];
    }
    r.dof = static_cast<int>(r.observed.size()) - 1;
    boost::math::chi_squared dist(r.dof);
    r.pValue = boost::math::cdf(boost::math::complement(dist, r.statistic));
    return r;
}

ChiSquareResult geometric_gof(const std::vector<std::uint64_t>& values, double q) {
    if (!(q > 0.0 && q <= 1.0)) throw ParameterError("geometric: q must lie in (0, 1]");
    if (values.empty()) throw InsufficientData("geometric: no observations");
    const std::uint64_t top = *std::max_element(values.begin(), values.end());
    if (std::find(values.begin(), values.end(), 0) != values.end())
        throw ParameterError("geometric: values must be >= 1");
    // Cells 1..top plus the tail (top, inf).
    std::vector<double> counts(top + 1, 0.0), probs(top + 1, 0.0);
    for (auto v : values) counts[v - 1] += 1.0;
    double survive = 1.0;
    for (std::uint64_t j = 0; j < top; ++j) {
        probs[j] = survive * q;
        survive *= 1.0 - q;
    }
    probs[top] = survive;
    return chi_square_gof(counts, probs);
}

LineFit weighted_line_fit(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& w) {
    if (x.size() != y.size() || x.size() != w.size()) throw ParameterError("line fit: length mismatch");
    if (x.size() < 2) throw InsufficientData("line fit: need at least 2 points");
    double sw = 0.0, sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(w[i] > 0.0) || !std::isfinite(w[i])) throw ParameterError("line fit: weights must be positive");
        sw += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
    }
    const double mx = sx / sw, my = sy / sw;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += w[i] * (x[i] - mx) * (x[i] - mx);
        sxy += w[i] * (x[i] - mx) * (y[i] - my);
        syy += w[i] * (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw InsufficientData("line fit: x values do not vary");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.slopeStderr = std::sqrt(1.0 / sxx);
    f.slopeCi = {f.slope - kZ95 * f.slopeStderr, f.slope + kZ95 * f.slopeStderr};
    f.rSquared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    return f;
}

std::vector<double> covariance(const std::vector<std::vector<double>>& rows) {
    if (rows.size() < 2) throw InsufficientData("covariance: need at least 2 rows");
    const std::size_t d = rows.front().size();
    std::vector<double> mean(d, 0.0);
    for (const auto& r : rows) {
        if (r.size() != d) throw ParameterError("covariance: ragged rows");
        for (std::size_t i = 0; i < d; ++i) mean[i] += r[i];
    }
    const double n = static_cast<double>(rows.size());
    for (auto& m : mean) m /= n;
    std::vector<double> cov(d * d, 0.0);
    for (const auto& r : rows)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) cov[i * d + j] += (r[i] - mean[i]) * (r[j] - mean[j]);
    for (auto& c : cov) c /= n - 1.0;
    return cov;
}

double min_eigenvalue(const std::vector<double>& symmetric, int dim) {
    Eigen::MatrixXd m(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) m(i, j) = symmetric[static_cast<std::size_t>(i * dim + j)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

namespace {

struct ScaledMoments {
    std::vector<double> cov;
    std::vector<double> covStderr;
    std::vector<double> kurtosis;
};

ScaledMoments scaled_moments(const std::vector<std::vector<double>>& rows, double n, const std::vector<double>& vhat) {
    const std::size_t d = vhat.size();
    std::vector<std::vector<double>> y;
    y.reserve(rows.size());
    const double s = std::sqrt(n);
    for (const auto& r : rows) {
        if (r.size() != d) throw ParameterError("clt: row dimension does not match vhat");
        std::vector<double> z(d);
        for (std::size_t i = 0; i < d; ++i) z[i] = (r[i] - n * vhat[i]) / s;
        y.push_back(std::move(z));
    }
    ScaledMoments out;
    out.cov = covariance(y);
    const double N = static_cast<double>(y.size());
    std::vector<double> mean(d, 0.0);
    for (const auto& z : y)
        for (std::size_t i = 0; i < d; ++i) mean[i] += z[i] / N;
    out.covStderr.assign(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            double ss = 0.0;
            for (const auto& z : y) {
                const double prod = (z[i] - mean[i]) * (z[j] - mean[j]) - out.cov[i * d + j];
                ss += prod * prod;
            }
            out.covStderr[i * d + j] = std::sqrt(ss / (N - 1.0) / N);
        }
    out.kurtosis.assign(d, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < d; ++i) {
        double m2 = 0.0, m4 = 0.0;
        for (const auto& z : y) {
            const double c = z[i] - mean[i];
            m2 += c * c;
            m4 += c * c * c * c;
        }
        m2 /= N;
        m4 /= N;
        if (m2 > 0.0) out.kurtosis[i] = m4 / (m2 * m2);
    }
    return out;
}

}  // namespace

CltDiagnostic clt_diagnostic(const std::vector<std::vector<double>>& atN, const std::vector<std::vector<double>>& at4N,
                             double n, const std::vector<double>& vhat) {
    if (atN.size() < 200 || at4N.size() < 200) throw InsufficientData("clt: need at least 200 walks per scale");
    if (!(n > 0.0)) throw ParameterError("clt: n must be positive");
    const auto a = scaled_moments(atN, n, vhat);
    const auto b = scaled_moments(at4N, 4.0 * n, vhat);
    const std::size_t d = vhat.size();

    CltDiagnostic out;
    out.dim = static_cast<int>(d);
    out.covariance = a.cov;
    out.covariance4n = b.cov;
    out.covStderr = a.covStderr;
    out.cov4nStderr = b.covStderr;
    out.kurtosis = b.kurtosis;
    for (std::size_t e = 0; e < d * d; ++e) {
        out.stabilityRatio.push_back(a.cov[e] != 0.0 ? b.cov[e] / a.cov[e] : std::numeric_limits<double>::quiet_NaN());
        const double se = std::hypot(a.covStderr[e], b.covStderr[e]);
        out.scaleStable.push_back(std::abs(b.cov[e] - a.cov[e]) <= kZ95 * se);
    }
    const double kurtSe = std::sqrt(24.0 / static_cast<double>(at4N.size()));
    for (double k : b.kurtosis) out.normalKurtosis.push_back(std::isfinite(k) && std::abs(k - 3.0) <= 3.0 * kurtSe);
    out.minEigenvalue = min_eigenvalue(a.cov, out.dim);
    out.minEigenvalue4n = min_eigenvalue(b.cov, out.dim);
    return out;
}

Interval wilson(std::uint64_t successes, std::uint64_t n, double z) {
    if (n == 0) return {0.0, 1.0};
    if (successes > n) throw ParameterError("wilson: more successes than trials");
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double centre = (p + z2 / (2.0 * nn)) / (1.0 + z2 / nn);
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / (1.0 + z2 / nn);
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

}  // namespace rwre::stats
