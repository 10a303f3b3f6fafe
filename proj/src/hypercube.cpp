#include "rwre/hypercube.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>

#include "rwre/io.hpp"
#include "rwre/parallel.hpp"
#include "rwre/walk.hpp"

namespace rwre {

QuenchedHypercube QuenchedHypercube::from_vectors(const UnitHypercube& cube, std::vector<TransitionVector> vectors) {
    const std::size_t S = cube.size();
    if (vectors.size() != S) throw ParameterError("hypercube: need one transition vector per corner");
    QuenchedHypercube qh;
    qh.cube = cube;
    qh.p = std::move(vectors);
    qh.interior = Matrix::Zero(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(S));
    qh.exitMass.assign(S, 0.0);
    for (std::size_t m = 0; m < S; ++m) {
        const Site x = cube.corner(m);
        if (qh.p[m].dim() != cube.dim()) throw ParameterError("hypercube: transition vector dimension mismatch");
        for (int e = 0; e < 2 * cube.dim(); ++e) {
            const Site y = step(x, e);
            if (cube.contains(y))
                qh.interior(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(cube.mask_of(y))) += qh.p[m][e];
            else
                qh.exitMass[m] += qh.p[m][e];
        }
    }
    return qh;
}

QuenchedHypercube QuenchedHypercube::build(const Environment& env, const UnitHypercube& cube) {
    if (cube.dim() != env.dim()) throw ParameterError("hypercube: cube and environment dimensions differ");
    std::vector<TransitionVector> v;
    v.reserve(cube.size());
    for (std::size_t m = 0; m < cube.size(); ++m) v.push_back(env.transitions_at(cube.corner(m)));
    return from_vectors(cube, std::move(v));
}

namespace {

using Index = Eigen::Index;

void require_exit_reachable(const QuenchedHypercube& qh) {
    const std::size_t S = qh.size();
    // Backward search from corners with exit mass along positive interior moves.
    std::vector<bool> reach(S, false);
    std::deque<std::size_t> queue;
    for (std::size_t m = 0; m < S; ++m)
        if (qh.exitMass[m] > 0.0) {
            reach[m] = true;
            queue.push_back(m);
        }
    while (!queue.empty()) {
        const std::size_t y = queue.front();
        queue.pop_front();
        for (std::size_t x = 0; x < S; ++x)
            if (!reach[x] && qh.interior(static_cast<Index>(x), static_cast<Index>(y)) > 0.0) {
                reach[x] = true;
                queue.push_back(x);
            }
    }
    for (std::size_t m = 0; m < S; ++m)
        if (!reach[m])
            throw DegenerateEnvironment("hypercube: corner " + qh.cube.corner(m).str() + " cannot leave the cube");
}

// I - P with row and column `skip` removed.
Matrix reduced_generator(const Matrix& P, Index skip) {
    const Index n = P.rows() - 1;
    Matrix A(n, n);
    for (Index i = 0, ri = 0; i < P.rows(); ++i) {
        if (i == skip) continue;
        for (Index j = 0, rj = 0; j < P.cols(); ++j) {
            if (j == skip) continue;
            A(ri, rj) = (i == j ? 1.0 : 0.0) - P(i, j);
            ++rj;
        }
        ++ri;
    }
    return A;
}

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

ExitAnalysis analyze(const QuenchedHypercube& qh, int momentOrder) {
    if (momentOrder < 1) throw ParameterError("analyze: moment order must be >= 1");
    require_exit_reachable(qh);
    const std::size_t S = qh.size();
    const Index n = static_cast<Index>(S);
    const Matrix& P = qh.interior;

    ExitAnalysis a;
    a.Q.assign(S, 0.0);
    for (std::size_t m = 0; m < S; ++m)
        for (int e : qh.cube.exterior_directions(m)) a.Q[m] = std::max(a.Q[m], qh.p[m][e]);

    const Matrix I = Matrix::Identity(n, n);
    Eigen::PartialPivLU<Matrix> lu(I - P);
    a.fundamental = lu.inverse();
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);

    // E[T^k] = E[(1 + T')^k] with T' the remaining time after one step.
    std::vector<Eigen::VectorXd> mom;
    for (int k = 1; k <= momentOrder; ++k) {
        Eigen::VectorXd rhs = ones;
        for (int j = 1; j < k; ++j) rhs += binomial(k, j) * (P * mom[static_cast<std::size_t>(j - 1)]);
        mom.push_back(lu.solve(rhs));
    }
    for (const auto& m : mom) a.moments.emplace_back(m.data(), m.data() + n);
    a.meanExit = a.moments.front();

    a.escapeVisits = Matrix::Zero(n, n);
    a.hitProb = Matrix::Zero(n, n);
    a.Qtilde = Matrix::Zero(n, n);
    a.QtildeRow.assign(S, 0.0);
    for (Index x = 0; x < n; ++x) {
        const Matrix A = reduced_generator(P, x);
        Eigen::PartialPivLU<Matrix> lux(A);
        Eigen::VectorXd rowFromX(n - 1), colIntoX(n - 1);
        for (Index j = 0, r = 0; j < n; ++j) {
            if (j == x) continue;
            rowFromX(r) = P(x, j);
            colIntoX(r) = P(j, x);
            ++r;
        }
        const Eigen::VectorXd g = lux.transpose().solve(rowFromX);
        const Eigen::VectorXd h = lux.solve(colIntoX);
        for (Index j = 0, r = 0; j < n; ++j) {
            if (j == x) {
                a.escapeVisits(x, j) = 1.0;
                a.hitProb(j, x) = 1.0;
                continue;
            }
            a.escapeVisits(x, j) = g(r);
            a.hitProb(j, x) = h(r);
            ++r;
        }
        for (Index y = 0; y < n; ++y) {
            a.Qtilde(x, y) = a.escapeVisits(x, y) * qh.exitMass[static_cast<std::size_t>(y)];
            a.QtildeRow[static_cast<std::size_t>(x)] += a.Qtilde(x, y);
        }
    }
    return a;
}

ExitAnalysis analyze(const Environment& env, const UnitHypercube& cube, int momentOrder) {
    return analyze(QuenchedHypercube::build(env, cube), momentOrder);
}

std::vector<ExitStep> exit_law(const QuenchedHypercube& qh, const ExitAnalysis& a, std::size_t fromCorner) {
    std::vector<ExitStep> out;
    for (std::size_t z = 0; z < qh.size(); ++z) {
        const double g = a.escapeVisits(static_cast<Index>(fromCorner), static_cast<Index>(z));
        const Site corner = qh.cube.corner(z);
        for (int e : qh.cube.exterior_directions(z)) out.push_back({z, e, step(corner, e), g * qh.p[z][e]});
    }
    return out;
}

InequalityCheck check_identities(const ExitAnalysis& a, double tol) {
    InequalityCheck c;
    const Index n = a.fundamental.rows();
    for (Index x0 = 0; x0 < n; ++x0) {
        const auto i0 = static_cast<std::size_t>(x0);
        double visitSum = 0.0;
        double rowMax = 0.0;
        for (Index x = 0; x < n; ++x) {
            const auto ix = static_cast<std::size_t>(x);
            const double err = std::abs(a.fundamental(x0, x) * a.QtildeRow[ix] - a.hitProb(x0, x));
            c.maxIdentityError = std::max(c.maxIdentityError, err);
            if (err > tol) c.visitIdentity = false;
            visitSum += a.fundamental(x0, x);
            if (a.Qtilde(x0, x) > a.QtildeRow[i0] + tol) c.qtildeSandwich = false;
            rowMax = std::max(rowMax, a.Qtilde(x0, x));
        }
        if (a.QtildeRow[i0] > static_cast<double>(n) * rowMax + tol) c.qtildeSandwich = false;

        const double sumErr = std::abs(visitSum - a.meanExit[i0]);
        c.maxSumError = std::max(c.maxSumError, sumErr / std::max(1.0, a.meanExit[i0]));
        if (sumErr > tol * std::max(1.0, a.meanExit[i0])) c.meanIsVisitSum = false;

        double upper = 0.0;
        for (double q : a.QtildeRow) upper += 1.0 / q;
        const double lower = 1.0 / a.QtildeRow[i0];
        const double slack = tol * std::max(1.0, upper);
        if (a.meanExit[i0] < lower - slack || a.meanExit[i0] > upper + slack) c.exitSandwich = false;
    }
    return c;
}

std::uint64_t replicate_seed(std::uint64_t masterSeed, std::uint64_t r) {
    return chain(mix64(masterSeed ^ 0x454e56ULL), r);
}

namespace {

struct ReplicateValue {
    double value = 0.0;
    std::uint64_t censored = 0;
    std::uint64_t walks = 0;
};

ReplicateValue quenched_value(const Environment& env, const FractionalMomentParams& params, bool exact) {
    const UnitHypercube cube = UnitHypercube::at(Site::zero(env.dim()));
    ReplicateValue out;
    if (exact) {
        const int k = static_cast<int>(std::lround(params.alpha));
        const auto a = analyze(env, cube, k);
        const auto& m = a.moments[static_cast<std::size_t>(k - 1)];
        out.value = *std::max_element(m.begin(), m.end());
        return out;
    }
    for (std::size_t c = 0; c < cube.size(); ++c) {
        const auto sample = sample_exit_times(env, cube, c, params.walksPerCorner, mix64(env.seed() + c), params.horizon);
        double s = 0.0;
        for (double t : sample.times) s += std::pow(t, params.alpha);
        // Censored walks contribute their horizon: a lower bound.
        s += static_cast<double>(sample.censored) * std::pow(static_cast<double>(params.horizon), params.alpha);
        out.value = std::max(out.value, s / static_cast<double>(params.walksPerCorner));
        out.censored += sample.censored;
        out.walks += params.walksPerCorner;
    }
    return out;
}

}  // namespace

FractionalMomentReport fractional_moment(const SiteLaw& law, const FractionalMomentParams& params,
                                         std::uint64_t masterSeed) {
    if (!(params.alpha > 0.0)) throw ParameterError("fractional_moment: alpha must be positive");
    if (params.replicates < 20) throw ParameterError("fractional_moment: need at least 20 replicates");
    if (params.walksPerCorner < 1 || params.horizon < 1) throw ParameterError("fractional_moment: empty walk budget");
    validate(law);
    FractionalMomentReport r;
    r.alpha = params.alpha;
    r.exact = params.alpha == std::round(params.alpha);

    auto vals = parallel_map(params.replicates, [&](std::size_t i) {
        const auto seed = replicate_seed(masterSeed, i);
        return quenched_value(Environment(law, seed), params, r.exact);
    });
    std::vector<double> roots;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        r.values.push_back(vals[i].value);
        r.seeds.push_back(replicate_seed(masterSeed, i));
        r.censoredWalks += vals[i].censored;
        r.totalWalks += vals[i].walks;
        roots.push_back(std::pow(vals[i].value, 1.0 / params.alpha));
    }
    r.verdict = stats::moment_verdict(roots, params.alpha);
    return r;
}

ExitTimeSample sample_exit_times(const Environment& env, const UnitHypercube& cube, std::size_t corner,
                                 std::uint64_t runs, std::uint64_t seed, std::uint64_t horizon) {
    ExitTimeSample out;
    out.times.reserve(runs);
    const Site start = cube.corner(corner);
    for (std::uint64_t r = 0; r < runs; ++r) {
        Walker w(env, start, derive_seed(seed, 1, r));
        while (w.steps() < horizon) {
            w.advance();
            if (!cube.contains(w.position())) break;
        }
        if (cube.contains(w.position()))
            ++out.censored;
        else
            out.times.push_back(static_cast<double>(w.steps()));
    }
    return out;
}

VisitLawCheck visit_law_check(const Environment& env, const UnitHypercube& cube, std::size_t corner,
                              std::uint64_t runs, std::uint64_t seed, std::uint64_t horizon) {
    if (runs < 10000) throw ParameterError("visit_law_check: need at least 10^4 runs");
    VisitLawCheck out;
    out.runs = runs;
    const auto a = analyze(env, cube, 1);
    out.qtilde = a.QtildeRow[corner];
    const Site x = cube.corner(corner);
    std::vector<std::uint64_t> visits;
    std::vector<double> asReal;
    visits.reserve(runs);
    for (std::uint64_t r = 0; r < runs; ++r) {
        Walker w(env, x, derive_seed(seed, 2, r));
        std::uint64_t n = 1;
        while (w.steps() < horizon) {
            w.advance();
            if (!cube.contains(w.position())) break;
            if (w.position() == x) ++n;
        }
        if (cube.contains(w.position())) {
            ++out.censored;
            continue;
        }
        visits.push_back(n);
        asReal.push_back(static_cast<double>(n));
    }
    out.visits = stats::mean_ci(asReal);
    out.meanVisits = out.visits.mean;
    if (out.qtilde >= 1.0) {
        // One-step exit from x: N(x) is identically 1.
        out.chi.pValue = std::all_of(visits.begin(), visits.end(), [](auto v) { return v == 1; }) ? 1.0 : 0.0;
        return out;
    }
    out.chi = stats::geometric_gof(visits, out.qtilde);
    return out;
}

void write_analysis_csv_header(std::ostream& os, int dim, int momentOrder) {
    const std::size_t S = std::size_t{1} << dim;
    os << "seed";
    for (std::size_t m = 0; m < S; ++m) os << ",Q_" << m;
    for (std::size_t m = 0; m < S; ++m) os << ",Qtilde_" << m;
    for (std::size_t m = 0; m < S; ++m) os << ",meanExit_" << m;
    for (int k = 2; k <= momentOrder; ++k)
        for (std::size_t m = 0; m < S; ++m) os << ",moment" << k << '_' << m;
    os << '\n';
}

void write_analysis_csv_row(std::ostream& os, std::uint64_t seed, const ExitAnalysis& a) {
    os << seed;
    for (double q : a.Q) os << ',' << num(q);
    for (double q : a.QtildeRow) os << ',' << num(q);
    for (double m : a.meanExit) os << ',' << num(m);
    for (std::size_t k = 1; k < a.moments.size(); ++k)
        for (double m : a.moments[k]) os << ',' << num(m);
    os << '\n';
}

}  // namespace rwre
