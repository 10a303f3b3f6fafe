#include "rwre/regeneration.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <ostream>

#include "rwre/hypercube.hpp"
#include "rwre/parallel.hpp"

namespace rwre {

RegenParams RegenParams::defaults(RealVec ell) {
    RegenParams p;
    p.a = 3.0 * std::sqrt(static_cast<double>(ell.size()));
    p.ell = std::move(ell);
    return p;
}

void RegenParams::validate(bool allowAnyA) const {
    if (ell.empty()) throw ParameterError("regeneration: empty direction");
    double n2 = 0.0;
    for (double v : ell) n2 += v * v;
    if (std::abs(std::sqrt(n2) - 1.0) > 1e-12) throw ParameterError("regeneration: ell must be a unit vector");
    const double r = std::sqrt(static_cast<double>(ell.size()));
    if (!(a > 0.0)) throw ParameterError("regeneration: a must be positive");
    if (!allowAnyA && !(a > 2.0 * r && a < 10.0 * r))
        throw ParameterError("regeneration: a must lie in (2 sqrt d, 10 sqrt d)");
}

std::size_t RegenerationRecord::certified() const {
    return static_cast<std::size_t>(
        std::count_if(points.begin(), points.end(), [](const RegenerationPoint& p) { return p.certified; }));
}

RegenerationRecord extract(const Trajectory& traj, const RegenParams& params) {
    const auto pos = traj.positions();
    const std::size_t N = pos.size() - 1;
    // Lattice levels can tie exactly in the reals (with ell = (1,1)/sqrt 2 and
    // a = 3 sqrt 2, six unit steps equal a). Comparisons carry a tolerance so
    // rounding never breaks such ties differently far from the start.
    constexpr double tol = 1e-7;
    std::vector<double> y(pos.size());
    for (std::size_t n = 0; n < pos.size(); ++n) y[n] = dot(pos[n] - traj.start, params.ell);
    // sufMin[n] = min of y over [n, N]: R = infinity within the horizon iff sufMin[S] >= y[S].
    std::vector<double> sufMin(y);
    for (std::size_t n = N; n-- > 0;) sufMin[n] = std::min(sufMin[n], sufMin[n + 1]);
    const std::uint64_t W = params.certifyMargin > 0 ? params.certifyMargin : traj.horizon / 4;

    RegenerationRecord rec;
    rec.start = traj.start;
    rec.end = pos.back();
    rec.length = N;
    for (std::size_t n = 0; n < pos.size(); ++n)
        if (y[n] < y[0] - tol) {
            rec.droppedBelowStart = true;
            rec.D = n;
            break;
        }

    // Each pass finds tau_1 of the walk shifted to `base`.
    std::size_t base = 0;
    bool censoredSoFar = false;
    while (base < N) {
        double M = y[base];
        std::size_t n = base;
        std::size_t S = 0;
        bool found = false;
        while (true) {
            // S_{k+1}: first visit strictly above M_k + a.
            while (n <= N && !(y[n] > M + params.a + tol)) ++n;
            if (n > N) break;
            S = n;
            if (sufMin[S] >= y[S] - tol) {
                found = true;
                break;
            }
            // R_{k+1}: first time after S below the level of X_S.
            std::size_t r = S;
            double runMax = M;
            while (!(y[r] < y[S] - tol)) {
                runMax = std::max(runMax, y[r]);
                ++r;
            }
            M = std::max(runMax, y[r]);
            n = r + 1;
        }
        if (!found) break;
        const bool certified = !censoredSoFar && N - S >= W;
        censoredSoFar = censoredSoFar || !certified;
        rec.points.push_back({S, pos[S], certified});
        base = S;
    }
    return rec;
}

std::vector<std::int64_t> regeneration_radii(const RegenerationRecord& record, const Trajectory& traj) {
    const auto pos = traj.positions();
    std::vector<std::int64_t> out;
    std::uint64_t prev = 0;
    for (const auto& p : record.points) {
        if (!p.certified) break;
        std::int64_t r = 0;
        for (std::uint64_t k = prev; k <= p.time; ++k) r = std::max(r, (pos[k] - pos[prev]).norm1());
        out.push_back(r);
        prev = p.time;
    }
    return out;
}

std::vector<RegenerationRecord> zero_regen(const std::vector<RegenerationRecord>& records) {
    std::vector<RegenerationRecord> out;
    std::copy_if(records.begin(), records.end(), std::back_inserter(out),
                 [](const RegenerationRecord& r) { return !r.droppedBelowStart; });
    return out;
}

std::vector<double> first_regeneration_times(const std::vector<RegenerationRecord>& records) {
    std::vector<double> out;
    for (const auto& r : records)
        if (!r.points.empty() && r.points.front().certified) out.push_back(static_cast<double>(r.points.front().time));
    return out;
}

std::vector<std::vector<double>> inter_times(const std::vector<RegenerationRecord>& records) {
    std::vector<std::vector<double>> out;
    for (const auto& rec : records) {
        std::vector<double> t;
        for (std::size_t i = 1; i < rec.points.size() && rec.points[i].certified; ++i)
            t.push_back(static_cast<double>(rec.points[i].time - rec.points[i - 1].time));
        out.push_back(std::move(t));
    }
    return out;
}

VelocityEstimate renewal_velocity(const std::vector<RegenerationRecord>& records, const RealVec& along) {
    if (records.empty()) throw InsufficientData("renewal velocity: no walks");
    const int d = records.front().start.dim;
    if (static_cast<int>(along.size()) != d) throw ParameterError("renewal velocity: projection has wrong dimension");

    VelocityEstimate out;
    out.walks = records.size();
    std::vector<std::vector<double>> num(static_cast<std::size_t>(d));
    std::vector<double> numAlong, den, directAlong;
    out.direct.assign(static_cast<std::size_t>(d), 0.0);
    for (const auto& rec : records) {
        if (rec.length == 0) throw InsufficientData("renewal velocity: empty trajectory");
        const Site disp = rec.end - rec.start;
        for (int i = 0; i < d; ++i)
            out.direct[static_cast<std::size_t>(i)] += static_cast<double>(disp[i]) / static_cast<double>(rec.length);
        directAlong.push_back(dot(disp, along) / static_cast<double>(rec.length));
        if (rec.certified() < 2) continue;
        ++out.walksUsed;
        for (std::size_t k = 1; k < rec.points.size() && rec.points[k].certified; ++k) {
            const Site dx = rec.points[k].position - rec.points[k - 1].position;
            for (int i = 0; i < d; ++i) num[static_cast<std::size_t>(i)].push_back(static_cast<double>(dx[i]));
            numAlong.push_back(dot(dx, along));
            den.push_back(static_cast<double>(rec.points[k].time - rec.points[k - 1].time));
        }
    }
    for (auto& v : out.direct) v /= static_cast<double>(records.size());
    out.directAlong = stats::mean_ci(directAlong);
    out.intervals = den.size();
    if (den.size() < 32) throw InsufficientData("renewal velocity: fewer than 32 certified blocks after the first");
    for (int i = 0; i < d; ++i) {
        const auto e = stats::batch_ratio(num[static_cast<std::size_t>(i)], den);
        out.v.push_back(e.mean);
        out.ci.push_back(e.ci);
    }
    out.along = stats::batch_ratio(numAlong, den);
    return out;
}

RegenRun simulate_regenerations(const SiteLaw& law, const RegenParams& params, std::uint64_t steps,
                                std::size_t walks, std::uint64_t seed) {
    params.validate(true);
    if (static_cast<int>(params.ell.size()) != lattice_dim(law))
        throw ParameterError("regeneration: ell dimension does not match the law");
    const auto per = parallel_map(walks, [&](std::size_t w) {
        const Environment env(law, replicate_seed(seed, w));
        const auto traj = run(env, Site::zero(env.dim()), StopSpec::budget(steps), derive_seed(seed, w, 0));
        auto rec = extract(traj, params);
        auto radii = regeneration_radii(rec, traj);
        return std::make_pair(std::move(rec), std::move(radii));
    });
    RegenRun out;
    for (const auto& [rec, radii] : per) {
        out.records.push_back(rec);
        out.radii.push_back(radii);
    }
    return out;
}

void write_regenerations_csv(std::ostream& os, const std::vector<RegenerationRecord>& records) {
    const int d = records.empty() ? 0 : records.front().start.dim;
    os << "walk,k,tau";
    for (int i = 1; i <= d; ++i) os << ",x_" << i;
    os << ",censored\n";
    for (std::size_t w = 0; w < records.size(); ++w) {
        std::size_t k = 1;
        for (const auto& p : records[w].points) {
            os << w << ',' << k++ << ',' << p.time;
            for (int i = 0; i < d; ++i) os << ',' << p.position[i];
            os << ',' << (p.certified ? 0 : 1) << '\n';
        }
    }
}

}  // namespace rwre
