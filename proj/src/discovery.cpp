#include "rwre/discovery.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

namespace rwre {

TransitionVector AuditedView::read(const Site& x) {
    if (std::find(allowed_.begin(), allowed_.end(), x) == allowed_.end())
        throw MeasurabilityViolation("policy read p(" + x.str() + ", .) outside the discovered prefix");
    reads_.push_back(x);
    return env_->transitions_at(x);
}

std::vector<Site> AuditedView::take_reads() {
    std::vector<Site> out;
    out.swap(reads_);
    return out;
}

std::vector<Direction> DiscoveryPolicy::axes(int d) const {
    std::vector<Direction> a;
    for (int i = 0; i < d; ++i) a.push_back({i, d});
    return a;
}

std::vector<Site> bfs_order(const UnitHypercube& cube, const Site& start) {
    std::vector<Site> order{start};
    std::vector<bool> seen(cube.size(), false);
    seen[cube.mask_of(start)] = true;
    std::deque<Site> queue{start};
    while (!queue.empty()) {
        const Site x = queue.front();
        queue.pop_front();
        auto dirs = cube.interior_directions(cube.mask_of(x));
        std::sort(dirs.begin(), dirs.end());
        for (int e : dirs) {
            const Site y = step(x, e);
            const auto m = cube.mask_of(y);
            if (seen[m]) continue;
            seen[m] = true;
            order.push_back(y);
            queue.push_back(y);
        }
    }
    return order;
}

namespace {

// Cube with the given signed axes that contains every site of `sites`.
UnitHypercube enclosing_cube(const std::vector<Site>& sites, const std::vector<Direction>& axes) {
    const int d = sites.front().dim;
    Site anchor(d);
    for (const auto& a : axes) {
        const int ax = a.axis();
        std::int64_t v = sites.front()[ax];
        for (const auto& s : sites) v = a.sign() > 0 ? std::min(v, s[ax]) : std::max(v, s[ax]);
        anchor[ax] = v;
    }
    UnitHypercube h(anchor, axes);
    for (const auto& s : sites)
        if (!h.contains(s)) throw ParameterError("discover: discovered sites do not form a unit hypercube");
    return h;
}

bool adjacent(const Site& a, const Site& b) { return (a - b).norm1() == 1; }

}  // namespace

MarkedMarkovianHypercube discover(const Environment& env, DiscoveryPolicy& policy) {
    const int d = env.dim();
    const Site origin = Site::zero(d);
    const std::size_t n = std::size_t{1} << d;

    AuditedView view(env);
    MarkedMarkovianHypercube out;
    out.policy = policy.name();
    std::vector<Site> prefix{origin};

    for (std::size_t i = 1; i < n; ++i) {
        view.allow(prefix);
        const Site f = policy.next(prefix, view);
        auto reads = view.take_reads();
        if (f.dim != d) throw ParameterError("discover: site of wrong dimension");
        if (std::find(prefix.begin(), prefix.end(), f) != prefix.end())
            throw ParameterError("discover: site " + f.str() + " already discovered");
        if (std::none_of(prefix.begin(), prefix.end(), [&](const Site& s) { return adjacent(s, f); }))
            throw ParameterError("discover: site " + f.str() + " is not on the boundary of the prefix");
        for (int k = 0; k < d; ++k) {
            std::int64_t lo = 0, hi = 0;
            for (const auto& s : prefix) lo = std::min(lo, s[k]), hi = std::max(hi, s[k]);
            lo = std::min(lo, f[k]);
            hi = std::max(hi, f[k]);
            if (hi - lo > 1) throw ParameterError("discover: prefix no longer fits in a unit hypercube containing 0");
        }
        out.log.push_back({f, std::move(reads)});
        prefix.push_back(f);
    }

    out.h = enclosing_cube(prefix, policy.axes(d));
    out.x0 = out.h.anchor;
    view.allow(out.h.corners());
    out.marks = policy.marks(out.h, view);
    out.markReads = view.take_reads();
    if (out.marks.size() != n) throw ParameterError("discover: policy returned the wrong number of marks");
    for (double a : out.marks)
        if (!(a >= 0.0) || !std::isfinite(a)) throw ParameterError("discover: marks must be finite and >= 0");

    if (auto* ep = dynamic_cast<EprimePolicy*>(&policy)) {
        out.event = ep->event();
        out.v = ep->v_labels();
        out.u = ep->u_labels();
    }
    return out;
}

EprimePolicy::EprimePolicy(std::vector<double> phi, double delta, DirectionBasis basis)
    : phi_(std::move(phi)), delta_(delta), basis_(std::move(basis)) {
    const int d = basis_.dim();
    if (static_cast<int>(phi_.size()) != 2 * d) throw ParameterError("eprime: phi needs 2d entries");
    for (double v : phi_)
        if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError("eprime: phi entries must be finite and >= 0");
    if (!(delta_ > 0.0 && delta_ < 1.0 / (2.0 * d))) throw ParameterError("eprime: delta must lie in (0, 1/(2d))");
}

EprimePolicy::EprimePolicy(std::vector<double> phi, double delta)
    : EprimePolicy(phi, delta, DirectionBasis::standard(static_cast<int>(phi.size()) / 2)) {}

std::vector<Direction> EprimePolicy::axes(int d) const {
    return {basis_.ordered.begin(), basis_.ordered.begin() + d};
}

Site EprimePolicy::next(const std::vector<Site>& prefix, AuditedView& view) {
    const int d = view.dim();
    if (prefix.size() == 1) {
        const Site origin = Site::zero(d);
        const auto p = view.read(origin);
        k_ = -1;
        for (int k = 0; k < 2 * d; ++k)
            if (p[basis_.ordered[static_cast<std::size_t>(k)].index] >= delta_) {
                k_ = k;
                break;
            }
        if (k_ < 0) throw DegenerateEnvironment("eprime: no direction carries mass delta");

        Site anchor = origin;
        if (k_ >= d)
            for (int i = 0; i < d; ++i) anchor -= basis_.ordered[static_cast<std::size_t>(i)].vector();
        const UnitHypercube h(anchor, axes(d));
        order_ = bfs_order(h, origin);

        const int ek = basis_.ordered[static_cast<std::size_t>(k_)].index;
        v_.assign(1, origin);
        u_.clear();
        auto dirs = h.interior_directions(h.mask_of(origin));
        std::sort(dirs.begin(), dirs.end());
        for (int f : dirs) {
            if (f == ek) continue;
            v_.push_back(step(origin, f));
            u_.push_back(step(step(origin, ek), f));
        }
        v_.push_back(step(origin, ek));
    }
    return order_[prefix.size()];
}

std::vector<double> EprimePolicy::marks(const UnitHypercube& h, AuditedView&) {
    const int d = h.dim();
    const auto gam = gammas_from_phi(h, phi_);
    std::vector<double> alpha(h.size(), 0.0);
    const Site& v0 = v_.front();
    const Site& vd = v_.back();
    alpha[h.mask_of(v0)] = gam[h.mask_of(v0)];
    alpha[h.mask_of(vd)] = gam[h.mask_of(vd)];
    for (int i = 1; i < d; ++i) {
        const Site& vi = v_[static_cast<std::size_t>(i)];
        const Site& ui = u_[static_cast<std::size_t>(i - 1)];
        alpha[h.mask_of(vi)] = phi_[static_cast<std::size_t>(direction_index(vi - v0))];
        alpha[h.mask_of(ui)] = phi_[static_cast<std::size_t>(direction_index(ui - vd))];
    }
    return alpha;
}

FixedPolicy::FixedPolicy(UnitHypercube cube, std::vector<double> marks)
    : cube_(std::move(cube)), marks_(std::move(marks)) {
    if (!cube_.contains(Site::zero(cube_.dim()))) throw ParameterError("fixed policy: cube must contain the origin");
    if (marks_.size() != cube_.size()) throw ParameterError("fixed policy: need one mark per corner");
    order_ = bfs_order(cube_, Site::zero(cube_.dim()));
}

std::vector<Direction> FixedPolicy::axes(int) const { return cube_.axes; }

Site FixedPolicy::next(const std::vector<Site>& prefix, AuditedView&) { return order_[prefix.size()]; }

std::vector<double> FixedPolicy::marks(const UnitHypercube& h, AuditedView&) {
    // Marks are given by offset from the anchor of the configured cube.
    if (!(h.anchor == cube_.anchor)) throw ParameterError("fixed policy: discovered cube differs from the configured one");
    return marks_;
}

std::vector<double> gammas_from_phi(const UnitHypercube& cube, const std::vector<double>& phi) {
    if (static_cast<int>(phi.size()) != 2 * cube.dim()) throw ParameterError("gammas: phi needs 2d entries");
    std::vector<double> g(cube.size(), 0.0);
    for (std::size_t m = 0; m < cube.size(); ++m)
        for (int e : cube.exterior_directions(m)) g[m] += phi[static_cast<std::size_t>(e)];
    return g;
}

double mark_sum(const MarkedMarkovianHypercube& mmh, const std::vector<double>& gammas) {
    if (gammas.size() != mmh.marks.size()) throw ParameterError("mark_sum: size mismatch");
    double s = 0.0;
    for (std::size_t m = 0; m < gammas.size(); ++m) s += std::min(gammas[m], mmh.marks[m]);
    return s;
}

double PathBundle::maxPi() const {
    double m = 0.0;
    for (const auto& p : paths) m = std::max(m, p.pi);
    return m;
}

PathBundle paths(const Environment& env, const MarkedMarkovianHypercube& mmh, int n) {
    if (n < 1) throw ParameterError("paths: n must be at least 1");
    const int d = env.dim();
    const auto& h = mmh.h;
    const auto qh = QuenchedHypercube::build(env, h);
    const auto a = analyze(qh);
    const std::size_t s = h.mask_of(Site::zero(d));
    const auto law = exit_law(qh, a, s);

    PathBundle out;
    out.n = n;
    std::set<Site> used;
    for (const auto& c : h.corners()) used.insert(c);

    for (std::size_t m = 0; m < h.size(); ++m) {
        BundlePath bp;
        bp.corner = m;
        bp.qtilde = a.Qtilde(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(m));
        const ExitStep* best = nullptr;
        for (const auto& st : law)
            if (st.corner == m && (!best || st.prob > best->prob)) best = &st;
        if (!best) throw DegenerateEnvironment("paths: corner without exterior step");
        bp.y1 = best->target;
        bp.exitProb = best->prob;
        bp.ys.push_back(bp.y1);

        const auto ext = h.exterior_directions(m);
        double prodQ = 1.0;
        for (int i = 1; i < n; ++i) {
            const auto p = env.transitions_at(bp.ys.back());
            int arg = -1;
            for (int e : ext)
                if (arg < 0 || p[e] > p[arg] || (p[e] == p[arg] && e < arg)) arg = e;
            bp.Q.push_back(p[arg]);
            prodQ *= p[arg];
            bp.ys.push_back(step(bp.ys.back(), arg));
        }
        bp.pi = bp.exitProb * prodQ;
        bp.bound = bp.qtilde * prodQ / d;
        if (bp.pi < bp.bound * (1.0 - 1e-12)) out.boundHolds = false;
        if (bp.ys.back().norm1() < n) out.distanceOk = false;
        for (const auto& y : bp.ys)
            if (!used.insert(y).second) out.disjoint = false;
        out.paths.push_back(std::move(bp));
    }
    return out;
}

}  // namespace rwre
