#include "rwre/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

namespace rwre {

Site::Site(std::initializer_list<std::int64_t> coords) : dim(static_cast<int>(coords.size())) {
    if (coords.size() > static_cast<std::size_t>(kMaxDim))
        throw ParameterError("site dimension exceeds kMaxDim");
    std::copy(coords.begin(), coords.end(), c.begin());
}

Site& Site::operator+=(const Site& o) {
    for (int i = 0; i < dim; ++i) c[i] += o.c[i];
    return *this;
}

Site& Site::operator-=(const Site& o) {
    for (int i = 0; i < dim; ++i) c[i] -= o.c[i];
    return *this;
}

Site Site::operator-() const {
    Site r(dim);
    for (int i = 0; i < dim; ++i) r.c[i] = -c[i];
    return r;
}

std::int64_t Site::norm1() const {
    std::int64_t s = 0;
    for (int i = 0; i < dim; ++i) s += c[i] < 0 ? -c[i] : c[i];
    return s;
}

std::int64_t Site::norm_inf() const {
    std::int64_t s = 0;
    for (int i = 0; i < dim; ++i) s = std::max(s, c[i] < 0 ? -c[i] : c[i]);
    return s;
}

std::string Site::str() const {
    std::ostringstream os;
    os << '(';
    for (int i = 0; i < dim; ++i) os << (i ? "," : "") << c[i];
    os << ')';
    return os.str();
}

std::size_t SiteHash::operator()(const Site& s) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(s.dim);
    for (int i = 0; i < s.dim; ++i) {
        h ^= static_cast<std::uint64_t>(s.c[i]) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
}

double dot(const Site& z, const RealVec& v) {
    double s = 0.0;
    for (int i = 0; i < z.dim; ++i) s += static_cast<double>(z[i]) * v[static_cast<std::size_t>(i)];
    return s;
}

double dot(const RealVec& a, const RealVec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Site Direction::vector() const {
    Site v(dim);
    v[axis()] = sign();
    return v;
}

int direction_index(const Site& s) {
    int found = -1;
    for (int i = 0; i < s.dim; ++i) {
        if (s[i] == 0) continue;
        if (found >= 0 || (s[i] != 1 && s[i] != -1)) return -1;
        found = s[i] == 1 ? i : i + s.dim;
    }
    return found;
}

DirectionBasis DirectionBasis::standard(int d) {
    DirectionBasis b;
    b.ell.assign(static_cast<std::size_t>(d), 0.0);
    b.ell[0] = 1.0;
    for (int i = 0; i < 2 * d; ++i) b.ordered.push_back({i, d});
    return b;
}

DirectionBasis build_basis(const RealVec& ell, int d) {
    if (d < 1 || d > kMaxDim) throw ParameterError("dimension out of range");
    if (static_cast<int>(ell.size()) != d) throw ParameterError("ell has wrong dimension");
    const double n = std::sqrt(dot(ell, ell));
    if (!(std::abs(n - 1.0) <= 1e-12)) throw ParameterError("ell must be a unit vector");

    std::vector<int> axes(static_cast<std::size_t>(d));
    std::iota(axes.begin(), axes.end(), 0);
    std::stable_sort(axes.begin(), axes.end(), [&](int a, int b) {
        return std::abs(ell[static_cast<std::size_t>(a)]) > std::abs(ell[static_cast<std::size_t>(b)]);
    });

    DirectionBasis basis;
    basis.ell = ell;
    basis.ordered.resize(static_cast<std::size_t>(2 * d));
    for (int k = 0; k < d; ++k) {
        const int a = axes[static_cast<std::size_t>(k)];
        const bool positive = ell[static_cast<std::size_t>(a)] >= 0.0;
        const Direction dir{positive ? a : a + d, d};
        basis.ordered[static_cast<std::size_t>(k)] = dir;
        basis.ordered[static_cast<std::size_t>(k + d)] = dir.opposite();
    }
    return basis;
}

UnitHypercube::UnitHypercube(Site a, std::vector<Direction> basisAxes)
    : anchor(std::move(a)), axes(std::move(basisAxes)) {
    if (static_cast<int>(axes.size()) != anchor.dim)
        throw ParameterError("hypercube needs one axis per dimension");
    std::vector<bool> seen(static_cast<std::size_t>(anchor.dim), false);
    for (const auto& ax : axes) {
        if (ax.dim != anchor.dim || seen[static_cast<std::size_t>(ax.axis())])
            throw ParameterError("hypercube axes must span distinct coordinates");
        seen[static_cast<std::size_t>(ax.axis())] = true;
    }
}

UnitHypercube UnitHypercube::at(const Site& a) {
    std::vector<Direction> ax;
    for (int i = 0; i < a.dim; ++i) ax.push_back({i, a.dim});
    return UnitHypercube(a, std::move(ax));
}

Site UnitHypercube::corner(std::size_t mask) const {
    Site s = anchor;
    for (int i = 0; i < dim(); ++i)
        if (mask >> i & 1U) s += axes[static_cast<std::size_t>(i)].vector();
    return s;
}

std::vector<Site> UnitHypercube::corners() const {
    std::vector<Site> out;
    out.reserve(size());
    for (std::size_t m = 0; m < size(); ++m) out.push_back(corner(m));
    return out;
}

bool UnitHypercube::contains(const Site& y) const {
    if (y.dim != dim()) return false;
    for (const auto& ax : axes) {
        const std::int64_t off = (y[ax.axis()] - anchor[ax.axis()]) * ax.sign();
        if (off != 0 && off != 1) return false;
    }
    return true;
}

std::size_t UnitHypercube::mask_of(const Site& y) const {
    if (!contains(y)) throw ParameterError("site " + y.str() + " is not a corner of the hypercube");
    std::size_t m = 0;
    for (int i = 0; i < dim(); ++i) {
        const auto& ax = axes[static_cast<std::size_t>(i)];
        if ((y[ax.axis()] - anchor[ax.axis()]) * ax.sign() == 1) m |= std::size_t{1} << i;
    }
    return m;
}

std::vector<int> UnitHypercube::exterior_directions(std::size_t mask) const {
    std::vector<int> out;
    for (int i = 0; i < dim(); ++i) {
        const auto& ax = axes[static_cast<std::size_t>(i)];
        out.push_back((mask >> i & 1U) ? ax.index : ax.opposite().index);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> UnitHypercube::interior_directions(std::size_t mask) const {
    std::vector<int> out;
    for (int i = 0; i < dim(); ++i) {
        const auto& ax = axes[static_cast<std::size_t>(i)];
        out.push_back((mask >> i & 1U) ? ax.opposite().index : ax.index);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<UnitHypercube> hypercubes_containing(const Site& x) {
    std::vector<UnitHypercube> out;
    const std::size_t n = std::size_t{1} << x.dim;
    for (std::size_t m = 0; m < n; ++m) {
        Site a = x;
        for (int i = 0; i < x.dim; ++i)
            if (m >> i & 1U) a[i] -= 1;
        out.push_back(UnitHypercube::at(a));
    }
    return out;
}

std::vector<Site> boundary_towards(const Site& x, const std::function<bool(const Site&)>& inA) {
    if (!inA(x)) throw ParameterError("boundary_towards: x must belong to A");
    std::vector<Site> out;
    for (int e = 0; e < 2 * x.dim; ++e) {
        Site y = step(x, e);
        if (!inA(y)) out.push_back(y);
    }
    return out;
}

std::vector<Site> boundary_towards(const Site& x, const std::vector<Site>& A) {
    return boundary_towards(x, [&](const Site& y) { return std::find(A.begin(), A.end(), y) != A.end(); });
}

std::vector<Site> outer_boundary(const std::vector<Site>& A) {
    std::unordered_set<Site, SiteHash> in(A.begin(), A.end());
    std::set<Site> out;
    for (const auto& x : A)
        for (int e = 0; e < 2 * x.dim; ++e) {
            Site y = step(x, e);
            if (!in.count(y)) out.insert(y);
        }
    return {out.begin(), out.end()};
}

AxisChoice nearest_axis(const RealVec& vhat) {
    AxisChoice best;
    double bestAbs = -1.0;
    for (std::size_t i = 0; i < vhat.size(); ++i) {
        if (std::abs(vhat[i]) > bestAbs) {
            bestAbs = std::abs(vhat[i]);
            best.axis = static_cast<int>(i);
            best.sign = vhat[i] >= 0.0 ? 1 : -1;
        }
    }
    best.cosine = bestAbs;
    if (!(best.cosine > 0.0)) throw ParameterError("degenerate direction: vhat . e_i0 = 0");
    return best;
}

Projection project(const Site& z, const RealVec& vhat, const AxisChoice& axis) {
    const double t = static_cast<double>(axis.sign * z[axis.axis]) / axis.cosine;
    Projection pr;
    pr.P.resize(vhat.size());
    pr.Q.resize(vhat.size());
    for (std::size_t i = 0; i < vhat.size(); ++i) {
        pr.P[i] = t * vhat[i];
        pr.Q[i] = static_cast<double>(z[static_cast<int>(i)]) - pr.P[i];
    }
    // The i0 component of Q vanishes identically.
    pr.Q[static_cast<std::size_t>(axis.axis)] = 0.0;
    pr.P[static_cast<std::size_t>(axis.axis)] = static_cast<double>(z[axis.axis]);
    return pr;
}

Projection project(const Site& z, const RealVec& vhat) { return project(z, vhat, nearest_axis(vhat)); }

TiltedBox::TiltedBox(Site center, double beta, double L, RealVec vhat)
    : center_(std::move(center)), beta_(beta), L_(L), vhat_(std::move(vhat)) {
    if (!(beta_ > 0.0 && beta_ < 1.0)) throw ParameterError("tilted box: beta must lie in (0,1)");
    if (!(L_ > 0.0)) throw ParameterError("tilted box: L must be positive");
    if (static_cast<int>(vhat_.size()) != center_.dim) throw ParameterError("tilted box: vhat dimension");
    axis_ = nearest_axis(vhat_);
    side_ = std::pow(L_, beta_);
}

bool TiltedBox::contains(const Site& y) const {
    const Site z = y - center_;
    const double s = static_cast<double>(axis_.sign * z[axis_.axis]);
    if (!(-side_ < s && s < L_)) return false;
    const Projection pr = project(z, vhat_, axis_);
    for (double q : pr.Q)
        if (!(std::abs(q) < side_)) return false;
    return true;
}

bool TiltedBox::is_front_exit(const Site& y) const {
    const Site z = y - center_;
    return static_cast<double>(axis_.sign * z[axis_.axis]) == L_ && !contains(y);
}

bool TiltedBox::on_front_boundary(const Site& y) const {
    if (!is_front_exit(y)) return false;
    for (int e = 0; e < 2 * y.dim; ++e)
        if (contains(step(y, e))) return true;
    return false;
}

RealVec Rotation::apply(const RealVec& v) const {
    RealVec r(static_cast<std::size_t>(dim), 0.0);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) r[static_cast<std::size_t>(i)] += at(i, j) * v[static_cast<std::size_t>(j)];
    return r;
}

RealVec Rotation::apply_transpose(const RealVec& v) const {
    RealVec r(static_cast<std::size_t>(dim), 0.0);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) r[static_cast<std::size_t>(j)] += at(i, j) * v[static_cast<std::size_t>(i)];
    return r;
}

Rotation rotation_to(const RealVec& ell) {
    const int d = static_cast<int>(ell.size());
    if (d < 1) throw ParameterError("rotation: empty direction");
    if (!(std::abs(std::sqrt(dot(ell, ell)) - 1.0) <= 1e-12)) throw ParameterError("rotation: ell must be unit");
    Rotation R;
    R.dim = d;
    R.m.assign(static_cast<std::size_t>(d * d), 0.0);
    for (int i = 0; i < d; ++i) R.m[static_cast<std::size_t>(i * d + i)] = 1.0;

    const double c = ell[0];
    RealVec w(ell);
    w[0] = 0.0;
    double s = std::sqrt(dot(w, w));
    if (s < 1e-15) {
        if (c > 0.0) return R;
        // ell = -e_1: half turn in the (e_1, e_2) plane; in d = 1 a reflection.
        if (d == 1) {
            R.m[0] = -1.0;
            return R;
        }
        w.assign(static_cast<std::size_t>(d), 0.0);
        w[1] = 1.0;
        s = 0.0;
    } else {
        for (auto& x : w) x /= s;
    }
    // R = I + (c - 1)(u u^T + w w^T) + s (w u^T - u w^T), u = e_1.
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const double ui = i == 0 ? 1.0 : 0.0;
            const double uj = j == 0 ? 1.0 : 0.0;
            const double wi = w[static_cast<std::size_t>(i)];
            const double wj = w[static_cast<std::size_t>(j)];
            R.m[static_cast<std::size_t>(i * d + j)] += (c - 1.0) * (ui * uj + wi * wj) + s * (wi * uj - ui * wj);
        }
    return R;
}

SlabBox::SlabBox(RealVec ell, double L, double Lp, double Ltilde)
    : ell_(std::move(ell)), L_(L), Lp_(Lp), Lt_(Ltilde), rot_(rotation_to(ell_)) {
    if (!(L_ > 0.0 && Lp_ > 0.0 && Lt_ > 0.0)) throw ParameterError("slab box: side lengths must be positive");
}

bool SlabBox::contains(const Site& y) const {
    RealVec v(static_cast<std::size_t>(y.dim));
    for (int i = 0; i < y.dim; ++i) v[static_cast<std::size_t>(i)] = static_cast<double>(y[i]);
    const RealVec r = rot_.apply_transpose(v);
    if (!(-Lp_ < r[0] && r[0] < L_)) return false;
    for (std::size_t i = 1; i < r.size(); ++i)
        if (!(std::abs(r[i]) < Lt_)) return false;
    return true;
}

Slab::Slab(RealVec ell, double b, double L) : ell_(std::move(ell)), lo_(-b * L), hi_(L) {
    if (!(b > 0.0)) throw ParameterError("slab: b must be positive");
    if (!(L > 0.0)) throw ParameterError("slab: L must be positive");
}

bool Slab::contains(const Site& y) const {
    const double s = dot(y, ell_);
    return lo_ <= s && s <= hi_;
}

TrapCollar trap_collar(int d) {
    if (d < 1 || d > kMaxDim) throw ParameterError("trap_collar: dimension out of range");
    TrapCollar tc;
    Site anchor(d);
    anchor[0] = d;
    tc.cube = UnitHypercube::at(anchor);

    // Points at L-infinity distance exactly 1 from the cube live in the
    // enclosing box [d-1, d+2] x [-1, 2]^{d-1}.
    const std::size_t total = std::size_t{1} << (2 * d);
    for (std::size_t code = 0; code < total; ++code) {
        Site z(d);
        for (int i = 0; i < d; ++i) z[i] = anchor[i] - 1 + static_cast<std::int64_t>(code >> (2 * i) & 3U);
        if (!tc.cube.contains(z)) tc.A.push_back(z);
    }
    for (int k = 0; k < d; ++k) {
        Site b(d);
        b[0] = k;
        tc.B.push_back(b);
    }

    std::unordered_set<Site, SiteHash> unionSet(tc.A.begin(), tc.A.end());
    unionSet.insert(tc.B.begin(), tc.B.end());
    std::unordered_set<Site, SiteHash> seen{tc.B.front()};
    std::deque<Site> queue{tc.B.front()};
    while (!queue.empty()) {
        const Site x = queue.front();
        queue.pop_front();
        for (int e = 0; e < 2 * d; ++e) {
            Site y = step(x, e);
            if (unionSet.count(y) && seen.insert(y).second) queue.push_back(y);
        }
    }
    tc.connected = seen.size() == unionSet.size();

    std::unordered_set<Site, SiteHash> aSet(tc.A.begin(), tc.A.end());
    tc.contains_cube_boundary = true;
    for (const auto& y : outer_boundary(tc.cube.corners()))
        if (!aSet.count(y)) tc.contains_cube_boundary = false;
    tc.disjoint_from_cube = std::none_of(tc.A.begin(), tc.A.end(), [&](const Site& z) { return tc.cube.contains(z); });
    return tc;
}

double collar_min_level(const TrapCollar& collar, const RealVec& ellInBasis) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& z : collar.A) m = std::min(m, dot(z, ellInBasis));
    return m;
}

}  // namespace rwre
