#pragma once

// Integer-lattice geometry: sites, unit directions, ordered bases, unit
// hypercubes, projections along an asymptotic direction, tilted boxes,
// rotated slab boxes and the trap collar around a hypercube.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rwre/errors.hpp"

namespace rwre {

inline constexpr int kMaxDim = 8;

/// A point of Z^d, d <= kMaxDim. Unused coordinates are kept at zero.
struct Site {
    std::array<std::int64_t, kMaxDim> c{};
    int dim = 0;

    Site() = default;
    explicit Site(int d) : dim(d) {}
    Site(std::initializer_list<std::int64_t> coords);

    static Site zero(int d) { return Site(d); }

    std::int64_t& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
    std::int64_t operator[](int i) const { return c[static_cast<std::size_t>(i)]; }

    friend bool operator==(const Site& a, const Site& b) { return a.dim == b.dim && a.c == b.c; }
    friend bool operator<(const Site& a, const Site& b) { return a.c < b.c; }

    Site& operator+=(const Site& o);
    Site& operator-=(const Site& o);
    friend Site operator+(Site a, const Site& b) { return a += b; }
    friend Site operator-(Site a, const Site& b) { return a -= b; }
    Site operator-() const;

    std::int64_t norm1() const;
    std::int64_t norm_inf() const;
    std::string str() const;
};

struct SiteHash {
    std::size_t operator()(const Site& s) const noexcept;
};

using RealVec = std::vector<double>;

double dot(const Site& z, const RealVec& v);
double dot(const RealVec& a, const RealVec& b);

/// Unit step e_index. Indices 0..d-1 are +e_i, d..2d-1 are -e_{i-d}.
struct Direction {
    int index = 0;
    int dim = 0;

    int axis() const { return index % dim; }
    int sign() const { return index < dim ? 1 : -1; }
    Direction opposite() const { return {(index + dim) % (2 * dim), dim}; }
    Site vector() const;
    double dot(const RealVec& v) const { return sign() * v[static_cast<std::size_t>(axis())]; }

    friend bool operator==(const Direction& a, const Direction& b) {
        return a.index == b.index && a.dim == b.dim;
    }
};

/// Index of a unit step vector, -1 when the vector is not a unit step.
int direction_index(const Site& step);

inline Site step(const Site& x, int dirIndex) {
    Site y = x;
    const int d = x.dim;
    y[dirIndex % d] += dirIndex < d ? 1 : -1;
    return y;
}

/// The 2d unit directions enumerated against ell: ordered[0..d-1] have
/// decreasing nonnegative dot products with ell, ordered[i+d] = -ordered[i].
struct DirectionBasis {
    RealVec ell;
    std::vector<Direction> ordered;

    int dim() const { return static_cast<int>(ell.size()); }
    /// The standard basis e_1..e_d (the basis of any ell with sorted nonnegative entries).
    static DirectionBasis standard(int d);
};

DirectionBasis build_basis(const RealVec& ell, int d);

/// {anchor + sum eps_i b_i : eps in {0,1}^d} for basis vectors b_1..b_d.
struct UnitHypercube {
    Site anchor;
    std::vector<Direction> axes;  // d signed basis directions

    UnitHypercube() = default;
    UnitHypercube(Site a, std::vector<Direction> basisAxes);
    /// Hypercube over the standard positive axes.
    static UnitHypercube at(const Site& a);

    int dim() const { return anchor.dim; }
    std::size_t size() const { return std::size_t{1} << dim(); }

    /// Corner for the bit mask eps (bit i set <=> +b_i added).
    Site corner(std::size_t mask) const;
    std::vector<Site> corners() const;
    bool contains(const Site& y) const;
    /// Mask of a member site; throws ParameterError if y is outside.
    std::size_t mask_of(const Site& y) const;
    /// Direction indices leading out of the cube from corner mask.
    std::vector<int> exterior_directions(std::size_t mask) const;
    std::vector<int> interior_directions(std::size_t mask) const;
};

std::vector<UnitHypercube> hypercubes_containing(const Site& x);

/// Neighbours of x outside A (the set d_x A).
std::vector<Site> boundary_towards(const Site& x, const std::function<bool(const Site&)>& inA);
std::vector<Site> boundary_towards(const Site& x, const std::vector<Site>& A);

/// Outer vertex boundary of a finite set.
std::vector<Site> outer_boundary(const std::vector<Site>& A);

/// Projection of z onto vhat along the hyperplane {x . e_i0 = 0}.
struct Projection {
    RealVec P;
    RealVec Q;
};

struct AxisChoice {
    int axis = 0;
    int sign = 1;
    double cosine = 0.0;  // vhat . e_i0 > 0
};

/// Axis maximizing |vhat . e_i|, ties to the smallest index, signed so the
/// cosine is positive.
AxisChoice nearest_axis(const RealVec& vhat);
Projection project(const Site& z, const RealVec& vhat);
Projection project(const Site& z, const RealVec& vhat, const AxisChoice& axis);

class TiltedBox {
public:
    TiltedBox(Site center, double beta, double L, RealVec vhat);

    bool contains(const Site& y) const;
    /// y on the outer boundary with (y - x) . e_i0 = L.
    bool on_front_boundary(const Site& y) const;
    /// Front criterion for a site just reached from inside the box.
    bool is_front_exit(const Site& y) const;

    const Site& center() const { return center_; }
    double beta() const { return beta_; }
    double L() const { return L_; }
    const AxisChoice& axis() const { return axis_; }
    const RealVec& vhat() const { return vhat_; }

private:
    Site center_;
    double beta_;
    double L_;
    RealVec vhat_;
    AxisChoice axis_;
    double side_;  // L^beta
};

/// Dense d x d row-major rotation.
struct Rotation {
    int dim = 0;
    std::vector<double> m;

    double at(int i, int j) const { return m[static_cast<std::size_t>(i * dim + j)]; }
    RealVec apply(const RealVec& v) const;
    RealVec apply_transpose(const RealVec& v) const;
};

/// Rotation sending e_1 onto ell, acting in span{e_1, ell} and fixing its
/// orthogonal complement.
Rotation rotation_to(const RealVec& ell);

/// R((-Lp, L) x (-Lt, Lt)^{d-1}) intersected with Z^d.
class SlabBox {
public:
    SlabBox(RealVec ell, double L, double Lp, double Ltilde);

    bool contains(const Site& y) const;
    const Rotation& rotation() const { return rot_; }
    const RealVec& ell() const { return ell_; }
    double L() const { return L_; }
    double Lp() const { return Lp_; }
    double Ltilde() const { return Lt_; }

private:
    RealVec ell_;
    double L_, Lp_, Lt_;
    Rotation rot_;
};

/// {x : -b L <= x . ell <= L}.
class Slab {
public:
    Slab(RealVec ell, double b, double L);
    bool contains(const Site& y) const;
    const RealVec& ell() const { return ell_; }

private:
    RealVec ell_;
    double lo_, hi_;
};

/// Collar sets around the hypercube located at d*e_1 (coordinates taken in
/// the ordered basis e_1..e_d).
struct TrapCollar {
    std::vector<Site> A;
    std::vector<Site> B;
    UnitHypercube cube;
    bool connected = false;
    bool contains_cube_boundary = false;
    bool disjoint_from_cube = false;
};

TrapCollar trap_collar(int d);

/// Minimum of z . ell over the collar A, with ell given in basis coordinates.
double collar_min_level(const TrapCollar& collar, const RealVec& ellInBasis);

}  // namespace rwre
