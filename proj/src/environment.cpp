#include "rwre/environment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

namespace rwre {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kRejectTolerance = 1e-9;

}  // namespace

TransitionVector::TransitionVector(int dim, const double* values) : dim_(dim) {
    if (dim < 1 || dim > kMaxDim) throw ParameterError("transition vector: dimension out of range");
    double sum = 0.0;
    for (int e = 0; e < 2 * dim; ++e) {
        const double v = values[e];
        if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError("transition vector: negative or non-finite entry");
        p_[static_cast<std::size_t>(e)] = v;
        sum += v;
    }
    const double err = std::abs(sum - 1.0);
    if (err > kRejectTolerance) throw ParameterError("transition vector: entries do not sum to one");
    // Rounding-level drift is left alone so closed-form entries stay exact.
    if (err > 8.0 * dim * std::numeric_limits<double>::epsilon())
        for (int e = 0; e < 2 * dim; ++e) p_[static_cast<std::size_t>(e)] /= sum;
}

TransitionVector TransitionVector::from(std::initializer_list<double> values) {
    if (values.size() % 2 != 0) throw ParameterError("transition vector needs 2d entries");
    return TransitionVector(static_cast<int>(values.size() / 2), values.begin());
}

TransitionVector TransitionVector::uniform(int dim) {
    std::array<double, 2 * kMaxDim> v{};
    std::fill(v.begin(), v.begin() + 2 * dim, 1.0 / (2.0 * dim));
    return TransitionVector(dim, v.data());
}

double TransitionVector::min_entry() const {
    return *std::min_element(p_.begin(), p_.begin() + size());
}

double TransitionVector::max_entry() const {
    return *std::max_element(p_.begin(), p_.begin() + size());
}

int TransitionVector::sample(double u) const {
    double acc = 0.0;
    const int n = size();
    for (int e = 0; e < n; ++e) {
        acc += p_[static_cast<std::size_t>(e)];
        if (u < acc) return e;
    }
    // u landed in the rounding gap above the cumulative sum: last positive entry.
    for (int e = n - 1; e >= 0; --e)
        if (p_[static_cast<std::size_t>(e)] > 0.0) return e;
    return n - 1;
}

int lattice_dim(const SiteLaw& law) {
    return std::visit(overloaded{
                          [](const law::UniformDrift& l) { return l.d; },
                          [](const law::Expl& l) { return l.d; },
                          [](const law::TrapSym& l) { return l.d; },
                          [](const law::TrapTransient& l) { return l.d + 1; },
                          [](const law::Dirichlet& l) { return static_cast<int>(l.weights.size() / 2); },
                          [](const law::TableMixture& l) { return l.vectors.empty() ? 0 : l.vectors.front().dim(); },
                      },
                      law);
}

std::string law_name(const SiteLaw& law) {
    return std::visit(overloaded{
                          [](const law::UniformDrift&) { return std::string("uniform_drift"); },
                          [](const law::Expl&) { return std::string("expl"); },
                          [](const law::TrapSym&) { return std::string("trap_sym"); },
                          [](const law::TrapTransient&) { return std::string("trap_transient"); },
                          [](const law::Dirichlet&) { return std::string("dirichlet"); },
                          [](const law::TableMixture&) { return std::string("table_mixture"); },
                      },
                      law);
}

std::uint64_t law_tag(const SiteLaw& law) {
    return 0x4c415700ULL + static_cast<std::uint64_t>(law.index());
}

void validate(const SiteLaw& law) {
    std::visit(overloaded{
                   [](const law::UniformDrift& l) {
                       if (l.d < 1 || l.d > kMaxDim) throw ParameterError("uniform_drift: d out of range");
                       if (!(l.kappa >= 0.0 && l.kappa <= 1.0 / (2.0 * l.d) + 1e-15))
                           throw ParameterError("uniform_drift: kappa must lie in [0, 1/(2d)]");
                       if (l.axis < 0 || l.axis >= 2 * l.d) throw ParameterError("uniform_drift: axis out of range");
                       if (!(l.strength > -1.0)) throw ParameterError("uniform_drift: strength must exceed -1");
                   },
                   [](const law::Expl& l) {
                       // d = 1 leaves no other direction of the favoured sign to carry the rest of its mass.
                       if (l.d < 2 || l.d > kMaxDim) throw ParameterError("expl: d must lie in [2, 8]");
                       const double lo = 1.0 / (2.0 * l.d + 1.0);
                       const double hi = 2.0 * l.d / (2.0 * l.d + 1.0);
                       if (!(l.eps >= lo && l.eps < hi))
                           throw ParameterError("expl: eps must lie in [1/(2d+1), 2d/(2d+1))");
                   },
                   [](const law::TrapSym& l) {
                       if (l.d < 1 || l.d > kMaxDim) throw ParameterError("trap_sym: d out of range");
                       if (!(l.tail >= 0.0) || !std::isfinite(l.tail)) throw ParameterError("trap_sym: tail must be >= 0");
                   },
                   [](const law::TrapTransient& l) {
                       if (l.d < 1 || l.d + 1 > kMaxDim) throw ParameterError("trap_transient: d out of range");
                       if (!(l.tail >= 0.0) || !std::isfinite(l.tail))
                           throw ParameterError("trap_transient: tail must be >= 0");
                   },
                   [](const law::Dirichlet& l) {
                       const auto n = l.weights.size();
                       if (n < 2 || n % 2 != 0 || n > 2 * static_cast<std::size_t>(kMaxDim))
                           throw ParameterError("dirichlet: need 2d weights");
                       for (double w : l.weights)
                           if (!(w > 0.0) || !std::isfinite(w)) throw ParameterError("dirichlet: weights must be > 0");
                   },
                   [](const law::TableMixture& l) {
                       if (l.vectors.empty() || l.vectors.size() != l.weights.size())
                           throw ParameterError("table_mixture: need one weight per vector");
                       for (double w : l.weights)
                           if (!(w >= 0.0) || !std::isfinite(w)) throw ParameterError("table_mixture: bad weight");
                       if (!(std::accumulate(l.weights.begin(), l.weights.end(), 0.0) > 0.0))
                           throw ParameterError("table_mixture: weights sum to zero");
                       for (const auto& v : l.vectors)
                           if (v.dim() != l.vectors.front().dim())
                               throw ParameterError("table_mixture: mixed dimensions");
                   },
               },
               law);
}

bool law_is_elliptic(const SiteLaw& law) {
    return std::visit(overloaded{
                          [](const law::UniformDrift&) { return true; },
                          [](const law::Expl&) { return true; },
                          [](const law::TrapSym&) { return true; },
                          [](const law::TrapTransient&) { return true; },
                          [](const law::Dirichlet&) { return true; },
                          [](const law::TableMixture& l) {
                              for (std::size_t i = 0; i < l.vectors.size(); ++i)
                                  if (l.weights[i] > 0.0 && !l.vectors[i].elliptic()) return false;
                              return true;
                          },
                      },
                      law);
}

double sample_expl_T(double u, int d) { return (2.0 * d + 1.0) * std::pow(u, -6.0 * d); }

double sample_trap_T(double u, int d) { return 0.5 * std::pow(u, static_cast<double>(1U << d)); }

double sample_trap_T_tail(double u, double t) { return 0.5 * std::pow(u, 1.0 / t); }

double trap_tail(int d, double tail) { return tail > 0.0 ? tail : 1.0 / static_cast<double>(1U << d); }

namespace {

SiteDraw draw_uniform_drift(const law::UniformDrift& l, CounterStream& s) {
    const int n = 2 * l.d;
    std::array<double, 2 * kMaxDim> w{};
    double total = 0.0;
    for (int e = 0; e < n; ++e) {
        w[static_cast<std::size_t>(e)] = s.uniform() * (e == l.axis ? 1.0 + l.strength : 1.0);
        total += w[static_cast<std::size_t>(e)];
    }
    const double free = 1.0 - 2.0 * l.d * l.kappa;
    std::array<double, 2 * kMaxDim> p{};
    for (int e = 0; e < n; ++e) p[static_cast<std::size_t>(e)] = l.kappa + free * w[static_cast<std::size_t>(e)] / total;
    return {TransitionVector(l.d, p.data())};
}

SiteDraw draw_expl(const law::Expl& l, CounterStream& s) {
    const int d = l.d;
    SiteDraw out;
    out.i0 = std::min(2 * d - 1, static_cast<int>(s.uniform() * 2 * d));
    out.T = sample_expl_T(s.uniform(), d);
    const double invT = 1.0 / out.T;
    const bool positive = out.i0 < d;
    std::array<double, 2 * kMaxDim> p{};
    const double posShare = (1.0 - l.eps - (positive ? invT : 0.0)) / (d - (positive ? 1 : 0));
    const double negShare = (l.eps - (positive ? 0.0 : invT)) / (d - (positive ? 0 : 1));
    for (int e = 0; e < 2 * d; ++e) {
        if (e == out.i0)
            p[static_cast<std::size_t>(e)] = invT;
        else
            p[static_cast<std::size_t>(e)] = e < d ? posShare : negShare;
    }
    out.p = TransitionVector(d, p.data());
    return out;
}

// The sign basis B0 = {s_i e_i}: bit i of `signs` set means s_i = -1.
bool in_basis(int e, int d, unsigned signs) {
    const int axis = e % d;
    const bool negative = e >= d;
    return negative == static_cast<bool>(signs >> axis & 1U);
}

SiteDraw draw_trap_sym(const law::TrapSym& l, CounterStream& s) {
    const int d = l.d;
    SiteDraw out;
    out.T = l.tail > 0.0 ? sample_trap_T_tail(s.uniform(), l.tail) : sample_trap_T(s.uniform(), d);
    out.basisSigns = static_cast<unsigned>(s.bits() >> 40) & ((1U << d) - 1U);
    std::array<double, 2 * kMaxDim> p{};
    for (int e = 0; e < 2 * d; ++e)
        p[static_cast<std::size_t>(e)] = in_basis(e, d, out.basisSigns) ? out.T / d : (1.0 - out.T) / d;
    out.p = TransitionVector(d, p.data());
    return out;
}

SiteDraw draw_trap_transient(const law::TrapTransient& l, CounterStream& s) {
    const int d = l.d;
    const int D = d + 1;
    SiteDraw out;
    out.T = l.tail > 0.0 ? sample_trap_T_tail(s.uniform(), l.tail) : sample_trap_T(s.uniform(), d);
    out.basisSigns = static_cast<unsigned>(s.bits() >> 40) & ((1U << d) - 1U);
    const double T = out.T;
    const double C = d + 3.0 * T;
    std::array<double, 2 * kMaxDim> p{};
    for (int axis = 0; axis < d; ++axis) {
        const bool minusInBasis = out.basisSigns >> axis & 1U;
        const double inB = T / C;
        const double outB = (1.0 - T) / C;
        p[static_cast<std::size_t>(axis)] = minusInBasis ? outB : inB;
        p[static_cast<std::size_t>(axis + D)] = minusInBasis ? inB : outB;
    }
    p[static_cast<std::size_t>(d)] = 2.0 * T / C;      // e_{d+1}
    p[static_cast<std::size_t>(d + D)] = T / C;        // -e_{d+1}
    out.p = TransitionVector(D, p.data());
    return out;
}

SiteDraw draw_dirichlet(const law::Dirichlet& l, CounterStream& s) {
    const int n = static_cast<int>(l.weights.size());
    std::array<double, 2 * kMaxDim> g{};
    double total = 0.0;
    for (int e = 0; e < n; ++e) {
        const double u = s.uniform();
        g[static_cast<std::size_t>(e)] = boost::math::gamma_p_inv(l.weights[static_cast<std::size_t>(e)], u);
        total += g[static_cast<std::size_t>(e)];
    }
    for (int e = 0; e < n; ++e) g[static_cast<std::size_t>(e)] /= total;
    return {TransitionVector(n / 2, g.data())};
}

SiteDraw draw_table(const law::TableMixture& l, CounterStream& s) {
    const double total = std::accumulate(l.weights.begin(), l.weights.end(), 0.0);
    const double u = s.uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < l.vectors.size(); ++i) {
        acc += l.weights[i];
        if (u < acc) return {l.vectors[i]};
    }
    for (std::size_t i = l.vectors.size(); i-- > 0;)
        if (l.weights[i] > 0.0) return {l.vectors[i]};
    return {l.vectors.back()};
}

}  // namespace

SiteDraw draw_site(const SiteLaw& law, CounterStream& stream) {
    return std::visit(overloaded{
                          [&](const law::UniformDrift& l) { return draw_uniform_drift(l, stream); },
                          [&](const law::Expl& l) { return draw_expl(l, stream); },
                          [&](const law::TrapSym& l) { return draw_trap_sym(l, stream); },
                          [&](const law::TrapTransient& l) { return draw_trap_transient(l, stream); },
                          [&](const law::Dirichlet& l) { return draw_dirichlet(l, stream); },
                          [&](const law::TableMixture& l) { return draw_table(l, stream); },
                      },
                      law);
}

Environment::Environment(SiteLaw law, std::uint64_t masterSeed)
    : law_(std::move(law)), seed_(masterSeed), tag_(law_tag(law_)), dim_(0) {
    validate(law_);
    dim_ = lattice_dim(law_);
}

SiteDraw Environment::draw_at(const Site& x) const {
    CounterStream stream(site_key(seed_, tag_, x));
    return draw_site(law_, stream);
}

EllipticityReport ellipticity_profile(const Environment& env, std::size_t samples) {
    if (samples < 1) throw ParameterError("ellipticity_profile: need at least one sample");
    const int d = env.dim();
    EllipticityReport r;
    r.samples = samples;
    r.minEntry = std::numeric_limits<double>::infinity();
    r.maxEntry = 0.0;
    r.meanEntries.assign(static_cast<std::size_t>(2 * d), 0.0);
    for (int k = 1; k <= 40; ++k) r.kappaGrid.push_back(static_cast<double>(k) / (80.0 * d));
    std::vector<std::size_t> counts(r.kappaGrid.size(), 0);

    double earlyMin = std::numeric_limits<double>::infinity();
    const std::size_t early = std::max<std::size_t>(1, samples / 10);
    for (std::size_t i = 0; i < samples; ++i) {
        Site x(d);
        x[0] = static_cast<std::int64_t>(i);
        const auto p = env.transitions_at(x);
        const double lo = p.min_entry();
        const double hi = p.max_entry();
        r.minEntry = std::min(r.minEntry, lo);
        r.maxEntry = std::max(r.maxEntry, hi);
        if (i < early) earlyMin = std::min(earlyMin, lo);
        for (int e = 0; e < 2 * d; ++e) r.meanEntries[static_cast<std::size_t>(e)] += p[e];
        for (std::size_t k = 0; k < r.kappaGrid.size(); ++k) {
            const double kap = r.kappaGrid[k];
            if (lo > kap && hi < 1.0 - kap) ++counts[k];
        }
    }
    for (auto& m : r.meanEntries) m /= static_cast<double>(samples);
    for (std::size_t k = 0; k < counts.size(); ++k) {
        const double f = static_cast<double>(counts[k]) / static_cast<double>(samples);
        r.fractionElliptic.push_back(f);
        if (f > 0.5) r.kappa0 = r.kappaGrid[k];
    }
    r.allPositive = r.minEntry > 0.0;
    // A minimum that keeps collapsing as the sample grows signals entries with
    // mass near zero.
    r.uniformlyEllipticHint = r.minEntry > 0.0 && r.minEntry >= 0.5 * earlyMin;
    return r;
}

}  // namespace rwre
