#ifndef RSDUAL_SAMPLING_HPP
#define RSDUAL_SAMPLING_HPP

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "rsdual/elliptic.hpp"

namespace rsdual
{

/// Seeded generator of sample points for randomized identity checks.
///
/// Points are drawn with Re in (-0.4, 0.4) and Im in (0.05, 0.45) times the
/// imaginary period (Im tau for the elliptic row, 1 otherwise). Draws that
/// come within `min_separation` of the pole set relative to previously
/// accepted points are rejected.
class Sampler
{
public:
    explicit Sampler(std::uint64_t seed) : m_engine(seed) {}

    double uniform(double lo, double hi);
    cplx point(const KernelKind &kind);

    /// A point p with pole_proximity(p - a) >= min_separation for every a in avoid.
    cplx point_avoiding(const KernelKind &kind, std::span<const cplx> avoid, double min_separation = 1e-3);

    /// n points, pairwise separated (lattice aware) by at least min_separation.
    std::vector<cplx> distinct_points(std::size_t n, const KernelKind &kind, double min_separation = 1e-3);

    /// Uniform in the fundamental cell {a + b tau : a, b in [-1/2, 1/2)}, with
    /// tau -> i pi for the hyperbolic row and i for the rational one.
    cplx cell_point(const KernelKind &kind);

    /// n cell points, separated from each other and from the origin by at
    /// least min_separation in pole proximity.
    std::vector<cplx> generic_points(std::size_t n, const KernelKind &kind, double min_separation);

    std::mt19937_64 &engine() { return m_engine; }

private:
    std::mt19937_64 m_engine;
};

} // namespace rsdual

#endif
