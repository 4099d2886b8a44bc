#include "rsdual/sampling.hpp"

namespace rsdual
{

namespace
{

constexpr int max_rejections = 10000;

double imaginary_scale(const KernelKind &kind)
{
    return kind.is_elliptic() ? kind.params().tau.imag() : 1.0;
}

} // namespace

double Sampler::uniform(double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(m_engine);
}

cplx Sampler::point(const KernelKind &kind)
{
    const double scale = imaginary_scale(kind);
    const double re = uniform(-0.4, 0.4);
    const double im = uniform(0.05, 0.45) * scale;
    return {re, im};
}

cplx Sampler::cell_point(const KernelKind &kind)
{
    cplx period{0.0, 1.0};
    if (kind.is_elliptic()) {
        period = kind.params().tau;
    } else if (kind.type() == KernelType::Hyperbolic) {
        period = {0.0, pi};
    }
    return uniform(-0.5, 0.5) + uniform(-0.5, 0.5) * period;
}

std::vector<cplx> Sampler::generic_points(std::size_t n, const KernelKind &kind, double min_separation)
{
    std::vector<cplx> out;
    int attempts = 0;
    while (out.size() < n) {
        if (++attempts > max_rejections) {
            throw Error(ErrorKind::DegenerateInput, "sampler could not place generic points");
        }
        const cplx p = cell_point(kind);
        bool ok = pole_proximity(p, kind) >= min_separation;
        for (const cplx a : out) {
            ok = ok && pole_proximity(p - a, kind) >= min_separation;
        }
        if (ok) {
            out.push_back(p);
        }
    }
    return out;
}

cplx Sampler::point_avoiding(const KernelKind &kind, std::span<const cplx> avoid, double min_separation)
{
    for (int attempt = 0; attempt < max_rejections; ++attempt) {
        const cplx p = point(kind);
        bool ok = true;
        for (const cplx a : avoid) {
            if (pole_proximity(p - a, kind) < min_separation) {
                ok = false;
                break;
            }
        }
        if (ok) {
            return p;
        }
    }
    throw Error(ErrorKind::DegenerateInput, "sampler could not place a point away from the pole set");
}

std::vector<cplx> Sampler::distinct_points(std::size_t n, const KernelKind &kind, double min_separation)
{
    std::vector<cplx> out;
    out.reserve(n);
    while (out.size() < n) {
        out.push_back(point_avoiding(kind, out, min_separation));
    }
    return out;
}

} // namespace rsdual
