#include "rsdual/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rsdual
{

namespace
{

constexpr cplx I{0.0, 1.0};

// Below this |Re z| the hyperbolic row is evaluated directly; above it the
// exponentially large factor is split off.
constexpr double hyperbolic_split = 20.0;

std::string fmt(cplx z)
{
    std::ostringstream os;
    os.precision(6);
    os << "(" << z.real() << ", " << z.imag() << ")";
    return os.str();
}

[[noreturn]] void throw_pole(const char *where, cplx z)
{
    throw Error(ErrorKind::PoleHit, std::string(where) + " at z = " + fmt(z));
}

// Symmetric summation of the theta series and its first three derivatives.
// Terms k and -k-1 combine to -2 (-1)^k q^{(k+1/2)^2} sin(2 pi (k+1/2) z), which
// keeps full relative accuracy near the zero at z = 0.
std::array<cplx, 4> theta_series(cplx z0, const EllipticParams &p)
{
    std::array<cplx, 4> sum{};
    const cplx quad = I * pi * p.tau;
    for (int k = 0; k < p.max_terms; ++k) {
        const double j = k + 0.5;
        const double w = 2.0 * pi * j;
        const cplx x = w * z0;
        const cplx amp = (k % 2 == 0 ? -2.0 : 2.0) * std::exp(quad * (j * j));
        const cplx sn = std::sin(x), cs = std::cos(x);
        const std::array<cplx, 4> wave{sn, w * cs, -(w * w) * sn, -(w * w * w) * cs};
        bool done = true;
        for (std::size_t m = 0; m < 4; ++m) {
            const cplx t = amp * wave[m];
            sum[m] += t;
            if (std::abs(t) >= p.trunc_eps * (std::abs(sum[m]) + 1.0)) {
                done = false;
            }
        }
        if (done) {
            return sum;
        }
    }
    throw Error(ErrorKind::NonConvergent, "theta series did not reach the tail bound within max_terms");
}

cplx coth(cplx z)
{
    if (std::abs(z.real()) < hyperbolic_split) {
        return std::cosh(z) / std::sinh(z);
    }
    const double s = z.real() > 0.0 ? 1.0 : -1.0;
    const cplx e = std::exp(-2.0 * s * z);
    return s * (1.0 + e) / (1.0 - e);
}

cplx inv_sinh_sq(cplx z)
{
    if (std::abs(z.real()) < hyperbolic_split) {
        const cplx s = std::sinh(z);
        return 1.0 / (s * s);
    }
    const double s = z.real() > 0.0 ? 1.0 : -1.0;
    const cplx e = std::exp(-2.0 * s * z);
    return 4.0 * e / ((1.0 - e) * (1.0 - e));
}

} // namespace

EllipticParams EllipticParams::from_tau(cplx tau, double trunc_eps, int max_terms)
{
    EllipticParams p;
    p.tau = tau;
    p.nome = std::exp(I * pi * tau);
    p.trunc_eps = trunc_eps;
    p.max_terms = max_terms;
    p.validate();
    return p;
}

void EllipticParams::validate() const
{
    if (!(tau.imag() > 0.0) || !std::isfinite(tau.real()) || !std::isfinite(tau.imag())) {
        throw Error(ErrorKind::InvalidParams, "Im(tau) must be positive, got tau = " + fmt(tau));
    }
    if (!(trunc_eps > 0.0)) {
        throw Error(ErrorKind::InvalidParams, "trunc_eps must be positive");
    }
    if (max_terms < 8) {
        throw Error(ErrorKind::InvalidParams, "max_terms must be at least 8");
    }
}

KernelKind KernelKind::elliptic(const EllipticParams &params)
{
    params.validate();
    return KernelKind(KernelType::Elliptic, params, std::abs(theta_d1_at_0(params)));
}

KernelKind KernelKind::hyperbolic()
{
    return KernelKind(KernelType::Hyperbolic, EllipticParams{});
}

KernelKind KernelKind::rational()
{
    return KernelKind(KernelType::Rational, EllipticParams{});
}

const EllipticParams &KernelKind::params() const
{
    if (m_type != KernelType::Elliptic) {
        throw Error(ErrorKind::UnsupportedKind, "elliptic parameters requested from a degenerate kernel");
    }
    return m_params;
}

KernelKind KernelKind::with_pole_eps(double eps) const
{
    KernelKind out = *this;
    out.m_pole_eps = eps;
    return out;
}

const char *to_string(KernelType type)
{
    switch (type) {
        case KernelType::Elliptic: return "elliptic";
        case KernelType::Hyperbolic: return "hyperbolic";
        case KernelType::Rational: return "rational";
    }
    return "unknown";
}

ThetaJet theta_jet(cplx z, const EllipticParams &params)
{
    params.validate();
    const double n_real = std::round(z.imag() / params.tau.imag());
    const cplx w = z - n_real * params.tau;
    const double m_real = std::round(w.real());
    const cplx z0 = w - m_real;

    ThetaJet jet;
    jet.z0 = z0;
    jet.n_tau = static_cast<long long>(n_real);
    // theta(z0 + m + n tau) = (-1)^(m+n) exp(-i pi n^2 tau - 2 i pi n z0) theta(z0)
    jet.log_factor = I * pi * (m_real + n_real) - I * pi * (n_real * n_real) * params.tau - 2.0 * pi * I * n_real * z0;
    jet.d = theta_series(z0, params);
    return jet;
}

cplx theta(cplx z, const EllipticParams &params)
{
    const ThetaJet jet = theta_jet(z, params);
    return jet.d[0] * std::exp(jet.log_factor);
}

cplx theta_d1_at_0(const EllipticParams &params)
{
    params.validate();
    return theta_series(0.0, params)[1];
}

cplx theta_d3_at_0(const EllipticParams &params)
{
    params.validate();
    return theta_series(0.0, params)[3];
}

ScaledValue theta_scaled(cplx z, const KernelKind &kind)
{
    switch (kind.type()) {
        case KernelType::Elliptic: {
            const ThetaJet jet = theta_jet(z, kind.params());
            return {jet.d[0], jet.log_factor};
        }
        case KernelType::Hyperbolic: {
            if (std::abs(z.real()) < hyperbolic_split) {
                return {std::sinh(z), 0.0};
            }
            // sinh z = e^{s z} s (1 - e^{-2 s z}) / 2 with s = sign Re z
            const double s = z.real() > 0.0 ? 1.0 : -1.0;
            return {s * 0.5 * (1.0 - std::exp(-2.0 * s * z)), s * z};
        }
        case KernelType::Rational: return {z, 0.0};
    }
    return {z, 0.0};
}

cplx theta(cplx z, const KernelKind &kind)
{
    return theta_scaled(z, kind).value();
}

double pole_proximity(cplx z, const KernelKind &kind)
{
    return std::abs(theta_scaled(z, kind).mantissa) / kind.theta_scale();
}

cplx theta_ratio(cplx a, cplx b, const KernelKind &kind)
{
    const ScaledValue den = theta_scaled(b, kind);
    if (kind.vanishes(den.mantissa)) {
        throw_pole("theta ratio denominator", b);
    }
    const ScaledValue num = theta_scaled(a, kind);
    return num.mantissa / den.mantissa * std::exp(num.log_scale - den.log_scale);
}

cplx kronecker_phi(cplx eta, cplx z, const KernelKind &kind)
{
    switch (kind.type()) {
        case KernelType::Elliptic: {
            const EllipticParams &p = kind.params();
            const ThetaJet te = theta_jet(eta, p);
            const ThetaJet tz = theta_jet(z, p);
            if (kind.vanishes(te.d[0])) {
                throw_pole("kronecker_phi: theta(eta)", eta);
            }
            if (kind.vanishes(tz.d[0])) {
                throw_pole("kronecker_phi: theta(z)", z);
            }
            const ThetaJet ts = theta_jet(eta + z, p);
            const cplx d1 = theta_d1_at_0(p);
            return d1 * ts.d[0] / (te.d[0] * tz.d[0]) * std::exp(ts.log_factor - te.log_factor - tz.log_factor);
        }
        case KernelType::Hyperbolic:
            if (std::abs(std::sinh(eta)) < kind.pole_eps()) {
                throw_pole("kronecker_phi: sinh(eta)", eta);
            }
            if (pole_proximity(z, kind) < kind.pole_eps()) {
                throw_pole("kronecker_phi: sinh(z)", z);
            }
            return coth(z) + coth(eta);
        case KernelType::Rational:
            if (std::abs(eta) < kind.pole_eps()) {
                throw_pole("kronecker_phi: eta", eta);
            }
            if (std::abs(z) < kind.pole_eps()) {
                throw_pole("kronecker_phi: z", z);
            }
            return 1.0 / z + 1.0 / eta;
    }
    return 0.0;
}

cplx eisenstein_e1(cplx z, const KernelKind &kind)
{
    switch (kind.type()) {
        case KernelType::Elliptic: {
            const ThetaJet jet = theta_jet(z, kind.params());
            if (kind.vanishes(jet.d[0])) {
                throw_pole("E1", z);
            }
            // logarithmic derivative of the cocycle contributes -2 pi i n
            return jet.d[1] / jet.d[0] - 2.0 * pi * I * static_cast<double>(jet.n_tau);
        }
        case KernelType::Hyperbolic:
            if (pole_proximity(z, kind) < kind.pole_eps()) {
                throw_pole("E1", z);
            }
            return coth(z);
        case KernelType::Rational:
            if (std::abs(z) < kind.pole_eps()) {
                throw_pole("E1", z);
            }
            return 1.0 / z;
    }
    return 0.0;
}

cplx eisenstein_e2(cplx z, const KernelKind &kind)
{
    switch (kind.type()) {
        case KernelType::Elliptic: {
            const ThetaJet jet = theta_jet(z, kind.params());
            if (kind.vanishes(jet.d[0])) {
                throw_pole("E2", z);
            }
            const cplx a1 = jet.d[1] / jet.d[0];
            const cplx a2 = jet.d[2] / jet.d[0];
            return a1 * a1 - a2;
        }
        case KernelType::Hyperbolic:
            if (pole_proximity(z, kind) < kind.pole_eps()) {
                throw_pole("E2", z);
            }
            return inv_sinh_sq(z);
        case KernelType::Rational:
            if (std::abs(z) < kind.pole_eps()) {
                throw_pole("E2", z);
            }
            return 1.0 / (z * z);
    }
    return 0.0;
}

cplx eisenstein_e2_prime(cplx z, const KernelKind &kind)
{
    switch (kind.type()) {
        case KernelType::Elliptic: {
            const ThetaJet jet = theta_jet(z, kind.params());
            if (kind.vanishes(jet.d[0])) {
                throw_pole("E2'", z);
            }
            const cplx a1 = jet.d[1] / jet.d[0];
            const cplx a2 = jet.d[2] / jet.d[0];
            const cplx a3 = jet.d[3] / jet.d[0];
            return -a3 + 3.0 * a1 * a2 - 2.0 * a1 * a1 * a1;
        }
        case KernelType::Hyperbolic:
            if (pole_proximity(z, kind) < kind.pole_eps()) {
                throw_pole("E2'", z);
            }
            return -2.0 * coth(z) * inv_sinh_sq(z);
        case KernelType::Rational:
            if (std::abs(z) < kind.pole_eps()) {
                throw_pole("E2'", z);
            }
            return -2.0 / (z * z * z);
    }
    return 0.0;
}

cplx g_func(cplx z, cplx u, const KernelKind &kind)
{
    return kronecker_phi(z, u, kind) * (eisenstein_e1(z + u, kind) - eisenstein_e1(u, kind));
}

cplx e1_modular_residual(cplx z, const EllipticParams &params)
{
    params.validate();
    const KernelKind kind = KernelKind::elliptic(params);
    const EllipticParams dual = EllipticParams::from_tau(-1.0 / params.tau, params.trunc_eps, params.max_terms);
    const KernelKind dual_kind = KernelKind::elliptic(dual);
    const cplx lhs = eisenstein_e1(z, kind);
    const cplx rhs = eisenstein_e1(z / params.tau, dual_kind) / params.tau - 2.0 * pi * I * z / params.tau;
    return lhs - rhs;
}

} // namespace rsdual
