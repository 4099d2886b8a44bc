#ifndef RSDUAL_ELLIPTIC_HPP
#define RSDUAL_ELLIPTIC_HPP

#include <array>
#include <complex>

#include "rsdual/error.hpp"

namespace rsdual
{

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846264338327950288;
inline constexpr double default_pole_eps = 1e-12;

/// Modular data of the elliptic curve C / (Z + tau Z) and the truncation
/// policy shared by every theta series.
struct EllipticParams {
    cplx tau;
    cplx nome;                // exp(i pi tau)
    double trunc_eps = 1e-16; // relative/absolute tail guard for series truncation
    int max_terms = 400;      // cap on symmetric term pairs

    /// Builds validated parameters; throws InvalidParams if Im(tau) <= 0.
    static EllipticParams from_tau(cplx tau, double trunc_eps = 1e-16, int max_terms = 400);

    void validate() const;
};

enum class KernelType { Elliptic, Hyperbolic, Rational };

/// Selects the function row of the degeneration table:
/// theta -> sinh(z) -> z, E1 -> coth(z) -> 1/z and so on.
class KernelKind
{
public:
    static KernelKind elliptic(const EllipticParams &params);
    static KernelKind elliptic(cplx tau) { return elliptic(EllipticParams::from_tau(tau)); }
    static KernelKind hyperbolic();
    static KernelKind rational();

    KernelType type() const noexcept { return m_type; }
    bool is_elliptic() const noexcept { return m_type == KernelType::Elliptic; }

    /// Throws UnsupportedKind unless elliptic.
    const EllipticParams &params() const;

    double pole_eps() const noexcept { return m_pole_eps; }
    KernelKind with_pole_eps(double eps) const;

    /// |theta'(0)|, 1 off the elliptic row. Theta values shrink like
    /// exp(-pi Im(tau) / 4), so pole tests compare theta / theta'(0).
    double theta_scale() const noexcept { return m_theta_scale; }
    /// True when a theta mantissa counts as a zero.
    bool vanishes(cplx mantissa) const noexcept { return std::abs(mantissa) < m_pole_eps * m_theta_scale; }

private:
    KernelKind(KernelType type, EllipticParams params, double theta_scale = 1.0)
        : m_type(type), m_params(params), m_theta_scale(theta_scale)
    {
    }

    KernelType m_type;
    EllipticParams m_params;
    double m_pole_eps = default_pole_eps;
    double m_theta_scale = 1.0;
};

const char *to_string(KernelType type);

/// A value written as mantissa * exp(log_scale). For the elliptic row the
/// mantissa is theta at the lattice-reduced argument and log_scale carries the
/// quasi-periodicity cocycle, so |mantissa| is a lattice-aware size measure.
struct ScaledValue {
    cplx mantissa;
    cplx log_scale;

    cplx value() const { return mantissa * std::exp(log_scale); }
};

// --- Odd theta function -------------------------------------------------

cplx theta(cplx z, const EllipticParams &params);
cplx theta_d1_at_0(const EllipticParams &params);
cplx theta_d3_at_0(const EllipticParams &params);

/// theta(z) and its first three derivatives at the lattice-reduced argument
/// z0 = z - m - n tau (|Re z0| <= 1/2, |Im z0| <= Im(tau)/2).
struct ThetaJet {
    std::array<cplx, 4> d; // theta^(k)(z0), k = 0..3
    cplx z0;
    cplx log_factor;       // theta(z) = exp(log_factor) * theta(z0)
    long long n_tau;       // number of tau-periods removed
};

ThetaJet theta_jet(cplx z, const EllipticParams &params);

// --- Functions dispatched on the kernel row -------------------------------

/// theta(z), sinh(z) or z.
cplx theta(cplx z, const KernelKind &kind);
ScaledValue theta_scaled(cplx z, const KernelKind &kind);

/// Lattice-aware proximity of z to the zero set of the theta analogue,
/// |theta(z0) / theta'(0)| on the elliptic row.
double pole_proximity(cplx z, const KernelKind &kind);

/// theta(a) / theta(b); PoleHit when theta(b) vanishes.
cplx theta_ratio(cplx a, cplx b, const KernelKind &kind);

/// phi(eta, z) = theta'(0) theta(eta + z) / (theta(eta) theta(z)).
cplx kronecker_phi(cplx eta, cplx z, const KernelKind &kind);

cplx eisenstein_e1(cplx z, const KernelKind &kind);
cplx eisenstein_e2(cplx z, const KernelKind &kind);
/// d/dz E2, the force kernel of the Calogero-Moser model.
cplx eisenstein_e2_prime(cplx z, const KernelKind &kind);

/// g(z, u) = d/du phi(z, u) = phi(z, u) (E1(z + u) - E1(u)).
cplx g_func(cplx z, cplx u, const KernelKind &kind);

/// E1(z|tau) - [E1(z/tau | -1/tau) / tau - 2 pi i z / tau].
cplx e1_modular_residual(cplx z, const EllipticParams &params);

} // namespace rsdual

#endif
