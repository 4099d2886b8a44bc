#ifndef RSDUAL_ILW_HPP
#define RSDUAL_ILW_HPP

#include <map>
#include <vector>

#include "rsdual/dynamics.hpp"

namespace rsdual
{

/// f(z) = f0 + F+(z) - F-(z) with
///   F+(z) =  sum_k E1(z - q_k)  res_q[k]
///   F-(z) = -sum_a E1(z - mu_a) res_mu[a].
/// PhiProduct: f = prod phi(eta, z - q_k) prod phi(-eta, z - mu_a).
/// ThetaQuotient: f = theta'(0)/theta(eta) prod theta(z-q+eta)/theta(z-q) prod theta(z-mu-eta)/theta(z-mu).
struct PoleField {
    std::vector<cplx> poles_q;
    std::vector<cplx> poles_mu;
    std::vector<cplx> res_q;
    std::vector<cplx> res_mu;
    cplx f0;
    cplx eta;
    KernelKind kind;
    FlowForm normalization;
};

/// Residues from the closed products, f0 from a probe point far from all
/// poles, confirmed at a second probe (ProbeInconsistent otherwise).
/// Needs N = M; any kernel row is accepted, double periodicity holds only
/// for the elliptic one.
PoleField pole_field_from_state(const SelfDualState &state, FlowForm normalization);

/// Partial-fraction evaluation.
cplx eval_f(const PoleField &field, cplx z);
/// Direct product evaluation.
cplx eval_f_product(const PoleField &field, cplx z);
cplx eval_F_plus(const PoleField &field, cplx z);
cplx eval_F_minus(const PoleField &field, cplx z);
/// order 1 or 2
cplx eval_F_plus_derivative(const PoleField &field, cplx z, int order);
cplx eval_F_minus_derivative(const PoleField &field, cplx z, int order);

/// F+(x) + F-(x) - F+(x + eta) - F-(x - eta)
cplx discrete_T_of_field(const PoleField &field, cplx x);

/// d/dt log f at fixed z for the given pole velocities:
///   -sum_i qd_i (E1(z-q_i+eta) - E1(z-q_i)) + mud_i (E1(z-mu_i-eta) - E1(z-mu_i)).
cplx log_derivative_in_time(const PoleField &field, const Velocities &v, cplx z);

/// log_derivative_in_time(field, v, z) - discrete_T_of_field(field, z).
cplx ilw_residual(const PoleField &field, const Velocities &v, cplx z);
/// Same with the field and the velocities built from the state.
cplx ilw_residual(const SelfDualState &state, cplx z, FlowForm normalization);

/// f(x) = f0 + sum_{n != 0} coeffs[n] exp(i pi n x / L), depth delta.
struct PeriodicSignal {
    std::map<int, cplx> coeffs;
    double L = 0.5;
    double delta = 1.0;
    cplx f0 = 0.0;

    cplx evaluate(double x) const;
    void validate() const;
};

/// i coth(pi n delta / L)
cplx ilw_multiplier(int n, double delta, double L);

/// Multiplies mode n by ilw_multiplier; the zero mode of the output is 0.
PeriodicSignal apply_T_fourier(const PeriodicSignal &sig);

/// (1/2L) PV int_{-L}^{L} Ttilde(x - y) f(y) dy with
/// Ttilde(x) = -(1/pi) E1(x / 2L | i delta / L), by midpoint nodes placed
/// symmetrically about y = x, projected back onto the input modes.
/// quad_nodes must be even and >= 8 * max |n|. The node count is doubled
/// once as a check (QuadratureDiverged above 1e-6).
PeriodicSignal apply_T_kernel(const PeriodicSignal &sig, int quad_nodes);

/// max_{1 <= |n| <= n_max} |i coth(z) - i (1/z + z/3)|, z = pi n delta / L.
double kdv_multiplier_residual(double delta, double L, int n_max);

/// |(1/2L) Ttilde(x) - x/(2 delta L) + (1/2 delta) coth(pi x / 2 delta)|, with the
/// first two terms taken through the modular transform
/// -(1/(2 pi i delta)) E1(x / (2 i delta) | i L / delta).
double hyperbolic_kernel_limit_residual(double x, double delta, double L);

} // namespace rsdual

#endif
