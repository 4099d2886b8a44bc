#ifndef RSDUAL_IDENTITIES_HPP
#define RSDUAL_IDENTITIES_HPP

#include <span>
#include <vector>

#include "rsdual/dynamics.hpp"
#include "rsdual/elliptic.hpp"

namespace rsdual
{

/// One evaluated residual together with the arguments that produced it.
struct IdentitySample {
    std::vector<cplx> points;
    KernelKind kind;
    cplx residual;
    double tolerance;

    bool passed() const { return std::abs(residual) < tolerance; }
};

/// phi(z,q) phi(w,u) - phi(z-w,q) phi(w,q+u) - phi(w-z,u) phi(z,q+u)
cplx fay_residual(cplx z, cplx w, cplx q, cplx u, const KernelKind &kind);

/// Largest single product on the right of the three-term identity, at least 1.
/// Residuals near the pole set are measured against it.
double fay_scale(cplx z, cplx w, cplx q, cplx u, const KernelKind &kind);

/// prod phi(x_i, y_i) - sum_i phi(x_i, Y) prod_{j != i} phi(x_j - x_i, y_j), Y = sum y.
cplx higher_fay_residual(std::span<const cplx> xs, std::span<const cplx> ys, const KernelKind &kind);

/// Largest product appearing in the n-term identity, at least 1.
double higher_fay_scale(std::span<const cplx> xs, std::span<const cplx> ys, const KernelKind &kind);

/// sum qdot - sum mudot with PhiProduct velocities.
cplx velocity_sum_residual(const SelfDualState &state);

/// d/dq_i of velocity_sum_residual written out with g/phi = d log phi:
///   qd_i sum_{k != i} G(eta, q_ik) - sum_{k != i} qd_k G(eta, q_ki)
///     + sum_a (qd_i - mud_a) G(-eta, q_i - mu_a),   G = g / phi.
/// i is zero based.
cplx derivative_identity_residual(const SelfDualState &state, std::size_t i);

} // namespace rsdual

#endif
