#include "rsdual/identities.hpp"

#include <algorithm>
#include <string>

namespace rsdual
{

namespace
{

// g(eta, u) / phi(eta, u) = E1(eta + u) - E1(u)
cplx log_phi_derivative(cplx eta, cplx u, const KernelKind &kind)
{
    return eisenstein_e1(eta + u, kind) - eisenstein_e1(u, kind);
}

void check_shape(const SelfDualState &s)
{
    if (s.q.empty() || s.mu.empty()) {
        throw Error(ErrorKind::ShapeMismatch, "self-dual state needs N >= 1 and M >= 1");
    }
    if (s.kind.is_elliptic() && s.n() != s.m()) {
        throw Error(ErrorKind::ShapeMismatch, "elliptic identity requires N = M");
    }
}

} // namespace

cplx fay_residual(cplx z, cplx w, cplx q, cplx u, const KernelKind &kind)
{
    const cplx lhs = kronecker_phi(z, q, kind) * kronecker_phi(w, u, kind);
    const cplx rhs = kronecker_phi(z - w, q, kind) * kronecker_phi(w, q + u, kind) +
                     kronecker_phi(w - z, u, kind) * kronecker_phi(z, q + u, kind);
    return lhs - rhs;
}

cplx higher_fay_residual(std::span<const cplx> xs, std::span<const cplx> ys, const KernelKind &kind)
{
    if (xs.size() != ys.size()) {
        throw Error(ErrorKind::ShapeMismatch, "higher Fay needs as many x as y arguments");
    }
    const std::size_t n = xs.size();
    if (n < 2) {
        throw Error(ErrorKind::InvalidParams, "higher Fay needs n >= 2");
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (pole_proximity(xs[j] - xs[i], kind) < kind.pole_eps()) {
                throw Error(ErrorKind::DegenerateInput,
                            "x arguments " + std::to_string(i) + " and " + std::to_string(j) + " coincide", {{i, j}});
            }
        }
    }
    cplx y_total = 0.0;
    for (const cplx y : ys) {
        y_total += y;
    }
    cplx lhs = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        lhs *= kronecker_phi(xs[i], ys[i], kind);
    }
    cplx rhs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cplx term = kronecker_phi(xs[i], y_total, kind);
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) {
                term *= kronecker_phi(xs[j] - xs[i], ys[j], kind);
            }
        }
        rhs += term;
    }
    return lhs - rhs;
}

cplx velocity_sum_residual(const SelfDualState &state)
{
    check_shape(state);
    const Velocities v = selfdual_velocity(state, FlowForm::PhiProduct);
    cplx out = 0.0;
    for (const cplx x : v.qdot) {
        out += x;
    }
    for (const cplx x : v.mudot) {
        out -= x;
    }
    return out;
}

cplx derivative_identity_residual(const SelfDualState &state, std::size_t i)
{
    check_shape(state);
    if (i >= state.n()) {
        throw Error(ErrorKind::ShapeMismatch, "particle index out of range");
    }
    const Velocities v = selfdual_velocity(state, FlowForm::PhiProduct);
    const auto &q = state.q;
    const auto &mu = state.mu;
    const cplx eta = state.eta;
    cplx out = 0.0;
    for (std::size_t k = 0; k < state.n(); ++k) {
        if (k == i) {
            continue;
        }
        out += v.qdot[i] * log_phi_derivative(eta, q[i] - q[k], state.kind);
        out -= v.qdot[k] * log_phi_derivative(eta, q[k] - q[i], state.kind);
    }
    for (std::size_t a = 0; a < state.m(); ++a) {
        out += (v.qdot[i] - v.mudot[a]) * log_phi_derivative(-eta, q[i] - mu[a], state.kind);
    }
    return out;
}

double fay_scale(cplx z, cplx w, cplx q, cplx u, const KernelKind &kind)
{
    const double a = std::abs(kronecker_phi(z, q, kind) * kronecker_phi(w, u, kind));
    const double b = std::abs(kronecker_phi(z - w, q, kind) * kronecker_phi(w, q + u, kind));
    const double c = std::abs(kronecker_phi(w - z, u, kind) * kronecker_phi(z, q + u, kind));
    return std::max({1.0, a, b, c});
}

double higher_fay_scale(std::span<const cplx> xs, std::span<const cplx> ys, const KernelKind &kind)
{
    if (xs.size() != ys.size()) {
        throw Error(ErrorKind::ShapeMismatch, "higher Fay scale: x and y lists differ in length");
    }
    cplx total = 0.0;
    for (const cplx y : ys) {
        total += y;
    }
    cplx lhs = 1.0;
    double out = 1.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        lhs *= kronecker_phi(xs[i], ys[i], kind);
        cplx t = kronecker_phi(xs[i], total, kind);
        for (std::size_t j = 0; j < xs.size(); ++j) {
            if (j != i) {
                t *= kronecker_phi(xs[j] - xs[i], ys[j], kind);
            }
        }
        out = std::max(out, std::abs(t));
    }
    return std::max(out, std::abs(lhs));
}

} // namespace rsdual
