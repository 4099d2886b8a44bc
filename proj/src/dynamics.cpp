#include "rsdual/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rsdual
{

namespace
{

// Running product kept as mantissa * exp(log_scale) so long theta-quotient
// products neither overflow nor underflow.
struct ScaledProduct {
    cplx mantissa = 1.0;
    cplx log_scale = 0.0;

    void multiply(const ScaledValue &v)
    {
        mantissa *= v.mantissa;
        log_scale += v.log_scale;
    }
    void divide(const ScaledValue &v)
    {
        mantissa /= v.mantissa;
        log_scale -= v.log_scale;
    }
    cplx value() const { return mantissa * std::exp(log_scale); }
};

void check_pair(cplx diff, const KernelKind &kind, PairIndex pair)
{
    if (pole_proximity(diff, kind) < kind.pole_eps()) {
        throw Error(ErrorKind::PoleHit, "coordinate pair (" + std::to_string(pair.first) + ", " +
                                            std::to_string(pair.second) + ") sits on the pole set",
                    pair);
    }
}

ScaledValue checked_theta(cplx diff, const KernelKind &kind, PairIndex pair)
{
    const ScaledValue v = theta_scaled(diff, kind);
    if (kind.vanishes(v.mantissa)) {
        throw Error(ErrorKind::PoleHit, "coordinate pair (" + std::to_string(pair.first) + ", " +
                                            std::to_string(pair.second) + ") sits on the pole set",
                    pair);
    }
    return v;
}

Velocities theta_quotient_velocity(const SelfDualState &s)
{
    const std::size_t n = s.n(), m = s.m();
    Velocities v{std::vector<cplx>(n), std::vector<cplx>(m)};
    for (std::size_t i = 0; i < n; ++i) {
        ScaledProduct p;
        for (std::size_t k = 0; k < n; ++k) {
            if (k == i) {
                continue;
            }
            const cplx d = s.q[i] - s.q[k];
            p.divide(checked_theta(d, s.kind, {i, k}));
            p.multiply(theta_scaled(d + s.eta, s.kind));
        }
        for (std::size_t g = 0; g < m; ++g) {
            const cplx d = s.q[i] - s.mu[g];
            p.divide(checked_theta(d, s.kind, {i, n + g}));
            p.multiply(theta_scaled(d - s.eta, s.kind));
        }
        v.qdot[i] = p.value();
    }
    for (std::size_t a = 0; a < m; ++a) {
        ScaledProduct p;
        for (std::size_t g = 0; g < m; ++g) {
            if (g == a) {
                continue;
            }
            const cplx d = s.mu[a] - s.mu[g];
            p.divide(checked_theta(d, s.kind, {n + a, n + g}));
            p.multiply(theta_scaled(d - s.eta, s.kind));
        }
        for (std::size_t k = 0; k < n; ++k) {
            const cplx d = s.mu[a] - s.q[k];
            p.divide(checked_theta(d, s.kind, {n + a, k}));
            p.multiply(theta_scaled(d + s.eta, s.kind));
        }
        v.mudot[a] = p.value();
    }
    return v;
}

Velocities phi_product_velocity(const SelfDualState &s)
{
    const std::size_t n = s.n(), m = s.m();
    Velocities v{std::vector<cplx>(n), std::vector<cplx>(m)};
    for (std::size_t i = 0; i < n; ++i) {
        cplx p = 1.0;
        for (std::size_t k = 0; k < n; ++k) {
            if (k != i) {
                check_pair(s.q[i] - s.q[k], s.kind, {i, k});
                p *= kronecker_phi(s.eta, s.q[i] - s.q[k], s.kind);
            }
        }
        for (std::size_t g = 0; g < m; ++g) {
            check_pair(s.q[i] - s.mu[g], s.kind, {i, n + g});
            p *= kronecker_phi(-s.eta, s.q[i] - s.mu[g], s.kind);
        }
        v.qdot[i] = p;
    }
    for (std::size_t a = 0; a < m; ++a) {
        cplx p = 1.0;
        for (std::size_t b = 0; b < m; ++b) {
            if (b != a) {
                check_pair(s.mu[a] - s.mu[b], s.kind, {n + a, n + b});
                p *= kronecker_phi(-s.eta, s.mu[a] - s.mu[b], s.kind);
            }
        }
        for (std::size_t j = 0; j < n; ++j) {
            check_pair(s.mu[a] - s.q[j], s.kind, {n + a, j});
            p *= kronecker_phi(s.eta, s.mu[a] - s.q[j], s.kind);
        }
        v.mudot[a] = -p;
    }
    return v;
}

} // namespace

void SelfDualState::validate(double min_proximity) const
{
    if (q.empty() || mu.empty()) {
        throw Error(ErrorKind::ShapeMismatch, "self-dual state needs N >= 1 and M >= 1");
    }
    if (kind.is_elliptic() && q.size() != mu.size()) {
        throw Error(ErrorKind::ShapeMismatch, "elliptic self-dual state requires N = M");
    }
    auto finite = [](cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); };
    if (!finite(eta) || !std::all_of(q.begin(), q.end(), finite) || !std::all_of(mu.begin(), mu.end(), finite)) {
        throw Error(ErrorKind::InvalidParams, "self-dual state has non-finite entries");
    }
    const PairProximity p = min_pair_proximity(*this);
    if (p.value < min_proximity) {
        throw Error(ErrorKind::PoleHit, "colliding coordinates in self-dual state", p.pair);
    }
}

SelfDualState SelfDualState::swapped() const
{
    return SelfDualState{mu, q, -eta, kind};
}

const char *to_string(FlowForm form)
{
    return form == FlowForm::ThetaQuotient ? "theta_quotient" : "phi_product";
}

cplx rescale_constant(std::size_t n, std::size_t m, cplx eta, const KernelKind &kind)
{
    const ScaledValue plus = theta_scaled(eta, kind);
    if (kind.vanishes(plus.mantissa)) {
        throw Error(ErrorKind::PoleHit, "theta(eta) vanishes");
    }
    const ScaledValue minus = theta_scaled(-eta, kind);
    const cplx d1 = kind.is_elliptic() ? theta_d1_at_0(kind.params()) : cplx{1.0};
    const double nm1 = static_cast<double>(n) - 1.0;
    const double md = static_cast<double>(m);
    // integer powers keep the branch unambiguous
    cplx out = std::pow(d1, static_cast<int>(n + m - 1));
    out /= std::pow(plus.mantissa, static_cast<int>(n - 1)) * std::pow(minus.mantissa, static_cast<int>(m));
    out *= std::exp(-nm1 * plus.log_scale - md * minus.log_scale);
    return out;
}

cplx rescale_constant(std::size_t n, cplx eta, const EllipticParams &params)
{
    return rescale_constant(n, n, eta, KernelKind::elliptic(params));
}

Velocities selfdual_velocity(const SelfDualState &state, FlowForm form)
{
    if (state.q.empty() || state.mu.empty()) {
        throw Error(ErrorKind::ShapeMismatch, "self-dual state needs N >= 1 and M >= 1");
    }
    if (state.kind.is_elliptic() && state.n() != state.m()) {
        throw Error(ErrorKind::ShapeMismatch, "elliptic self-dual state requires N = M");
    }
    return form == FlowForm::ThetaQuotient ? theta_quotient_velocity(state) : phi_product_velocity(state);
}

std::vector<cplx> rs_acceleration_gphi(std::span<const cplx> q, std::span<const cplx> qdot, cplx eta,
                                       const KernelKind &kind)
{
    if (q.size() != qdot.size()) {
        throw Error(ErrorKind::ShapeMismatch, "positions and velocities differ in length");
    }
    const std::size_t n = q.size();
    std::vector<cplx> acc(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        cplx sum = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            if (k == i) {
                continue;
            }
            const cplx qki = q[k] - q[i];
            check_pair(qki, kind, {i, k});
            const cplx forward = g_func(eta, qki, kind) / kronecker_phi(eta, qki, kind);
            const cplx backward = g_func(eta, -qki, kind) / kronecker_phi(eta, -qki, kind);
            sum += qdot[k] * (forward - backward);
        }
        acc[i] = qdot[i] * sum;
    }
    return acc;
}

std::vector<cplx> rs_acceleration(std::span<const cplx> q, std::span<const cplx> qdot, cplx eta, const KernelKind &kind)
{
    if (q.size() != qdot.size()) {
        throw Error(ErrorKind::ShapeMismatch, "positions and velocities differ in length");
    }
    const std::size_t n = q.size();
    std::vector<cplx> acc(n, 0.0);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            if (k == i) {
                continue;
            }
            const cplx qik = q[i] - q[k];
            check_pair(qik, kind, {i, k});
            const cplx e0 = eisenstein_e1(qik, kind);
            const cplx ep = eisenstein_e1(qik + eta, kind);
            const cplx em = eisenstein_e1(qik - eta, kind);
            const cplx w = qdot[i] * qdot[k];
            acc[i] += w * (2.0 * e0 - ep - em);
            scale += std::abs(w) * (2.0 * std::abs(e0) + std::abs(ep) + std::abs(em));
        }
    }
    if (n > 1) {
        const std::vector<cplx> check = rs_acceleration_gphi(q, qdot, eta, kind);
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(check[i] - acc[i]) > 1e-11 * (scale + 1e-300)) {
                throw std::logic_error("rs_acceleration: E1 and g/phi forms disagree");
            }
        }
    }
    return acc;
}

Velocities cm_selfdual_velocity(const SelfDualState &s, cplx nu)
{
    const std::size_t n = s.n(), m = s.m();
    Velocities v{std::vector<cplx>(n, 0.0), std::vector<cplx>(m, 0.0)};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            if (k != i) {
                check_pair(s.q[i] - s.q[k], s.kind, {i, k});
                v.qdot[i] += nu * eisenstein_e1(s.q[i] - s.q[k], s.kind);
            }
        }
        for (std::size_t g = 0; g < m; ++g) {
            check_pair(s.q[i] - s.mu[g], s.kind, {i, n + g});
            v.qdot[i] -= nu * eisenstein_e1(s.q[i] - s.mu[g], s.kind);
        }
    }
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t g = 0; g < m; ++g) {
            if (g != a) {
                check_pair(s.mu[a] - s.mu[g], s.kind, {n + a, n + g});
                v.mudot[a] -= nu * eisenstein_e1(s.mu[a] - s.mu[g], s.kind);
            }
        }
        for (std::size_t k = 0; k < n; ++k) {
            check_pair(s.mu[a] - s.q[k], s.kind, {n + a, k});
            v.mudot[a] += nu * eisenstein_e1(s.mu[a] - s.q[k], s.kind);
        }
    }
    return v;
}

std::vector<cplx> cm_acceleration(std::span<const cplx> q, cplx nu, const KernelKind &kind)
{
    const std::size_t n = q.size();
    std::vector<cplx> acc(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            if (k != i) {
                check_pair(q[i] - q[k], kind, {i, k});
                acc[i] += nu * nu * eisenstein_e2_prime(q[i] - q[k], kind);
            }
        }
    }
    return acc;
}

PairProximity min_pair_proximity(const SelfDualState &s)
{
    const std::size_t n = s.n(), m = s.m();
    PairProximity best{std::numeric_limits<double>::infinity(), {0, 0}};
    auto visit = [&](cplx d, PairIndex pair) {
        const double p = pole_proximity(d, s.kind);
        if (p < best.value) {
            best = {p, pair};
        }
    };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = i + 1; k < n; ++k) {
            visit(s.q[i] - s.q[k], {i, k});
        }
        for (std::size_t g = 0; g < m; ++g) {
            visit(s.q[i] - s.mu[g], {i, n + g});
        }
    }
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
            visit(s.mu[a] - s.mu[b], {n + a, n + b});
        }
    }
    return best;
}

double nonrelativistic_limit_residual(const SelfDualState &state, cplx nu, double c)
{
    if (!(c >= 10.0)) {
        throw Error(ErrorKind::InvalidParams, "non-relativistic limit needs c >= 10");
    }
    SelfDualState relativistic = state;
    relativistic.eta = nu / c;
    const Velocities rs = selfdual_velocity(relativistic, FlowForm::ThetaQuotient);
    const Velocities cm = cm_selfdual_velocity(state, nu);
    double worst = 0.0;
    for (std::size_t i = 0; i < rs.qdot.size(); ++i) {
        worst = std::max(worst, std::abs(c * rs.qdot[i] - c - cm.qdot[i]));
    }
    for (std::size_t a = 0; a < rs.mudot.size(); ++a) {
        worst = std::max(worst, std::abs(c * rs.mudot[a] - c - cm.mudot[a]));
    }
    return worst;
}

double dimensional_reduction_residual(const SelfDualState &reduced, cplx far_mu)
{
    if (reduced.kind.is_elliptic()) {
        throw Error(ErrorKind::UnsupportedKind, "dimensional reduction applies to rational and hyperbolic kernels");
    }
    SelfDualState full = reduced;
    full.mu.push_back(far_mu);
    const Velocities small = selfdual_velocity(reduced, FlowForm::ThetaQuotient);
    const Velocities big = selfdual_velocity(full, FlowForm::ThetaQuotient);
    // Hyperbolic quotients tend to exp(+-eta) rather than 1; a common factor
    // is a constant time rescaling.
    cplx factor = 1.0;
    if (reduced.kind.type() == KernelType::Hyperbolic) {
        factor = std::exp(far_mu.real() >= 0.0 ? reduced.eta : -reduced.eta);
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < small.qdot.size(); ++i) {
        worst = std::max(worst, std::abs(big.qdot[i] / factor - small.qdot[i]));
    }
    for (std::size_t a = 0; a < small.mudot.size(); ++a) {
        worst = std::max(worst, std::abs(big.mudot[a] / factor - small.mudot[a]));
    }
    return worst;
}

} // namespace rsdual
