#include "rsdual/ilw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rsdual
{

namespace
{

void require_field(const PoleField &f)
{
    if (f.poles_q.size() != f.res_q.size() || f.poles_mu.size() != f.res_mu.size()) {
        throw Error(ErrorKind::ShapeMismatch, "pole field: poles and residues differ in length");
    }
}

cplx theta_prefactor(cplx eta, const KernelKind &kind)
{
    const cplx d1 = kind.is_elliptic() ? theta_d1_at_0(kind.params()) : cplx{1.0};
    return d1 / theta(eta, kind);
}

// Residues straight from the products, without touching the flow code.
void fill_residues(PoleField &f, const KernelKind &kind)
{
    const std::size_t n = f.poles_q.size(), m = f.poles_mu.size();
    const auto &q = f.poles_q;
    const auto &mu = f.poles_mu;
    const cplx eta = f.eta;
    f.res_q.assign(n, 1.0);
    f.res_mu.assign(m, 1.0);
    const bool phi = f.normalization == FlowForm::PhiProduct;
    for (std::size_t i = 0; i < n; ++i) {
        cplx &r = f.res_q[i];
        for (std::size_t k = 0; k < n; ++k) {
            if (k != i) {
                const cplx d = q[i] - q[k];
                r *= phi ? kronecker_phi(eta, d, kind) : theta_ratio(d + eta, d, kind);
            }
        }
        for (std::size_t a = 0; a < m; ++a) {
            const cplx d = q[i] - mu[a];
            r *= phi ? kronecker_phi(-eta, d, kind) : theta_ratio(d - eta, d, kind);
        }
    }
    for (std::size_t a = 0; a < m; ++a) {
        cplx &r = f.res_mu[a];
        for (std::size_t b = 0; b < m; ++b) {
            if (b != a) {
                const cplx d = mu[a] - mu[b];
                r *= phi ? kronecker_phi(-eta, d, kind) : theta_ratio(d - eta, d, kind);
            }
        }
        for (std::size_t j = 0; j < n; ++j) {
            const cplx d = mu[a] - q[j];
            r *= phi ? kronecker_phi(eta, d, kind) : theta_ratio(d + eta, d, kind);
        }
        if (!phi) {
            r = -r;
        }
    }
}

double distance_to_poles(const PoleField &f, cplx z)
{
    double d = std::numeric_limits<double>::infinity();
    for (const cplx p : f.poles_q) {
        d = std::min(d, pole_proximity(z - p, f.kind));
    }
    for (const cplx p : f.poles_mu) {
        d = std::min(d, pole_proximity(z - p, f.kind));
    }
    return d;
}

// Candidate probes on a grid over a region that contains a full period
// (elliptic, hyperbolic) or the poles plus a margin (rational).
std::vector<cplx> probe_grid(const PoleField &f)
{
    constexpr int g = 24;
    std::vector<cplx> out;
    out.reserve(g * g);
    cplx origin, e1, e2;
    if (f.kind.is_elliptic()) {
        e1 = 1.0;
        e2 = f.kind.params().tau;
        origin = -0.5 * (e1 + e2);
    } else {
        double lo_re = std::numeric_limits<double>::infinity(), hi_re = -lo_re;
        double lo_im = lo_re, hi_im = -lo_re;
        auto widen = [&](cplx p) {
            lo_re = std::min(lo_re, p.real());
            hi_re = std::max(hi_re, p.real());
            lo_im = std::min(lo_im, p.imag());
            hi_im = std::max(hi_im, p.imag());
        };
        std::for_each(f.poles_q.begin(), f.poles_q.end(), widen);
        std::for_each(f.poles_mu.begin(), f.poles_mu.end(), widen);
        lo_re -= 1.0;
        hi_re += 1.0;
        if (f.kind.type() == KernelType::Hyperbolic) {
            lo_im = -0.5 * pi;
            hi_im = 0.5 * pi;
        } else {
            lo_im -= 1.0;
            hi_im += 1.0;
        }
        origin = {lo_re, lo_im};
        e1 = hi_re - lo_re;
        e2 = cplx{0.0, hi_im - lo_im};
    }
    for (int a = 0; a < g; ++a) {
        for (int b = 0; b < g; ++b) {
            out.push_back(origin + ((a + 0.5) / g) * e1 + ((b + 0.5) / g) * e2);
        }
    }
    return out;
}

struct ProbeValue {
    cplx f0;
    double scale;
};

ProbeValue f0_at(const PoleField &f, cplx z)
{
    const cplx product = eval_f_product(f, z);
    cplx sum = 0.0;
    double scale = std::abs(product);
    for (std::size_t i = 0; i < f.poles_q.size(); ++i) {
        const cplx t = eisenstein_e1(z - f.poles_q[i], f.kind) * f.res_q[i];
        sum += t;
        scale += std::abs(t);
    }
    for (std::size_t a = 0; a < f.poles_mu.size(); ++a) {
        const cplx t = eisenstein_e1(z - f.poles_mu[a], f.kind) * f.res_mu[a];
        sum += t;
        scale += std::abs(t);
    }
    return {product - sum, std::max(1.0, scale)};
}

} // namespace

PoleField pole_field_from_state(const SelfDualState &state, FlowForm normalization)
{
    if (state.n() != state.m()) {
        throw Error(ErrorKind::ShapeMismatch, "pole field needs equal numbers of q and mu");
    }
    state.validate();
    PoleField f{state.q, state.mu, {}, {}, 0.0, state.eta, state.kind, normalization};
    fill_residues(f, state.kind);

    const std::vector<cplx> grid = probe_grid(f);
    std::vector<double> dist(grid.size());
    std::size_t best = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        dist[i] = distance_to_poles(f, grid[i]);
        if (dist[i] > dist[best]) {
            best = i;
        }
    }
    // second probe: the best point well away from the first
    double span = 0.0;
    for (const cplx z : grid) {
        span = std::max(span, std::abs(z - grid[0]));
    }
    std::size_t second = best;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (std::abs(grid[i] - grid[best]) < 0.25 * span) {
            continue;
        }
        if (second == best || dist[i] > dist[second]) {
            second = i;
        }
    }
    const ProbeValue p1 = f0_at(f, grid[best]);
    const ProbeValue p2 = f0_at(f, grid[second]);
    if (std::abs(p1.f0 - p2.f0) > 1e-10 * std::max(p1.scale, p2.scale)) {
        throw Error(ErrorKind::ProbeInconsistent, "two probe points disagree on the constant term");
    }
    f.f0 = p1.f0;
    return f;
}

cplx eval_F_plus(const PoleField &field, cplx z)
{
    require_field(field);
    cplx s = 0.0;
    for (std::size_t i = 0; i < field.poles_q.size(); ++i) {
        s += eisenstein_e1(z - field.poles_q[i], field.kind) * field.res_q[i];
    }
    return s;
}

cplx eval_F_minus(const PoleField &field, cplx z)
{
    require_field(field);
    cplx s = 0.0;
    for (std::size_t a = 0; a < field.poles_mu.size(); ++a) {
        s -= eisenstein_e1(z - field.poles_mu[a], field.kind) * field.res_mu[a];
    }
    return s;
}

namespace
{

// d^order/dz^order E1: -E2, then -E2'.
cplx e1_derivative(cplx z, int order, const KernelKind &kind)
{
    switch (order) {
        case 1: return -eisenstein_e2(z, kind);
        case 2: return -eisenstein_e2_prime(z, kind);
        default: throw Error(ErrorKind::InvalidParams, "derivative order must be 1 or 2");
    }
}

} // namespace

cplx eval_F_plus_derivative(const PoleField &field, cplx z, int order)
{
    require_field(field);
    cplx s = 0.0;
    for (std::size_t i = 0; i < field.poles_q.size(); ++i) {
        s += e1_derivative(z - field.poles_q[i], order, field.kind) * field.res_q[i];
    }
    return s;
}

cplx eval_F_minus_derivative(const PoleField &field, cplx z, int order)
{
    require_field(field);
    cplx s = 0.0;
    for (std::size_t a = 0; a < field.poles_mu.size(); ++a) {
        s -= e1_derivative(z - field.poles_mu[a], order, field.kind) * field.res_mu[a];
    }
    return s;
}

cplx eval_f(const PoleField &field, cplx z)
{
    return eval_F_plus(field, z) - eval_F_minus(field, z) + field.f0;
}

cplx eval_f_product(const PoleField &field, cplx z)
{
    const KernelKind &kind = field.kind;
    const cplx eta = field.eta;
    if (field.normalization == FlowForm::PhiProduct) {
        cplx p = 1.0;
        for (const cplx q : field.poles_q) {
            p *= kronecker_phi(eta, z - q, kind);
        }
        for (const cplx m : field.poles_mu) {
            p *= kronecker_phi(-eta, z - m, kind);
        }
        return p;
    }
    cplx p = theta_prefactor(eta, kind);
    for (const cplx q : field.poles_q) {
        p *= theta_ratio(z - q + eta, z - q, kind);
    }
    for (const cplx m : field.poles_mu) {
        p *= theta_ratio(z - m - eta, z - m, kind);
    }
    return p;
}

cplx discrete_T_of_field(const PoleField &field, cplx x)
{
    return eval_F_plus(field, x) + eval_F_minus(field, x) - eval_F_plus(field, x + field.eta) -
           eval_F_minus(field, x - field.eta);
}

cplx log_derivative_in_time(const PoleField &field, const Velocities &v, cplx z)
{
    if (v.qdot.size() != field.poles_q.size() || v.mudot.size() != field.poles_mu.size()) {
        throw Error(ErrorKind::ShapeMismatch, "velocities do not match the pole field");
    }
    const KernelKind &kind = field.kind;
    cplx s = 0.0;
    for (std::size_t i = 0; i < field.poles_q.size(); ++i) {
        const cplx w = z - field.poles_q[i];
        s -= v.qdot[i] * (eisenstein_e1(w + field.eta, kind) - eisenstein_e1(w, kind));
    }
    for (std::size_t a = 0; a < field.poles_mu.size(); ++a) {
        const cplx w = z - field.poles_mu[a];
        s -= v.mudot[a] * (eisenstein_e1(w - field.eta, kind) - eisenstein_e1(w, kind));
    }
    return s;
}

cplx ilw_residual(const PoleField &field, const Velocities &v, cplx z)
{
    return log_derivative_in_time(field, v, z) - discrete_T_of_field(field, z);
}

cplx ilw_residual(const SelfDualState &state, cplx z, FlowForm normalization)
{
    const PoleField field = pole_field_from_state(state, normalization);
    return ilw_residual(field, selfdual_velocity(state, normalization), z);
}

// --- periodic operators -----------------------------------------------------

void PeriodicSignal::validate() const
{
    if (!(L > 0.0) || !std::isfinite(L) || !(delta > 0.0) || !std::isfinite(delta)) {
        throw Error(ErrorKind::InvalidParams, "periodic signal needs L > 0 and delta > 0");
    }
    if (coeffs.contains(0)) {
        throw Error(ErrorKind::InvalidParams, "mode 0 belongs in f0, not in coeffs");
    }
}

cplx PeriodicSignal::evaluate(double x) const
{
    cplx s = f0;
    for (const auto &[n, c] : coeffs) {
        s += c * std::exp(cplx{0.0, pi * n * x / L});
    }
    return s;
}

cplx ilw_multiplier(int n, double delta, double L)
{
    if (n == 0) {
        return 0.0;
    }
    return {0.0, 1.0 / std::tanh(pi * n * delta / L)};
}

PeriodicSignal apply_T_fourier(const PeriodicSignal &sig)
{
    sig.validate();
    PeriodicSignal out{{}, sig.L, sig.delta, 0.0};
    for (const auto &[n, c] : sig.coeffs) {
        out.coeffs[n] = ilw_multiplier(n, sig.delta, sig.L) * c;
    }
    return out;
}

namespace
{

PeriodicSignal kernel_pass(const PeriodicSignal &sig, int nodes, int max_mode)
{
    const double L = sig.L;
    const KernelKind kind = KernelKind::elliptic(cplx{0.0, sig.delta / L});
    const int half = nodes / 2;
    const double h = 2.0 * L / nodes;
    // offsets u_j = y - x = (j + 1/2) h, symmetric about the singularity
    std::vector<double> offset(nodes);
    std::vector<cplx> weight(nodes);
    for (int j = -half; j < half; ++j) {
        const double u = (j + 0.5) * h;
        offset[j + half] = u;
        weight[j + half] = -eisenstein_e1(-u / (2.0 * L), kind) / pi * (h / (2.0 * L));
    }
    const int points = 4 * max_mode + 4;
    std::vector<cplx> values(points);
    std::vector<double> xs(points);
    for (int p = 0; p < points; ++p) {
        const double x = -L + 2.0 * L * p / points;
        xs[p] = x;
        cplx s = 0.0;
        // pair +u with -u so the odd part of the kernel cancels term by term
        for (int j = 0; j < half; ++j) {
            const int a = half + j, b = half - 1 - j;
            s += weight[a] * sig.evaluate(x + offset[a]) + weight[b] * sig.evaluate(x + offset[b]);
        }
        values[p] = s;
    }
    PeriodicSignal out{{}, sig.L, sig.delta, 0.0};
    auto project = [&](int n) {
        cplx s = 0.0;
        for (int p = 0; p < points; ++p) {
            s += values[p] * std::exp(cplx{0.0, -pi * n * xs[p] / L});
        }
        return s / static_cast<double>(points);
    };
    for (const auto &[n, c] : sig.coeffs) {
        out.coeffs[n] = project(n);
    }
    out.f0 = project(0);
    return out;
}

} // namespace

PeriodicSignal apply_T_kernel(const PeriodicSignal &sig, int quad_nodes)
{
    sig.validate();
    int max_mode = 0;
    for (const auto &[n, c] : sig.coeffs) {
        max_mode = std::max(max_mode, std::abs(n));
    }
    if (quad_nodes <= 0 || quad_nodes % 2 != 0 || quad_nodes < 8 * max_mode) {
        throw Error(ErrorKind::InvalidParams, "quad_nodes must be even and at least 8 times the largest mode");
    }
    if (max_mode == 0) {
        return PeriodicSignal{{}, sig.L, sig.delta, 0.0};
    }
    PeriodicSignal coarse = kernel_pass(sig, quad_nodes, max_mode);
    const PeriodicSignal fine = kernel_pass(sig, 2 * quad_nodes, max_mode);
    double change = std::abs(coarse.f0 - fine.f0);
    for (const auto &[n, c] : coarse.coeffs) {
        change = std::max(change, std::abs(c - fine.coeffs.at(n)));
    }
    if (!(change <= 1e-6)) {
        throw Error(ErrorKind::QuadratureDiverged, "node doubling moved the result by " + std::to_string(change));
    }
    return coarse;
}

double kdv_multiplier_residual(double delta, double L, int n_max)
{
    if (!(delta > 0.0) || !(L > 0.0) || n_max < 1) {
        throw Error(ErrorKind::InvalidParams, "kdv residual needs delta > 0, L > 0, n_max >= 1");
    }
    double worst = 0.0;
    for (int n = -n_max; n <= n_max; ++n) {
        if (n == 0) {
            continue;
        }
        const double z = pi * n * delta / L;
        const cplx laurent{0.0, 1.0 / z + z / 3.0};
        worst = std::max(worst, std::abs(ilw_multiplier(n, delta, L) - laurent));
    }
    return worst;
}

double hyperbolic_kernel_limit_residual(double x, double delta, double L)
{
    if (!(delta > 0.0) || !(L > 0.0) || !(std::abs(x) < L)) {
        throw Error(ErrorKind::InvalidParams, "need delta > 0 and |x| < L");
    }
    if (x == 0.0) {
        throw Error(ErrorKind::PoleHit, "kernel singular at x = 0");
    }
    const KernelKind dual = KernelKind::elliptic(cplx{0.0, L / delta});
    // (1/2L) Ttilde(x) - x/(2 delta L), after the modular transform
    const cplx kernel = -eisenstein_e1(cplx{0.0, -x / (2.0 * delta)}, dual) / (cplx{0.0, 2.0 * pi * delta});
    const double limit = -0.5 / delta / std::tanh(pi * x / (2.0 * delta));
    return std::abs(kernel - limit);
}

} // namespace rsdual
