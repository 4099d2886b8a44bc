#include "rsdual/lax.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rsdual
{

namespace
{

constexpr std::size_t max_char_poly_size = 16;

// theta-row quotient th(a) / th(b) with the pair reported on a pole
cplx quotient(cplx a, cplx b, const KernelKind &kind, PairIndex pair)
{
    if (pole_proximity(b, kind) < kind.pole_eps()) {
        throw Error(ErrorKind::PoleHit,
                    "Lax entry pair (" + std::to_string(pair.first) + ", " + std::to_string(pair.second) +
                        ") sits on the pole set",
                    pair);
    }
    return theta_ratio(a, b, kind);
}

// g eta / (x + eta) or g sinh eta / sinh(x + eta)
cplx prefactor(cplx x, cplx eta, cplx g, const KernelKind &kind, PairIndex pair)
{
    return g * quotient(eta, x + eta, kind, pair);
}

double max_abs(const std::vector<cplx> &v)
{
    double out = 0.0;
    for (const cplx z : v) {
        out = std::max(out, std::abs(z));
    }
    return out;
}

std::vector<cplx> poly_mul(const std::vector<cplx> &a, const std::vector<cplx> &b)
{
    std::vector<cplx> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            out[i + j] += a[i] * b[j];
        }
    }
    return out;
}

// Sampling radius for the characteristic polynomial. The coefficient of
// lambda^j comes back with absolute error ~ eps * max|p(node)| / radius^j, so
// the radius should sit near the spectral radius. ||A^16||^(1/16) bounds it
// from above and is much tighter than the row-sum bound for n >= 6.
double node_radius(const CMatrix &a)
{
    const double row_sum = a.cwiseAbs().rowwise().sum().maxCoeff();
    if (!(row_sum > 0.0)) {
        return 1.0;
    }
    CMatrix p = a / row_sum;
    for (int k = 0; k < 4; ++k) {
        p = p * p;
    }
    const double gelfand = row_sum * std::pow(p.norm(), 1.0 / 16.0);
    return std::min(2.0 * row_sum, std::max(gelfand, 1e-3 * row_sum));
}

} // namespace

const char *to_string(LaxKind kind)
{
    return kind == LaxKind::Rational ? "rational" : "trigonometric";
}

LaxPair build_lax(const SelfDualState &state, cplx g)
{
    if (state.kind.is_elliptic()) {
        throw Error(ErrorKind::UnsupportedKind, "Lax matrices are available for rational and hyperbolic kernels only");
    }
    if (state.q.empty() || state.mu.empty()) {
        throw Error(ErrorKind::ShapeMismatch, "self-dual state needs N >= 1 and M >= 1");
    }
    const std::size_t n = state.n(), m = state.m();
    const auto &q = state.q;
    const auto &mu = state.mu;
    const cplx eta = state.eta;
    const KernelKind &kind = state.kind;

    std::vector<cplx> col(n, 1.0), col_dual(m, 1.0);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
            if (k != j) {
                col[j] *= quotient(q[j] - q[k] + eta, q[j] - q[k], kind, {j, k});
            }
        }
        for (std::size_t g2 = 0; g2 < m; ++g2) {
            col[j] *= quotient(q[j] - mu[g2] - eta, q[j] - mu[g2], kind, {j, n + g2});
        }
    }
    for (std::size_t b = 0; b < m; ++b) {
        for (std::size_t c = 0; c < m; ++c) {
            if (c != b) {
                col_dual[b] *= quotient(mu[b] - mu[c] - eta, mu[b] - mu[c], kind, {n + b, n + c});
            }
        }
        for (std::size_t k = 0; k < n; ++k) {
            col_dual[b] *= quotient(mu[b] - q[k] + eta, mu[b] - q[k], kind, {n + b, k});
        }
    }

    // the column products are the theta-quotient velocities
    const Velocities v = selfdual_velocity(state, FlowForm::ThetaQuotient);
    for (std::size_t j = 0; j < n; ++j) {
        if (std::abs(col[j] - v.qdot[j]) > 1e-11 * std::max(1.0, std::abs(col[j]))) {
            throw std::logic_error("build_lax: column product differs from the flow velocity");
        }
    }
    for (std::size_t b = 0; b < m; ++b) {
        if (std::abs(col_dual[b] - v.mudot[b]) > 1e-11 * std::max(1.0, std::abs(col_dual[b]))) {
            throw std::logic_error("build_lax: dual column product differs from the flow velocity");
        }
    }

    LaxPair out;
    out.g = g;
    out.kind = kind.type() == KernelType::Rational ? LaxKind::Rational : LaxKind::Trigonometric;
    out.L.resize(n, n);
    out.Ltilde.resize(m, m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            out.L(i, j) = prefactor(q[i] - q[j], eta, g, kind, {i, j}) * col[j];
        }
    }
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = 0; b < m; ++b) {
            out.Ltilde(a, b) = prefactor(mu[a] - mu[b], eta, g, kind, {n + a, n + b}) * col_dual[b];
        }
    }
    if (out.kind == LaxKind::Trigonometric && n > m) {
        const double d = static_cast<double>(n - m);
        for (std::size_t j = 1; j <= n - m; ++j) {
            out.S.push_back(std::exp(-(2.0 * static_cast<double>(j) - 1.0 - d) * eta));
        }
    }
    return out;
}

cplx LogDet::value() const
{
    return phase * std::exp(log_abs);
}

LogDet log_det(const CMatrix &a)
{
    if (a.rows() != a.cols()) {
        throw Error(ErrorKind::ShapeMismatch, "determinant of a non-square matrix");
    }
    if (a.rows() == 0) {
        return {0.0, 1.0};
    }
    const Eigen::PartialPivLU<CMatrix> lu(a);
    const CMatrix &f = lu.matrixLU();
    LogDet out{0.0, lu.permutationP().determinant() > 0 ? cplx{1.0} : cplx{-1.0}};
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
        const double mag = std::abs(f(i, i));
        if (mag == 0.0) {
            return {-INFINITY, 1.0};
        }
        out.log_abs += std::log(mag);
        out.phase *= f(i, i) / mag;
    }
    return out;
}

cplx det(const CMatrix &a)
{
    return log_det(a).value();
}

cplx det_identity_residual(const LaxPair &pair, cplx lambda)
{
    const auto n = pair.L.rows(), m = pair.Ltilde.rows();
    const cplx lhs = det(pair.L - lambda * CMatrix::Identity(n, n));
    const cplx dual = det(pair.Ltilde - lambda * CMatrix::Identity(m, m));
    if (pair.kind == LaxKind::Rational) {
        return lhs - std::pow(pair.g - lambda, static_cast<int>(n - m)) * dual;
    }
    if (n < m) {
        throw Error(ErrorKind::ShapeMismatch, "trigonometric determinant identity needs N >= M");
    }
    cplx factor = 1.0;
    for (const cplx s : pair.S) {
        factor *= pair.g * s - lambda;
    }
    return lhs - factor * dual;
}

std::vector<cplx> char_poly(const CMatrix &a)
{
    if (a.rows() != a.cols()) {
        throw Error(ErrorKind::ShapeMismatch, "characteristic polynomial of a non-square matrix");
    }
    const auto n = static_cast<std::size_t>(a.rows());
    if (n > max_char_poly_size) {
        throw Error(ErrorKind::InvalidParams, "characteristic polynomial limited to 16 x 16");
    }
    const double sign = n % 2 == 0 ? 1.0 : -1.0;
    if (n == 0) {
        return {1.0};
    }
    double radius = node_radius(a);
    if (!(radius > 0.0) || !std::isfinite(radius)) {
        radius = 1.0;
    }
    const auto nodes = static_cast<Eigen::Index>(n + 1);
    CMatrix vander(nodes, nodes);
    Eigen::VectorXcd values(nodes);
    for (Eigen::Index k = 0; k < nodes; ++k) {
        const cplx unit = std::polar(1.0, 2.0 * pi * static_cast<double>(k) / static_cast<double>(nodes));
        values(k) = det(a - (radius * unit) * CMatrix::Identity(a.rows(), a.cols()));
        cplx p = 1.0;
        for (Eigen::Index j = 0; j < nodes; ++j) {
            vander(k, j) = p;
            p *= unit;
        }
    }
    const Eigen::VectorXcd scaled = vander.partialPivLu().solve(values);
    const double resid = (vander * scaled - values).norm() / std::max(values.norm(), 1e-300);
    if (!(resid <= 1e-8)) {
        throw Error(ErrorKind::IllConditioned, "Vandermonde solve residual " + std::to_string(resid));
    }
    std::vector<cplx> out(n + 1);
    double rp = 1.0;
    for (std::size_t j = 0; j <= n; ++j) {
        out[j] = scaled(static_cast<Eigen::Index>(j)) / rp;
        rp *= radius;
    }
    out[n] = sign;
    return out;
}

cplx poly_eval(const std::vector<cplx> &coeffs, cplx x)
{
    cplx acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
        acc = acc * x + *it;
    }
    return acc;
}

PolyDivision poly_divide(const std::vector<cplx> &num, const std::vector<cplx> &den)
{
    if (den.empty() || den.back() == cplx(0.0)) {
        throw Error(ErrorKind::InvalidParams, "polynomial division by a zero leading coefficient");
    }
    if (num.size() < den.size()) {
        return {{0.0}, num};
    }
    std::vector<cplx> rem = num;
    std::vector<cplx> quot(num.size() - den.size() + 1, 0.0);
    const std::size_t dd = den.size() - 1;
    for (std::size_t k = quot.size(); k-- > 0;) {
        const cplx c = rem[k + dd] / den.back();
        quot[k] = c;
        for (std::size_t j = 0; j <= dd; ++j) {
            rem[k + j] -= c * den[j];
        }
    }
    rem.resize(std::max<std::size_t>(dd, 1));
    if (dd == 0) {
        rem[0] = 0.0;
    }
    return {quot, rem};
}

std::vector<cplx> poly_from_roots(const std::vector<cplx> &roots)
{
    std::vector<cplx> out{1.0};
    for (const cplx r : roots) {
        out = poly_mul(out, {r, -1.0});
    }
    return out;
}

std::vector<cplx> degenerate_roots(const LaxPair &pair)
{
    const auto n = pair.L.rows(), m = pair.Ltilde.rows();
    if (n < m) {
        throw Error(ErrorKind::ShapeMismatch, "degenerate eigenvalues exist only for N >= M");
    }
    if (pair.kind == LaxKind::Rational) {
        return std::vector<cplx>(static_cast<std::size_t>(n - m), pair.g);
    }
    std::vector<cplx> out;
    for (const cplx s : pair.S) {
        out.push_back(pair.g * s);
    }
    return out;
}

SpectralReport spectral_drift(const Trajectory &traj, cplx g)
{
    if (traj.states.empty()) {
        throw Error(ErrorKind::ShapeMismatch, "empty trajectory");
    }
    SpectralReport rep;
    std::vector<cplx> c0;
    double scale = 1.0;
    for (const SelfDualState &s : traj.states) {
        const LaxPair pair = build_lax(s, g);
        const std::vector<cplx> c = char_poly(pair.L);
        if (c0.empty()) {
            c0 = c;
            scale = std::max(max_abs(c0), 1e-300);
        }
        for (std::size_t k = 0; k < c.size(); ++k) {
            rep.drift = std::max(rep.drift, std::abs(c[k] - c0[k]) / scale);
        }

        const std::vector<cplx> dual = char_poly(pair.Ltilde);
        std::vector<cplx> reduced;
        if (s.n() >= s.m()) {
            reduced = poly_divide(c, poly_from_roots(degenerate_roots(pair))).quotient;
        } else if (pair.kind == LaxKind::Rational) {
            // det(L - l) (g - l)^(M-N) = det(Ltilde - l)
            reduced = poly_mul(c, poly_from_roots(std::vector<cplx>(s.m() - s.n(), g)));
        } else {
            throw Error(ErrorKind::ShapeMismatch, "trigonometric spectral comparison needs N >= M");
        }
        const double dual_scale = std::max(max_abs(dual), 1e-300);
        for (std::size_t k = 0; k < dual.size() && k < reduced.size(); ++k) {
            rep.shared_residual = std::max(rep.shared_residual, std::abs(reduced[k] - dual[k]) / dual_scale);
        }
    }
    return rep;
}

} // namespace rsdual
