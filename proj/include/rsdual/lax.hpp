#ifndef RSDUAL_LAX_HPP
#define RSDUAL_LAX_HPP

#include <vector>

#include <Eigen/Dense>

#include "rsdual/dynamics.hpp"

namespace rsdual
{

using CMatrix = Eigen::MatrixXcd;

enum class LaxKind { Rational, Trigonometric };

const char *to_string(LaxKind kind);

/// L (N x N) and Ltilde (M x M). S holds the N - M diagonal entries
/// exp(-(2j - 1 - (N - M)) eta), j = 1..N-M, and is empty for the rational
/// row or when N <= M.
struct LaxPair {
    CMatrix L;
    CMatrix Ltilde;
    cplx g;
    std::vector<cplx> S;
    LaxKind kind;
};

/// Entries g eta / (q_i - q_j + eta) (rational) or g sinh eta / sinh(q_i - q_j + eta)
/// (hyperbolic) times the theta-quotient velocity of particle j; likewise for
/// Ltilde with mu and the dual velocities. Elliptic states are rejected.
LaxPair build_lax(const SelfDualState &state, cplx g = 1.0);

/// det(A) as exp(log_abs) * phase, accumulated from the LU factors.
struct LogDet {
    double log_abs;
    cplx phase;

    cplx value() const;
};

LogDet log_det(const CMatrix &a);
cplx det(const CMatrix &a);

/// det(L - lambda) - (g - lambda)^(N-M) det(Ltilde - lambda) for the rational
/// pair, det(L - lambda) - det(gS - lambda) det(Ltilde - lambda) for the
/// trigonometric one (which needs N >= M).
cplx det_identity_residual(const LaxPair &pair, cplx lambda);

/// Coefficients c_0..c_n (ascending) of det(A - lambda I). Sampled at the
/// n+1 roots of unity scaled to a radius near the spectral radius (never
/// above 2 * max absolute row sum), recovered from the scaled Vandermonde
/// system; c_n = (-1)^n is imposed.
std::vector<cplx> char_poly(const CMatrix &a);

/// Horner evaluation, ascending coefficients.
cplx poly_eval(const std::vector<cplx> &coeffs, cplx x);

struct PolyDivision {
    std::vector<cplx> quotient;
    std::vector<cplx> remainder;
};

/// Long division num / den, ascending coefficients; den must have a nonzero
/// leading coefficient.
PolyDivision poly_divide(const std::vector<cplx> &num, const std::vector<cplx> &den);

/// Ascending coefficients of prod (r_j - lambda).
std::vector<cplx> poly_from_roots(const std::vector<cplx> &roots);

/// The N - M degenerate eigenvalues: g (rational) or g S_jj (trigonometric).
std::vector<cplx> degenerate_roots(const LaxPair &pair);

struct SpectralReport {
    /// max over records and k of |c_k(t) - c_k(0)| / max_k |c_k(0)|
    double drift = 0.0;
    /// max over records of the coefficient mismatch between
    /// char_poly(L) / prod(degenerate root factors) and char_poly(Ltilde),
    /// relative to max |coefficient|.
    double shared_residual = 0.0;
};

SpectralReport spectral_drift(const Trajectory &traj, cplx g = 1.0);

} // namespace rsdual

#endif
