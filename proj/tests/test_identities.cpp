#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "oracles.hpp"
#include "rsdual/identities.hpp"
#include "rsdual/sampling.hpp"

using namespace rsdual;

namespace
{

const KernelKind tau_i = KernelKind::elliptic(cplx{0.0, 1.0});

// Generic draws: x arguments spread over the fundamental cell, y arguments
// and their total kept off the pole set.
struct FayData {
    std::vector<cplx> xs, ys;
};

FayData generic_fay_data(Sampler &s, std::size_t n, const KernelKind &kind, double sep = 0.1)
{
    for (;;) {
        FayData d{s.generic_points(n, kind, sep), s.generic_points(n, kind, sep)};
        cplx total = 0.0;
        for (const cplx y : d.ys) {
            total += y;
        }
        if (pole_proximity(total, kind) >= sep) {
            return d;
        }
    }
}

SelfDualState random_state(Sampler &s, std::size_t n, std::size_t m, cplx eta, const KernelKind &kind)
{
    const auto pts = s.distinct_points(n + m, kind, 0.05);
    return SelfDualState{{pts.begin(), pts.begin() + n}, {pts.begin() + n, pts.end()}, eta, kind};
}

} // namespace

TEST(Fay, EllipticPoint)
{
    const cplx r = fay_residual(0.31, {0.12, 0.2}, 0.07, {0.25, -0.1}, tau_i);
    EXPECT_LT(std::abs(r), 1e-11);
}

TEST(Fay, RationalIntegers)
{
    EXPECT_LT(std::abs(fay_residual(2.0, 3.0, 5.0, 7.0, KernelKind::rational())), 1e-15);
}

TEST(Fay, OracleSidesAgree)
{
    // Both sides from the naive theta series; confirms the identity itself,
    // not just self-consistency of the library evaluator.
    const cplx z = 0.31, w{0.12, 0.2}, q = 0.07, u{0.25, -0.1};
    auto phi = [](cplx a, cplx b) { return oracle::phi_row(a, b, tau_i); };
    const cplx lhs = phi(z, q) * phi(w, u);
    const cplx rhs = phi(z - w, q) * phi(w, q + u) + phi(w - z, u) * phi(z, q + u);
    EXPECT_LT(std::abs(lhs - rhs), 1e-11);
    EXPECT_LT(std::abs((lhs - rhs) - fay_residual(z, w, q, u, tau_i)), 1e-11);
}

TEST(Fay, CoincidentShiftsHitThePole)
{
    const cplx q = 0.2, u = 0.2, w{0.1, 0.1};
    bool threw = false;
    for (double d = 1e-2; d > 1e-16; d /= 10.0) {
        try {
            const cplx r = fay_residual(w + d, w, q, u, tau_i);
            EXPECT_LT(std::abs(r), 1e-13 * fay_scale(w + d, w, q, u, tau_i)) << d;
        } catch (const Error &e) {
            EXPECT_EQ(e.kind(), ErrorKind::PoleHit);
            threw = true;
            break;
        }
    }
    EXPECT_TRUE(threw);
}

struct FayCase {
    KernelKind kind;
    double tol;
};

const std::vector<FayCase> fay_cases{{tau_i, 1e-10},
                                     {KernelKind::elliptic(cplx{0.3, 1.2}), 1e-10},
                                     {KernelKind::hyperbolic(), 1e-13},
                                     {KernelKind::rational(), 1e-13}};

TEST(Fay, GenericSamplesAllRows)
{
    Sampler smp(97);
    for (const FayCase &cs : fay_cases) {
        int done = 0;
        while (done < 100) {
            const auto p = smp.generic_points(2, cs.kind, 0.1);
            const auto r = smp.generic_points(2, cs.kind, 0.1);
            if (pole_proximity(p[0] - p[1], cs.kind) < 0.1 || pole_proximity(r[0] + r[1], cs.kind) < 0.1) {
                continue;
            }
            EXPECT_LT(std::abs(fay_residual(p[0], p[1], r[0], r[1], cs.kind)), cs.tol) << to_string(cs.kind.type());
            ++done;
        }
    }
}

TEST(Fay, NearPoleSamplesRelativeToTermSize)
{
    // Draws allowed within 1e-3 of the pole set: terms reach 1e6 and the
    // residual is measured against the largest of them.
    Sampler smp(101);
    for (const FayCase &cs : fay_cases) {
        int done = 0;
        while (done < 100) {
            const cplx z = smp.point(cs.kind), q = smp.point(cs.kind);
            const cplx w = smp.point_avoiding(cs.kind, std::vector<cplx>{z});
            const cplx u = smp.point_avoiding(cs.kind, std::vector<cplx>{-q});
            if (pole_proximity(w, cs.kind) < 1e-3 || pole_proximity(z, cs.kind) < 1e-3) {
                continue;
            }
            const cplx r = fay_residual(z, w, q, u, cs.kind);
            EXPECT_LT(std::abs(r), cs.tol * fay_scale(z, w, q, u, cs.kind));
            ++done;
        }
    }
}

TEST(HigherFay, OrderTwoIsFay)
{
    const std::vector<cplx> xs{0.31, {0.12, 0.2}}, ys{0.07, {0.25, -0.1}};
    const cplx a = higher_fay_residual(xs, ys, tau_i);
    const cplx b = fay_residual(xs[0], xs[1], ys[0], ys[1], tau_i);
    EXPECT_LT(std::abs(a - b), 1e-13);
}

TEST(HigherFay, EllipticOrderFive)
{
    Sampler smp(103);
    for (int trial = 0; trial < 20; ++trial) {
        const FayData d = generic_fay_data(smp, 5, tau_i);
        EXPECT_LT(std::abs(higher_fay_residual(d.xs, d.ys, tau_i)), 1e-10);
    }
}

TEST(HigherFay, RandomSamplesAllRows)
{
    // Products of up to five factors reach 1e2..1e4 on generic draws, so the
    // residual is roundoff of that size; it is measured relative to the
    // largest product.
    Sampler smp(104);
    for (const FayCase &cs : fay_cases) {
        for (int trial = 0; trial < 100; ++trial) {
            const FayData d = generic_fay_data(smp, 2 + trial % 4, cs.kind);
            const double scale = higher_fay_scale(d.xs, d.ys, cs.kind);
            EXPECT_LT(std::abs(higher_fay_residual(d.xs, d.ys, cs.kind)), cs.tol * scale)
                << to_string(cs.kind.type()) << " n=" << d.xs.size();
        }
    }
}

TEST(HigherFay, RationalOrderSixIntegerSpaced)
{
    const std::vector<cplx> xs{1, 2, 3, 4, 5, 6};
    const std::vector<cplx> ys{0.5, -1.25, 2.0, {0.75, 0.5}, -0.3, 1.1};
    EXPECT_LT(std::abs(higher_fay_residual(xs, ys, KernelKind::rational())), 1e-12);
}

TEST(HigherFay, SubstitutionBehindTheVelocitySum)
{
    // n = 2N-1 with y = (-eta, eta x (N-1), -eta x (N-1)), so sum y = -eta.
    Sampler smp(107);
    const cplx eta{0.17, 0.03};
    for (std::size_t n_particles = 2; n_particles <= 4; ++n_particles) {
        const std::size_t n = 2 * n_particles - 1;
        const auto xs = smp.generic_points(n, tau_i, 0.1);
        std::vector<cplx> ys(n, -eta);
        for (std::size_t k = 1; k < n_particles; ++k) {
            ys[k] = eta;
        }
        // seven factors of size ~1/eta: compare against the term size
        EXPECT_LT(std::abs(higher_fay_residual(xs, ys, tau_i)), 1e-13 * higher_fay_scale(xs, ys, tau_i));
    }
}

TEST(HigherFay, InductionShift)
{
    // n+1 points, shift the first n by the last one.
    Sampler smp(109);
    for (const KernelKind &kind : {tau_i, KernelKind::hyperbolic(), KernelKind::rational()}) {
        const double tol = kind.is_elliptic() ? 1e-10 : 1e-13;
        for (int trial = 0; trial < 10; ++trial) {
            auto xs = smp.generic_points(5, kind, 0.1);
            const auto ys = generic_fay_data(smp, 4, kind).ys;
            const cplx last = xs.back();
            xs.pop_back();
            const cplx before = higher_fay_residual(xs, ys, kind);
            const double scale_before = higher_fay_scale(xs, ys, kind);
            for (cplx &x : xs) {
                x -= last;
            }
            bool near_pole = false;
            for (const cplx x : xs) {
                near_pole = near_pole || pole_proximity(x, kind) < 0.1;
            }
            if (near_pole) {
                continue;
            }
            const cplx after = higher_fay_residual(xs, ys, kind);
            EXPECT_LT(std::abs(before), tol * scale_before);
            EXPECT_LT(std::abs(after), tol * higher_fay_scale(xs, ys, kind));
        }
    }
}

TEST(HigherFay, CoincidentArguments)
{
    const std::vector<cplx> xs{0.2, 0.2, 0.4}, ys{0.1, 0.3, 0.5};
    try {
        higher_fay_residual(xs, ys, tau_i);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::DegenerateInput);
    }
    EXPECT_THROW(higher_fay_residual(std::vector<cplx>{0.2}, std::vector<cplx>{0.1}, tau_i), Error);
}

TEST(VelocitySum, RationalTwoBody)
{
    const SelfDualState s{{1.0}, {0.0}, 2.0, KernelKind::rational()};
    EXPECT_LT(std::abs(velocity_sum_residual(s)), 1e-15);
}

TEST(VelocitySum, EllipticThreeParticles)
{
    Sampler smp(113);
    for (int trial = 0; trial < 20; ++trial) {
        const auto p = smp.generic_points(6, tau_i, 0.1);
        const SelfDualState s{{p.begin(), p.begin() + 3}, {p.begin() + 3, p.end()}, {0.17, 0.03}, tau_i};
        EXPECT_LT(std::abs(velocity_sum_residual(s)), 1e-10);
    }
}

TEST(VelocitySum, RationalUnbalancedIsReported)
{
    Sampler smp(127);
    const SelfDualState s = random_state(smp, 3, 2, {0.17, 0.03}, KernelKind::rational());
    const cplx r = velocity_sum_residual(s);
    EXPECT_TRUE(std::isfinite(std::abs(r)));
}

TEST(VelocitySum, EllipticShapeMismatch)
{
    const SelfDualState s{{0.1, 0.2}, {0.3}, 0.2, tau_i};
    try {
        velocity_sum_residual(s);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::ShapeMismatch);
    }
}

TEST(DerivativeIdentity, EllipticVanishes)
{
    Sampler smp(131);
    for (int trial = 0; trial < 10; ++trial) {
        const SelfDualState s = random_state(smp, 2, 2, {0.21, -0.04}, tau_i);
        for (std::size_t i = 0; i < 2; ++i) {
            EXPECT_LT(std::abs(derivative_identity_residual(s, i)), 1e-9);
        }
    }
}

TEST(DerivativeIdentity, MatchesDifferenceOfVelocitySum)
{
    // Elliptic: both sides are ~0; the unbalanced rational system gives a
    // nonzero derivative, so the comparison has teeth there.
    Sampler smp(137);
    struct Case {
        KernelKind kind;
        std::size_t n, m;
    };
    for (const Case &cs : {Case{tau_i, 2, 2}, Case{KernelKind::rational(), 3, 2}, Case{KernelKind::hyperbolic(), 2, 3}}) {
        const SelfDualState s = random_state(smp, cs.n, cs.m, {0.21, -0.04}, cs.kind);
        const double h = 1e-3;
        for (std::size_t i = 0; i < cs.n; ++i) {
            auto at = [&](double dx) {
                SelfDualState t = s;
                t.q[i] += dx;
                return velocity_sum_residual(t);
            };
            const cplx fd = (-at(2 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2 * h)) / (12.0 * h);
            const cplx closed = derivative_identity_residual(s, i);
            EXPECT_LT(std::abs(fd - closed), 1e-7 * std::max(1.0, std::abs(closed)))
                << to_string(cs.kind.type()) << " i=" << i;
        }
    }
}

TEST(DerivativeIdentity, RationalTwoBody)
{
    const SelfDualState s{{1.0}, {0.0}, 2.0, KernelKind::rational()};
    EXPECT_LT(std::abs(derivative_identity_residual(s, 0)), 1e-15);
    EXPECT_THROW(derivative_identity_residual(s, 1), Error);
}
