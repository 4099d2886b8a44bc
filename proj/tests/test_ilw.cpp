#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "oracles.hpp"
#include "rsdual/ilw.hpp"
#include "rsdual/sampling.hpp"

using namespace rsdual;

namespace
{

const KernelKind tau_i = KernelKind::elliptic(cplx{0.0, 1.0});
constexpr cplx eta0{0.3, 0.05};

SelfDualState random_state(Sampler &s, std::size_t n, const KernelKind &kind, cplx eta = eta0)
{
    const std::vector<cplx> pts = s.generic_points(2 * n, kind, 0.1);
    return SelfDualState{{pts.begin(), pts.begin() + n}, {pts.begin() + n, pts.end()}, eta, kind};
}

// A point away from every pole of f and of its eta-shifted copies.
cplx probe(Sampler &s, const SelfDualState &st)
{
    std::vector<cplx> avoid;
    for (const cplx q : st.q) {
        avoid.insert(avoid.end(), {q, q - st.eta, q + st.eta});
    }
    for (const cplx m : st.mu) {
        avoid.insert(avoid.end(), {m, m + st.eta, m - st.eta});
    }
    for (;;) {
        const cplx z = s.cell_point(st.kind);
        bool ok = true;
        for (const cplx a : avoid) {
            ok = ok && pole_proximity(z - a, st.kind) > 0.1;
        }
        if (ok) {
            return z;
        }
    }
}

PeriodicSignal random_real_signal(Sampler &s, int modes, double L, double delta)
{
    PeriodicSignal sig;
    sig.L = L;
    sig.delta = delta;
    for (int n = 1; n <= modes; ++n) {
        const cplx c{s.uniform(-1.0, 1.0), s.uniform(-1.0, 1.0)};
        sig.coeffs[n] = c;
        sig.coeffs[-n] = std::conj(c);
    }
    return sig;
}

} // namespace

// --- pole field ---------------------------------------------------------------

TEST(PoleField, SingleParticleResidues)
{
    const SelfDualState st{{0.3}, {0.1}, 0.2, tau_i};
    const PoleField f = pole_field_from_state(st, FlowForm::PhiProduct);
    EXPECT_LT(std::abs(f.res_q[0] - oracle::phi_row(-0.2, 0.2, tau_i)), 1e-12);
    EXPECT_LT(std::abs(f.res_mu[0] - oracle::phi_row(0.2, -0.2, tau_i)), 1e-12);
    EXPECT_LT(std::abs(f.res_q[0] + f.res_mu[0]), 1e-12);
}

TEST(PoleField, ResiduesMatchNaiveProducts)
{
    Sampler s(11);
    for (std::size_t n = 1; n <= 3; ++n) {
        const SelfDualState st = random_state(s, n, tau_i);
        const PoleField f = pole_field_from_state(st, FlowForm::PhiProduct);
        for (std::size_t i = 0; i < n; ++i) {
            cplx r = 1.0;
            for (std::size_t k = 0; k < n; ++k) {
                if (k != i) {
                    r *= oracle::phi_row(st.eta, st.q[i] - st.q[k], tau_i);
                }
                r *= oracle::phi_row(-st.eta, st.q[i] - st.mu[k], tau_i);
            }
            EXPECT_LT(std::abs(f.res_q[i] - r), 1e-11 * std::max(1.0, std::abs(r)));
        }
    }
}

TEST(PoleField, ResiduesAreVelocities)
{
    Sampler s(12);
    for (const FlowForm form : {FlowForm::PhiProduct, FlowForm::ThetaQuotient}) {
        for (std::size_t n = 1; n <= 3; ++n) {
            const SelfDualState st = random_state(s, n, tau_i);
            const PoleField f = pole_field_from_state(st, form);
            const Velocities v = selfdual_velocity(st, form);
            for (std::size_t i = 0; i < n; ++i) {
                EXPECT_LT(std::abs(f.res_q[i] - v.qdot[i]), 1e-10 * std::max(1.0, std::abs(v.qdot[i])));
                EXPECT_LT(std::abs(f.res_mu[i] + v.mudot[i]), 1e-10 * std::max(1.0, std::abs(v.mudot[i])));
            }
        }
    }
}

TEST(PoleField, ResiduesSumToZero)
{
    Sampler s(13);
    for (int trial = 0; trial < 20; ++trial) {
        const SelfDualState st = random_state(s, 1 + trial % 3, tau_i);
        const PoleField f = pole_field_from_state(st, FlowForm::PhiProduct);
        cplx sum = 0.0;
        double scale = 1.0;
        for (std::size_t i = 0; i < f.res_q.size(); ++i) {
            sum += f.res_q[i] + f.res_mu[i];
            scale = std::max({scale, std::abs(f.res_q[i]), std::abs(f.res_mu[i])});
        }
        EXPECT_LT(std::abs(sum), 1e-10 * scale) << "trial " << trial;
    }
}

TEST(PoleField, ProductMatchesPartialFractions)
{
    Sampler s(14);
    const std::vector<KernelKind> kinds{tau_i, KernelKind::elliptic(cplx{0.2, 1.3}), KernelKind::hyperbolic(),
                                        KernelKind::rational()};
    for (const KernelKind &kind : kinds) {
        for (const FlowForm form : {FlowForm::PhiProduct, FlowForm::ThetaQuotient}) {
            const SelfDualState st = random_state(s, 2, kind);
            const PoleField f = pole_field_from_state(st, form);
            for (int i = 0; i < 10; ++i) {
                const cplx z = probe(s, st);
                const cplx a = eval_f_product(f, z), b = eval_f(f, z);
                EXPECT_LT(std::abs(a - b), 1e-10 * std::max(1.0, std::abs(a)));
            }
        }
    }
}

TEST(PoleField, SplitIsConsistent)
{
    Sampler s(15);
    const SelfDualState st = random_state(s, 3, tau_i);
    const PoleField f = pole_field_from_state(st, FlowForm::PhiProduct);
    for (int i = 0; i < 10; ++i) {
        const cplx z = probe(s, st);
        EXPECT_LT(std::abs(eval_f(f, z) - (eval_F_plus(f, z) - eval_F_minus(f, z) + f.f0)), 1e-12);
    }
}

TEST(PoleField, DoublePeriodicity)
{
    Sampler s(16);
    for (const KernelKind &kind : {tau_i, KernelKind::elliptic(cplx{-0.3, 0.8})}) {
        const cplx tau = kind.params().tau;
        for (std::size_t n = 1; n <= 3; ++n) {
            const SelfDualState st = random_state(s, n, kind);
            const PoleField f = pole_field_from_state(st, FlowForm::PhiProduct);
            for (int i = 0; i < 5; ++i) {
                const cplx z = probe(s, st);
                const cplx v = eval_f(f, z);
                EXPECT_LT(std::abs(eval_f(f, z + 1.0) - v), 1e-10 * std::max(1.0, std::abs(v)));
                EXPECT_LT(std::abs(eval_f(f, z + tau) - v), 1e-10 * std::max(1.0, std::abs(v)));
            }
        }
    }
}

TEST(PoleField, NumericalResidue)
{
    Sampler s(17);
    const SelfDualState st = random_state(s, 2, tau_i);
    const PoleField f = pole_field_from_state(st, FlowForm::PhiProduct);
    const double d = 1e-4;
    for (std::size_t i = 0; i < 2; ++i) {
        for (const bool dual : {false, true}) {
            const cplx p = dual ? f.poles_mu[i] : f.poles_q[i];
            cplx avg = 0.0;
            for (int k = 0; k < 4; ++k) {
                const cplx step = d * std::exp(cplx{0.0, 0.5 * pi * k + 0.3});
                avg += step * eval_f_product(f, p + step);
            }
            avg /= 4.0;
            EXPECT_LT(std::abs(avg - (dual ? f.res_mu[i] : f.res_q[i])), 1e-6);
        }
    }
}

TEST(PoleField, ParityOfSymmetricState)
{
    // q = -mu: f(-z) = f(z); with real data and tau = i, f is also real on the imaginary axis
    const SelfDualState st{{0.27}, {-0.27}, 0.35, tau_i};
    const PoleField f = pole_field_from_state(st, FlowForm::PhiProduct);
    for (const double y : {0.1, 0.23, 0.4, -0.31}) {
        const cplx z{0.0, y};
        const cplx v = eval_f(f, z);
        EXPECT_LT(std::abs(eval_f(f, -z) - v), 1e-11);
        EXPECT_LT(std::abs(v.imag()), 1e-11);
    }
}

TEST(PoleField, Errors)
{
    const SelfDualState unequal{{0.1, 0.4}, {0.2}, eta0, KernelKind::rational()};
    try {
        pole_field_from_state(unequal, FlowForm::PhiProduct);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::ShapeMismatch);
    }
    const SelfDualState st{{0.1}, {0.45}, eta0, tau_i};
    const PoleField f = pole_field_from_state(st, FlowForm::PhiProduct);
    try {
        eval_f(f, 0.1);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::PoleHit);
    }
}

// --- the ILW equation on the pole field -------------------------------------

TEST(IlwResidual, VanishesOnEllipticFlow)
{
    Sampler s(21);
    for (const FlowForm form : {FlowForm::PhiProduct, FlowForm::ThetaQuotient}) {
        for (std::size_t n = 1; n <= 3; ++n) {
            for (int trial = 0; trial < 3; ++trial) {
                const SelfDualState st = random_state(s, n, tau_i);
                for (int i = 0; i < 20; ++i) {
                    const cplx z = probe(s, st);
                    EXPECT_LT(std::abs(ilw_residual(st, z, form)), 1e-9)
                        << to_string(form) << " n=" << n << " trial " << trial;
                }
            }
        }
    }
}

TEST(IlwResidual, OtherRows)
{
    Sampler s(22);
    for (const KernelKind &kind : {KernelKind::elliptic(cplx{0.4, 0.9}), KernelKind::hyperbolic(),
                                   KernelKind::rational()}) {
        const SelfDualState st = random_state(s, 2, kind);
        for (int i = 0; i < 10; ++i) {
            EXPECT_LT(std::abs(ilw_residual(st, probe(s, st), FlowForm::PhiProduct)), 1e-9);
        }
    }
}

TEST(IlwResidual, DetectsPerturbedVelocities)
{
    Sampler s(23);
    const SelfDualState st = random_state(s, 2, tau_i);
    const PoleField f = pole_field_from_state(st, FlowForm::PhiProduct);
    Velocities v = selfdual_velocity(st, FlowForm::PhiProduct);
    v.qdot[0] *= 1.01;
    for (int i = 0; i < 10; ++i) {
        EXPECT_GT(std::abs(ilw_residual(f, v, probe(s, st))), 1e-4);
    }
}

TEST(IlwResidual, LogDerivativeMatchesPoleMotion)
{
    // d/dt log f with f moved along its own poles, by central differences
    Sampler s(24);
    const SelfDualState st = random_state(s, 2, tau_i);
    const PoleField f = pole_field_from_state(st, FlowForm::PhiProduct);
    const Velocities v = selfdual_velocity(st, FlowForm::PhiProduct);
    double speed = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
        speed = std::max({speed, std::abs(v.qdot[i]), std::abs(v.mudot[i])});
    }
    // PhiProduct speeds carry the rescaling constant; step in displacement, not time
    const double h = 1e-4 / speed;
    auto moved = [&](double t) {
        PoleField g = f;
        for (std::size_t i = 0; i < 2; ++i) {
            g.poles_q[i] += t * v.qdot[i];
            g.poles_mu[i] += t * v.mudot[i];
        }
        return g;
    };
    const PoleField fp = moved(h), fm = moved(-h), fp2 = moved(2 * h), fm2 = moved(-2 * h);
    for (int i = 0; i < 5; ++i) {
        const cplx z = probe(s, st);
        const cplx df = (-eval_f_product(fp2, z) + 8.0 * eval_f_product(fp, z) - 8.0 * eval_f_product(fm, z) +
                         eval_f_product(fm2, z)) / (12.0 * h);
        const cplx expected = df / eval_f_product(f, z);
        EXPECT_LT(std::abs(log_derivative_in_time(f, v, z) - expected), 1e-7 * std::max(1.0, std::abs(expected)));
    }
}

TEST(IlwResidual, HoldsAlongTrajectory)
{
    Sampler s(25);
    const SelfDualState st = random_state(s, 2, tau_i);
    IntegrateOptions opt;
    opt.record_dt = 0.05;
    const Trajectory traj = integrate(st, FlowForm::ThetaQuotient, 0.2, 1e-10, 1e-12, opt);
    ASSERT_EQ(traj.termination.status, TerminationStatus::Completed);
    for (const SelfDualState &x : traj.states) {
        const PoleField f = pole_field_from_state(x, FlowForm::ThetaQuotient);
        const Velocities v = selfdual_velocity(x, FlowForm::ThetaQuotient);
        for (int i = 0; i < 3; ++i) {
            const cplx z = probe(s, x);
            EXPECT_LT(std::abs(log_derivative_in_time(f, v, z) - discrete_T_of_field(f, z)), 1e-9);
        }
    }
}

TEST(DiscreteT, SmallEtaExpansion)
{
    Sampler s(26);
    const SelfDualState st = random_state(s, 2, tau_i);
    const PoleField base = pole_field_from_state(st, FlowForm::PhiProduct);
    const cplx x = probe(s, st);
    auto deviation = [&](double eta) {
        PoleField f = base;
        f.eta = eta;
        const cplx two_term = -eta * (eval_F_plus_derivative(f, x, 1) - eval_F_minus_derivative(f, x, 1)) -
                              0.5 * eta * eta * (eval_F_plus_derivative(f, x, 2) + eval_F_minus_derivative(f, x, 2));
        return std::abs(discrete_T_of_field(f, x) - two_term);
    };
    const double ratio = deviation(1e-2) / deviation(1e-3);
    EXPECT_GT(ratio, 900.0);
    EXPECT_LT(ratio, 1100.0);
}

TEST(DiscreteT, FieldDerivativesByDifferences)
{
    Sampler s(27);
    const SelfDualState st = random_state(s, 2, tau_i);
    const PoleField f = pole_field_from_state(st, FlowForm::PhiProduct);
    const cplx x = probe(s, st);
    const double h = 2e-4;
    for (const bool plus : {true, false}) {
        auto F = [&](cplx z) { return plus ? eval_F_plus(f, z) : eval_F_minus(f, z); };
        auto dF = [&](int k) { return plus ? eval_F_plus_derivative(f, x, k) : eval_F_minus_derivative(f, x, k); };
        const cplx d1 = (F(x - 2 * h) - 8.0 * F(x - h) + 8.0 * F(x + h) - F(x + 2 * h)) / (12.0 * h);
        const cplx d2 = (-F(x - 2 * h) + 16.0 * F(x - h) - 30.0 * F(x) + 16.0 * F(x + h) - F(x + 2 * h)) / (12.0 * h * h);
        EXPECT_LT(std::abs(d1 - dF(1)), 1e-8 * std::max(1.0, std::abs(dF(1))));
        EXPECT_LT(std::abs(d2 - dF(2)), 1e-6 * std::max(1.0, std::abs(dF(2))));
    }
}

TEST(DiscreteT, ShiftedPoleHit)
{
    const SelfDualState st{{0.1}, {0.45}, eta0, tau_i};
    const PoleField f = pole_field_from_state(st, FlowForm::PhiProduct);
    try {
        discrete_T_of_field(f, st.mu[0] + st.eta);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::PoleHit);
    }
}

// --- periodic operators -------------------------------------------------------

TEST(PeriodicT, SingleModeMultiplier)
{
    PeriodicSignal sig;
    sig.coeffs[1] = 1.0;
    const PeriodicSignal out = apply_T_fourier(sig);
    EXPECT_LT(std::abs(out.coeffs.at(1) - cplx{0.0, 1.0 / std::tanh(2.0 * pi)}), 1e-15);
    EXPECT_EQ(out.f0, cplx{0.0});
}

TEST(PeriodicT, ZeroModeDropped)
{
    PeriodicSignal sig;
    sig.f0 = 3.0;
    sig.coeffs[2] = 1.0;
    EXPECT_EQ(apply_T_fourier(sig).f0, cplx{0.0});
    sig.coeffs[0] = 1.0;
    EXPECT_THROW(apply_T_fourier(sig), Error);
}

TEST(PeriodicT, RealityPreserved)
{
    Sampler s(31);
    for (int trial = 0; trial < 10; ++trial) {
        const PeriodicSignal sig = random_real_signal(s, 6, 0.5 + trial * 0.3, 0.2 + trial * 0.1);
        const PeriodicSignal out = apply_T_fourier(sig);
        for (const auto &[n, c] : out.coeffs) {
            EXPECT_LT(std::abs(c - std::conj(out.coeffs.at(-n))), 1e-15);
        }
        for (const double x : {-0.3, 0.1, 0.77}) {
            EXPECT_LT(std::abs(out.evaluate(x).imag()), 1e-13);
        }
    }
}

TEST(PeriodicT, BenjaminOnoLimit)
{
    for (int n = -8; n <= 8; ++n) {
        if (n != 0) {
            EXPECT_LT(std::abs(ilw_multiplier(n, 50.0, 0.5) - cplx{0.0, n > 0 ? 1.0 : -1.0}), 1e-12);
        }
    }
}

TEST(PeriodicT, KernelMatchesFourier)
{
    Sampler s(32);
    const PeriodicSignal sig = random_real_signal(s, 5, 0.5, 1.0);
    const PeriodicSignal a = apply_T_fourier(sig), b = apply_T_kernel(sig, 512);
    for (const auto &[n, c] : a.coeffs) {
        EXPECT_LT(std::abs(c - b.coeffs.at(n)), 1e-8) << "mode " << n;
    }
    EXPECT_LT(std::abs(b.f0), 1e-8);
}

TEST(PeriodicT, KernelMatchesFourierOtherScales)
{
    Sampler s(33);
    for (const auto [L, delta] : {std::pair{1.0, 0.3}, std::pair{2.5, 4.0}, std::pair{0.5, 0.1}}) {
        const PeriodicSignal sig = random_real_signal(s, 4, L, delta);
        const PeriodicSignal a = apply_T_fourier(sig), b = apply_T_kernel(sig, 512);
        for (const auto &[n, c] : a.coeffs) {
            EXPECT_LT(std::abs(c - b.coeffs.at(n)), 1e-8) << "L=" << L << " delta=" << delta << " mode " << n;
        }
    }
}

TEST(PeriodicT, KernelOnSine)
{
    // sin(2 pi x) with L = 1/2 is modes +-1 with coefficients -+i/2
    PeriodicSignal sig;
    sig.coeffs[1] = cplx{0.0, -0.5};
    sig.coeffs[-1] = cplx{0.0, 0.5};
    const PeriodicSignal b = apply_T_kernel(sig, 64);
    const double m = 1.0 / std::tanh(2.0 * pi);
    EXPECT_LT(std::abs(b.coeffs.at(1) - cplx{0.0, m} * cplx{0.0, -0.5}), 1e-8);
    EXPECT_LT(std::abs(b.coeffs.at(-1) - cplx{0.0, -m} * cplx{0.0, 0.5}), 1e-8);
}

TEST(PeriodicT, KernelZeroSignal)
{
    const PeriodicSignal out = apply_T_kernel(PeriodicSignal{}, 16);
    EXPECT_TRUE(out.coeffs.empty());
    EXPECT_EQ(out.f0, cplx{0.0});
}

TEST(PeriodicT, KernelNodeRequirements)
{
    PeriodicSignal sig;
    sig.coeffs[4] = 1.0;
    EXPECT_THROW(apply_T_kernel(sig, 16), Error);
    EXPECT_THROW(apply_T_kernel(sig, 33), Error);
    EXPECT_NO_THROW(apply_T_kernel(sig, 64));
}

TEST(PeriodicT, KernelUnderResolvedDiverges)
{
    // depth far below the node spacing: the kernel is nearly a delta derivative
    PeriodicSignal sig;
    sig.delta = 1e-4;
    sig.coeffs[1] = 1.0;
    try {
        apply_T_kernel(sig, 8);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::QuadratureDiverged);
    }
}

TEST(Limits, KdvMultiplier)
{
    const double r2 = kdv_multiplier_residual(1e-2, 0.5, 4);
    const double r3 = kdv_multiplier_residual(1e-3, 0.5, 4);
    const double ratio = r2 / r3;
    EXPECT_GT(ratio, 900.0);
    EXPECT_LT(ratio, 1100.0);
    // coth z - 1/z - z/3 = -z^3/45 + ..., so the residual is below z_max^3 / 45
    for (const double delta : {1e-2, 1e-3}) {
        const double z = pi * 4 * delta / 0.5;
        EXPECT_LT(kdv_multiplier_residual(delta, 0.5, 4), z * z * z / 45.0);
    }
    EXPECT_LT(kdv_multiplier_residual(1e-3, 0.5, 2), 1e-7);
}

TEST(Limits, HyperbolicKernel)
{
    EXPECT_LT(hyperbolic_kernel_limit_residual(0.3, 1.0, 20.0), 1e-10);
    EXPECT_LE(hyperbolic_kernel_limit_residual(0.3, 1.0, 40.0),
              hyperbolic_kernel_limit_residual(0.3, 1.0, 20.0) + 1e-16);
    double previous = INFINITY;
    for (const double L : {0.5, 1.0, 2.0}) {
        const double r = hyperbolic_kernel_limit_residual(0.3, 1.0, L);
        EXPECT_LT(r, previous) << "L=" << L;
        previous = r;
    }
    EXPECT_THROW(hyperbolic_kernel_limit_residual(0.0, 1.0, 20.0), Error);
    try {
        hyperbolic_kernel_limit_residual(0.0, 1.0, 20.0);
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::PoleHit);
    }
}

TEST(Limits, ModularFormMatchesDirectKernel)
{
    // direct series at tau = i delta / L against the transformed evaluation
    for (const double L : {0.5, 2.0, 5.0}) {
        const double delta = 1.0, x = 0.3;
        const KernelKind kind = KernelKind::elliptic(cplx{0.0, delta / L});
        const cplx direct = -eisenstein_e1(x / (2.0 * L), kind) / (2.0 * pi * L) - x / (2.0 * delta * L);
        const double tail = std::abs(direct + 0.5 / delta / std::tanh(pi * x / (2.0 * delta)));
        EXPECT_NEAR(tail, hyperbolic_kernel_limit_residual(x, delta, L), 1e-12) << "L=" << L;
    }
}
