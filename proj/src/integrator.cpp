#include <algorithm>
#include <cmath>
#include <limits>

#include "rsdual/dynamics.hpp"

namespace rsdual
{

namespace
{

// Dormand-Prince 5(4) tableau. The flow is autonomous, so the nodes c_i are not needed.
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                 a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

// PI controller constants (Hairer, Norsett & Wanner).
constexpr double safety = 0.9;
constexpr double beta = 0.04;
constexpr double expo = 0.2 - beta * 0.75;
constexpr double fac_min = 0.2;
constexpr double fac_max = 10.0;

using Vec = std::vector<double>;

Vec pack(const SelfDualState &s)
{
    Vec y;
    y.reserve(2 * (s.n() + s.m()));
    for (const cplx z : s.q) {
        y.push_back(z.real());
        y.push_back(z.imag());
    }
    for (const cplx z : s.mu) {
        y.push_back(z.real());
        y.push_back(z.imag());
    }
    return y;
}

void unpack(const Vec &y, SelfDualState &s)
{
    std::size_t j = 0;
    for (cplx &z : s.q) {
        z = {y[j], y[j + 1]};
        j += 2;
    }
    for (cplx &z : s.mu) {
        z = {y[j], y[j + 1]};
        j += 2;
    }
}

class Rhs
{
public:
    Rhs(const SelfDualState &s0, FlowForm form, StepStats &stats) : m_state(s0), m_form(form), m_stats(stats) {}

    void operator()(const Vec &y, Vec &dy)
    {
        unpack(y, m_state);
        const Velocities v = selfdual_velocity(m_state, m_form);
        ++m_stats.rhs_evaluations;
        dy.resize(y.size());
        std::size_t j = 0;
        for (const cplx z : v.qdot) {
            dy[j++] = z.real();
            dy[j++] = z.imag();
        }
        for (const cplx z : v.mudot) {
            dy[j++] = z.real();
            dy[j++] = z.imag();
        }
    }

private:
    SelfDualState m_state;
    FlowForm m_form;
    StepStats &m_stats;
};

double inf_norm(const Vec &v)
{
    double out = 0.0;
    for (const double x : v) {
        out = std::max(out, std::abs(x));
    }
    return out;
}

} // namespace

const char *to_string(TerminationStatus status)
{
    switch (status) {
        case TerminationStatus::Completed: return "Completed";
        case TerminationStatus::CollisionAbort: return "CollisionAbort";
        case TerminationStatus::NonConvergent: return "NonConvergent";
    }
    return "Unknown";
}

Trajectory integrate(const SelfDualState &state0, FlowForm form, double t_end, double rel_tol, double abs_tol,
                     const IntegrateOptions &options)
{
    if (!(t_end > 0.0) || !std::isfinite(t_end)) {
        throw Error(ErrorKind::InvalidParams, "t_end must be positive");
    }
    if (!(rel_tol > 0.0 && rel_tol <= 1e-2) || !(abs_tol > 0.0 && abs_tol <= 1e-2)) {
        throw Error(ErrorKind::InvalidParams, "tolerances must lie in (0, 1e-2]");
    }
    state0.validate(0.0);

    Trajectory traj;
    traj.times.push_back(0.0);
    traj.states.push_back(state0);

    auto abort_on_collision = [&](const SelfDualState &s, double t) {
        const PairProximity p = min_pair_proximity(s);
        if (p.value < options.collision_eps) {
            traj.termination = {TerminationStatus::CollisionAbort, t, p.pair, "pole proximity below collision_eps"};
            return true;
        }
        return false;
    };
    if (abort_on_collision(state0, 0.0)) {
        return traj;
    }

    Rhs rhs(state0, form, traj.step_stats);
    SelfDualState scratch = state0;
    const std::size_t dim = 2 * (state0.n() + state0.m());
    Vec y = pack(state0), k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim), ytmp(dim), ynew(dim);
    rhs(y, k1);

    double h = options.initial_step;
    if (!(h > 0.0)) {
        const double d0 = inf_norm(y), d1 = inf_norm(k1);
        h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    }
    const double record_dt = options.record_dt;
    h = std::min(h, t_end);
    if (record_dt > 0.0) {
        h = std::min(h, record_dt);
    }
    const double h_min = 1e-14 * t_end;

    double t = 0.0;
    double fac_old = 1e-4;
    std::size_t next_record = 1;
    bool last_rejected = false;

    while (t < t_end) {
        if (traj.step_stats.accepted + traj.step_stats.rejected >= options.max_steps) {
            traj.termination = {TerminationStatus::NonConvergent, t, std::nullopt, "step budget exhausted"};
            return traj;
        }
        // Land exactly on the next output time (or t_end).
        double target = t_end;
        if (record_dt > 0.0) {
            const double r = static_cast<double>(next_record) * record_dt;
            target = r >= t_end - 1e-9 * record_dt ? t_end : r;
        }
        double step = h;
        bool hits_target = false;
        if (t + step >= target - 1e-12 * std::max(1.0, target)) {
            step = target - t;
            hits_target = true;
        }
        if (step < h_min) {
            traj.termination = {TerminationStatus::NonConvergent, t, std::nullopt, "step size underflow"};
            return traj;
        }

        bool stage_failed = false;
        try {
            for (std::size_t i = 0; i < dim; ++i) {
                ytmp[i] = y[i] + step * a21 * k1[i];
            }
            rhs(ytmp, k2);
            for (std::size_t i = 0; i < dim; ++i) {
                ytmp[i] = y[i] + step * (a31 * k1[i] + a32 * k2[i]);
            }
            rhs(ytmp, k3);
            for (std::size_t i = 0; i < dim; ++i) {
                ytmp[i] = y[i] + step * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
            }
            rhs(ytmp, k4);
            for (std::size_t i = 0; i < dim; ++i) {
                ytmp[i] = y[i] + step * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
            }
            rhs(ytmp, k5);
            for (std::size_t i = 0; i < dim; ++i) {
                ytmp[i] = y[i] + step * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
            }
            rhs(ytmp, k6);
            for (std::size_t i = 0; i < dim; ++i) {
                ynew[i] = y[i] + step * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
            }
            rhs(ynew, k7);
        } catch (const Error &e) {
            if (e.kind() != ErrorKind::PoleHit) {
                throw;
            }
            stage_failed = true;
        }

        if (stage_failed) {
            ++traj.step_stats.rejected;
            h = 0.25 * step;
            last_rejected = true;
            continue;
        }

        double err = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            const double e = step * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double sc = abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            err = std::max(err, std::abs(e) / sc);
        }
        if (!std::isfinite(err)) {
            ++traj.step_stats.rejected;
            h = 0.25 * step;
            last_rejected = true;
            continue;
        }

        const double fac11 = std::pow(std::max(err, 1e-300), expo);
        if (err <= 1.0) {
            double fac = fac11 / std::pow(fac_old, beta);
            fac = std::clamp(fac / safety, 1.0 / fac_max, 1.0 / fac_min);
            double h_new = step / fac;
            if (last_rejected) {
                h_new = std::min(h_new, step);
            }
            fac_old = std::max(err, 1e-4);
            ++traj.step_stats.accepted;
            last_rejected = false;

            t = hits_target ? target : t + step;
            y.swap(ynew);
            k1.swap(k7);
            // A shortened landing step says nothing about the natural step size.
            h = hits_target ? std::max(h, h_new) : h_new;
            if (record_dt > 0.0) {
                h = std::min(h, record_dt);
            }

            unpack(y, scratch);
            const bool at_record = record_dt <= 0.0 || hits_target;
            if (at_record) {
                traj.times.push_back(t);
                traj.states.push_back(scratch);
                if (hits_target && target < t_end) {
                    ++next_record;
                }
            }
            if (abort_on_collision(scratch, t)) {
                if (!at_record) {
                    traj.times.push_back(t);
                    traj.states.push_back(scratch);
                }
                return traj;
            }
        } else {
            ++traj.step_stats.rejected;
            h = step / std::min(1.0 / fac_min, fac11 / safety);
            last_rejected = true;
        }
    }
    traj.termination = {TerminationStatus::Completed, t_end, std::nullopt, ""};
    return traj;
}

FlowConsistency flow_consistency(const Trajectory &traj, FlowForm form)
{
    const std::size_t count = traj.times.size();
    if (count < 5 || traj.states.size() != count) {
        throw Error(ErrorKind::ShapeMismatch, "flow consistency needs at least 5 recorded states");
    }
    FlowConsistency out;
    for (std::size_t i = 2; i + 2 < count; ++i) {
        const double h = traj.times[i + 1] - traj.times[i];
        bool uniform = h > 0.0;
        for (int j = -2; j <= 2 && uniform; ++j) {
            const double expected = traj.times[i] + j * h;
            uniform = std::abs(traj.times[i + j] - expected) <= 1e-9 * h;
        }
        if (!uniform) {
            continue;
        }
        const SelfDualState &s = traj.states[i];
        const Velocities v = selfdual_velocity(s, form);
        auto second_difference = [&](auto member, std::size_t idx) {
            auto at = [&](int j) { return (traj.states[i + j].*member)[idx]; };
            return (-at(2) + 16.0 * at(1) - 30.0 * at(0) + 16.0 * at(-1) - at(-2)) / (12.0 * h * h);
        };
        const std::vector<cplx> aq = rs_acceleration(s.q, v.qdot, s.eta, s.kind);
        const std::vector<cplx> amu = rs_acceleration(s.mu, v.mudot, s.eta, s.kind);
        for (std::size_t k = 0; k < s.n(); ++k) {
            out.q_residual = std::max(out.q_residual, std::abs(second_difference(&SelfDualState::q, k) - aq[k]));
        }
        for (std::size_t a = 0; a < s.m(); ++a) {
            out.mu_residual = std::max(out.mu_residual, std::abs(second_difference(&SelfDualState::mu, a) - amu[a]));
        }
        ++out.checked_points;
    }
    if (out.checked_points == 0) {
        throw Error(ErrorKind::ShapeMismatch, "no uniformly spaced five-point window in trajectory");
    }
    return out;
}

double flow_consistency_residual(const Trajectory &traj, FlowForm form)
{
    return flow_consistency(traj, form).max();
}

} // namespace rsdual
