#ifndef RSDUAL_DYNAMICS_HPP
#define RSDUAL_DYNAMICS_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rsdual/elliptic.hpp"

namespace rsdual
{

/// N particle positions q, M dual positions mu, the shift eta and the kernel row.
struct SelfDualState {
    std::vector<cplx> q;
    std::vector<cplx> mu;
    cplx eta;
    KernelKind kind;

    std::size_t n() const { return q.size(); }
    std::size_t m() const { return mu.size(); }

    /// Checks N, M >= 1, N = M for the elliptic row, and that every pair
    /// difference stays at least `min_proximity` away from the pole set.
    void validate(double min_proximity) const;
    void validate() const { validate(kind.pole_eps()); }

    /// State with q and mu exchanged and eta negated.
    SelfDualState swapped() const;
};

/// ThetaQuotient is the first-order system written with theta quotients;
/// PhiProduct is the same flow in rescaled time, written with Kronecker
/// functions. PhiProduct velocities = rescale_constant * ThetaQuotient velocities.
enum class FlowForm { ThetaQuotient, PhiProduct };

const char *to_string(FlowForm form);

struct Velocities {
    std::vector<cplx> qdot;
    std::vector<cplx> mudot;
};

/// theta'(0)^(N+M-1) / (theta(eta)^(N-1) theta(-eta)^M). For N = M this is the
/// familiar theta'(0)^(2N-1) / (theta(eta)^(N-1) theta(-eta)^N).
cplx rescale_constant(std::size_t n, std::size_t m, cplx eta, const KernelKind &kind);
cplx rescale_constant(std::size_t n, cplx eta, const EllipticParams &params);

Velocities selfdual_velocity(const SelfDualState &state, FlowForm form);

/// Ruijsenaars-Schneider accelerations
///   qdd_i = sum_{k != i} qd_i qd_k (2 E1(q_ik) - E1(q_ik + eta) - E1(q_ik - eta)).
/// The result is cross-checked against the g/phi form.
std::vector<cplx> rs_acceleration(std::span<const cplx> q, std::span<const cplx> qdot, cplx eta, const KernelKind &kind);

/// Same accelerations assembled from g(eta, .) / phi(eta, .) ratios.
std::vector<cplx> rs_acceleration_gphi(std::span<const cplx> q, std::span<const cplx> qdot, cplx eta,
                                       const KernelKind &kind);

/// Self-dual Calogero-Moser flow with coupling nu.
Velocities cm_selfdual_velocity(const SelfDualState &state, cplx nu);

/// qdd_i = nu^2 sum_{k != i} E2'(q_i - q_k).
std::vector<cplx> cm_acceleration(std::span<const cplx> q, cplx nu, const KernelKind &kind);

struct PairProximity {
    double value;
    PairIndex pair;
};

/// Smallest lattice-aware proximity over all q-q, mu-mu and q-mu pairs.
PairProximity min_pair_proximity(const SelfDualState &state);

/// max |c v_TQ - c - v_CM| over all components, with eta replaced by nu / c.
double nonrelativistic_limit_residual(const SelfDualState &state, cplx nu, double c);

/// Appends a dual coordinate at `far_mu` and compares the ThetaQuotient
/// velocities of (q, mu) in the enlarged system with those of `reduced`.
double dimensional_reduction_residual(const SelfDualState &reduced, cplx far_mu);

// --- Time integration -----------------------------------------------------

struct StepStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evaluations = 0;
};

enum class TerminationStatus { Completed, CollisionAbort, NonConvergent };

const char *to_string(TerminationStatus status);

struct Termination {
    TerminationStatus status = TerminationStatus::Completed;
    double time = 0.0;
    std::optional<PairIndex> pair;
    std::string message;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<SelfDualState> states;
    StepStats step_stats;
    Termination termination;
};

struct IntegrateOptions {
    /// Output cadence. Steps are shortened to land on every record time.
    /// Non-positive values record every accepted step.
    double record_dt = 0.0;
    double collision_eps = 1e-6;
    double initial_step = 0.0;
    std::size_t max_steps = 10'000'000;
};

/// Dormand-Prince 5(4) with a PI step-size controller on the 2(N+M) real
/// components of (q, mu). Time stays real.
Trajectory integrate(const SelfDualState &state0, FlowForm form, double t_end, double rel_tol, double abs_tol,
                     const IntegrateOptions &options = {});

struct FlowConsistency {
    double q_residual = 0.0;
    double mu_residual = 0.0;
    std::size_t checked_points = 0;

    double max() const { return q_residual > mu_residual ? q_residual : mu_residual; }
};

/// Compares a fourth-order central second difference of the recorded
/// positions with the Ruijsenaars-Schneider accelerations evaluated from the
/// flow velocities, for both the q set and the mu set.
FlowConsistency flow_consistency(const Trajectory &traj, FlowForm form);
double flow_consistency_residual(const Trajectory &traj, FlowForm form);

} // namespace rsdual

#endif
