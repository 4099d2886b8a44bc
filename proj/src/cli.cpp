#include "rsdual/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rsdual/identities.hpp"
#include "rsdual/ilw.hpp"
#include "rsdual/lax.hpp"
#include "rsdual/sampling.hpp"

namespace rsdual::cli
{

using json = nlohmann::ordered_json;

std::string format_number(double x)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return {buf, res.ptr};
}

namespace
{

// --- parsing ------------------------------------------------------------------

double finite_number(const json &j, const std::string &key)
{
    if (!j.is_number()) {
        throw ConfigError("'" + key + "' must be a number");
    }
    const double x = j.get<double>();
    if (!std::isfinite(x)) {
        throw ConfigError("'" + key + "' must be finite");
    }
    return x;
}

cplx complex_value(const json &j, const std::string &key)
{
    if (j.is_number()) {
        return finite_number(j, key);
    }
    if (!j.is_array() || j.size() != 2) {
        throw ConfigError("'" + key + "' must be [re, im]");
    }
    return {finite_number(j[0], key), finite_number(j[1], key)};
}

std::vector<cplx> complex_list(const json &j, const std::string &key)
{
    if (!j.is_array()) {
        throw ConfigError("'" + key + "' must be a list of [re, im] pairs");
    }
    std::vector<cplx> out;
    for (const json &e : j) {
        out.push_back(complex_value(e, key));
    }
    return out;
}

bool needs_trajectory(const std::string &command)
{
    return command == "simulate" || command == "lax-spectrum";
}

void validate_for_command(const Scenario &sc)
{
    const SelfDualState st = sc.state();
    if (st.q.empty() || st.mu.empty()) {
        throw ConfigError("q0 and mu0 must both be non-empty");
    }
    try {
        st.validate();
    } catch (const Error &e) {
        throw ConfigError(std::string("initial state rejected: ") + e.what());
    }
    if (needs_trajectory(sc.command)) {
        if (!(sc.t_end > 0.0)) {
            throw ConfigError("t_end must be positive");
        }
        if (!(sc.rel_tol > 0.0 && sc.rel_tol <= 1e-2) || !(sc.abs_tol > 0.0 && sc.abs_tol <= 1e-2)) {
            throw ConfigError("rel_tol and abs_tol must lie in (0, 1e-2]");
        }
        if (sc.record_dt < 0.0) {
            throw ConfigError("record_dt must be non-negative");
        }
    }
    if (sc.command == "lax-spectrum" && sc.kind.is_elliptic()) {
        throw ConfigError("lax-spectrum needs a rational or hyperbolic kernel");
    }
    if (sc.command == "ilw-residual" && st.n() != st.m()) {
        throw ConfigError("ilw-residual needs N = M");
    }
    if (sc.samples < 1 || sc.samples > 100000) {
        throw ConfigError("samples must lie in [1, 100000]");
    }
}

} // namespace

Scenario parse_scenario(std::string_view text, const std::string &command)
{
    if (std::find(commands().begin(), commands().end(), command) == commands().end()) {
        throw ConfigError("unknown command '" + command + "'");
    }
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error &e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    static const std::set<std::string> known{"command", "kind", "tau",     "N",       "M",       "q0",
                                             "mu0",     "eta",  "nu",      "g",       "form",    "t_end",
                                             "rel_tol", "abs_tol", "record_dt", "samples", "seed"};
    for (const auto &[key, value] : j.items()) {
        if (!known.contains(key)) {
            throw ConfigError("unknown key '" + key + "'");
        }
    }

    Scenario sc;
    sc.command = command;
    if (j.contains("command") && j["command"] != command) {
        throw ConfigError("config is for command '" + j["command"].dump() + "', not '" + command + "'");
    }

    const std::string kind = j.value("kind", std::string("rational"));
    if (kind == "elliptic") {
        const cplx tau = j.contains("tau") ? complex_value(j["tau"], "tau") : cplx{0.0, 1.0};
        if (!(tau.imag() > 0.0)) {
            throw ConfigError("tau must have positive imaginary part");
        }
        sc.kind = KernelKind::elliptic(tau);
    } else if (kind == "hyperbolic") {
        sc.kind = KernelKind::hyperbolic();
    } else if (kind == "rational") {
        sc.kind = KernelKind::rational();
    } else {
        throw ConfigError("kind must be elliptic, hyperbolic or rational");
    }
    if (j.contains("tau") && kind != "elliptic") {
        throw ConfigError("tau only applies to the elliptic kind");
    }

    if (!j.contains("q0") || !j.contains("mu0") || !j.contains("eta")) {
        throw ConfigError("q0, mu0 and eta are required");
    }
    sc.q0 = complex_list(j["q0"], "q0");
    sc.mu0 = complex_list(j["mu0"], "mu0");
    sc.eta = complex_value(j["eta"], "eta");
    if (j.contains("N") && (!j["N"].is_number_unsigned() || j["N"].get<std::size_t>() != sc.q0.size())) {
        throw ConfigError("N does not match the length of q0");
    }
    if (j.contains("M") && (!j["M"].is_number_unsigned() || j["M"].get<std::size_t>() != sc.mu0.size())) {
        throw ConfigError("M does not match the length of mu0");
    }
    if (j.contains("nu")) {
        sc.nu = complex_value(j["nu"], "nu");
    }
    if (j.contains("g")) {
        sc.g = complex_value(j["g"], "g");
    }
    if (j.contains("form")) {
        const json &f = j["form"];
        if (f == "theta_quotient") {
            sc.form = FlowForm::ThetaQuotient;
        } else if (f == "phi_product") {
            sc.form = FlowForm::PhiProduct;
        } else {
            throw ConfigError("form must be theta_quotient or phi_product");
        }
    }
    auto real_key = [&](const char *key, double &dst) {
        if (j.contains(key)) {
            dst = finite_number(j[key], key);
        }
    };
    real_key("t_end", sc.t_end);
    real_key("rel_tol", sc.rel_tol);
    real_key("abs_tol", sc.abs_tol);
    real_key("record_dt", sc.record_dt);
    if (j.contains("samples")) {
        if (!j["samples"].is_number_integer()) {
            throw ConfigError("samples must be an integer");
        }
        sc.samples = j["samples"].get<int>();
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) {
            throw ConfigError("seed must be a non-negative integer");
        }
        sc.seed = j["seed"].get<std::uint64_t>();
    }
    validate_for_command(sc);
    return sc;
}

namespace
{

// --- reporting ------------------------------------------------------------------

struct Checks {
    json list = json::array();
    bool all_passed = true;

    void below(const std::string &name, double residual, double tolerance)
    {
        const bool ok = residual < tolerance;
        list.push_back({{"name", name}, {"residual", residual}, {"tolerance", tolerance}, {"passed", ok}});
        all_passed = all_passed && ok;
    }
    void above(const std::string &name, double value, double threshold)
    {
        const bool ok = value > threshold;
        list.push_back({{"name", name}, {"value", value}, {"threshold", threshold}, {"passed", ok}});
        all_passed = all_passed && ok;
    }
    void within(const std::string &name, double value, double lo, double hi)
    {
        const bool ok = value >= lo && value <= hi;
        list.push_back({{"name", name}, {"value", value}, {"range", {lo, hi}}, {"passed", ok}});
        all_passed = all_passed && ok;
    }
};

json to_json(cplx z)
{
    return json::array({z.real(), z.imag()});
}

json complex_array(const std::vector<cplx> &v)
{
    json out = json::array();
    for (const cplx z : v) {
        out.push_back(to_json(z));
    }
    return out;
}

json scenario_json(const Scenario &sc)
{
    json j;
    j["command"] = sc.command;
    j["kind"] = to_string(sc.kind.type());
    if (sc.kind.is_elliptic()) {
        j["tau"] = to_json(sc.kind.params().tau);
    }
    j["N"] = sc.q0.size();
    j["M"] = sc.mu0.size();
    j["eta"] = to_json(sc.eta);
    j["form"] = to_string(sc.form);
    j["seed"] = sc.seed;
    return j;
}

void write_text(const std::filesystem::path &path, const std::string &text)
{
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
}

void append_complex(std::string &line, cplx z)
{
    line += ',' + format_number(z.real()) + ',' + format_number(z.imag());
}

std::string trajectory_csv(const Trajectory &traj)
{
    const SelfDualState &s0 = traj.states.front();
    std::string out = "t";
    for (std::size_t k = 0; k < s0.n(); ++k) {
        out += ",q_" + std::to_string(k) + "_re,q_" + std::to_string(k) + "_im";
    }
    for (std::size_t a = 0; a < s0.m(); ++a) {
        out += ",mu_" + std::to_string(a) + "_re,mu_" + std::to_string(a) + "_im";
    }
    out += '\n';
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        std::string line = format_number(traj.times[i]);
        for (const cplx z : traj.states[i].q) {
            append_complex(line, z);
        }
        for (const cplx z : traj.states[i].mu) {
            append_complex(line, z);
        }
        out += line + '\n';
    }
    return out;
}

json termination_json(const Trajectory &traj)
{
    json j;
    j["status"] = to_string(traj.termination.status);
    j["time"] = traj.termination.time;
    if (traj.termination.pair) {
        j["pair"] = {traj.termination.pair->first, traj.termination.pair->second};
    }
    j["accepted_steps"] = traj.step_stats.accepted;
    j["rejected_steps"] = traj.step_stats.rejected;
    return j;
}

double velocity_scale(const SelfDualState &s)
{
    const Velocities v = selfdual_velocity(s, FlowForm::PhiProduct);
    double total = 1.0;
    for (const cplx z : v.qdot) {
        total += std::abs(z);
    }
    for (const cplx z : v.mudot) {
        total += std::abs(z);
    }
    return total;
}

int exit_for(const Checks &checks, const Trajectory *traj)
{
    if (traj && traj->termination.status == TerminationStatus::CollisionAbort) {
        return Collision;
    }
    if (traj && traj->termination.status != TerminationStatus::Completed) {
        return CheckFailure;
    }
    return checks.all_passed ? Ok : CheckFailure;
}

// --- commands -------------------------------------------------------------------

Trajectory run_trajectory(const Scenario &sc)
{
    IntegrateOptions opt;
    opt.record_dt = sc.record_dt;
    return integrate(sc.state(), sc.form, sc.t_end, sc.rel_tol, sc.abs_tol, opt);
}

int simulate(const Scenario &sc, const std::filesystem::path &out, json &report)
{
    const Trajectory traj = run_trajectory(sc);
    write_text(out / "trajectory.csv", trajectory_csv(traj));
    report["termination"] = termination_json(traj);
    Checks checks;
    if (traj.termination.status == TerminationStatus::Completed && sc.record_dt > 0.0 && traj.times.size() >= 5) {
        checks.below("flow_consistency", flow_consistency_residual(traj, sc.form), 1e-6);
    }
    const SelfDualState &last = traj.states.back();
    if (last.n() == last.m() && traj.termination.status == TerminationStatus::Completed) {
        checks.below("velocity_sum_final_relative", std::abs(velocity_sum_residual(last)) / velocity_scale(last),
                     1e-10);
    }
    report["checks"] = checks.list;
    report["passed"] = checks.all_passed && traj.termination.status == TerminationStatus::Completed;
    return exit_for(checks, &traj);
}

int verify_identities(const Scenario &sc, json &report)
{
    const KernelKind &kind = sc.kind;
    const double tol = kind.is_elliptic() ? 1e-10 : 1e-13;
    Sampler smp(sc.seed);
    Checks checks;

    double fay = 0.0;
    for (int done = 0; done < sc.samples;) {
        const auto p = smp.generic_points(2, kind, 0.1);
        const auto r = smp.generic_points(2, kind, 0.1);
        if (pole_proximity(p[0] - p[1], kind) < 0.1 || pole_proximity(r[0] + r[1], kind) < 0.1) {
            continue;
        }
        fay = std::max(fay, std::abs(fay_residual(p[0], p[1], r[0], r[1], kind)));
        ++done;
    }
    checks.below("fay_max_residual", fay, tol);

    double higher = 0.0;
    for (int done = 0; done < sc.samples;) {
        const std::size_t n = 2 + static_cast<std::size_t>(done % 5);
        const auto xs = smp.generic_points(n, kind, 0.1);
        const auto ys = smp.generic_points(n, kind, 0.1);
        cplx total = 0.0;
        for (const cplx y : ys) {
            total += y;
        }
        if (pole_proximity(total, kind) < 0.1) {
            continue;
        }
        higher = std::max(higher, std::abs(higher_fay_residual(xs, ys, kind)) / higher_fay_scale(xs, ys, kind));
        ++done;
    }
    checks.below("higher_fay_max_relative_residual", higher, tol);

    const SelfDualState st = sc.state();
    if (st.n() == st.m()) {
        const double scale = velocity_scale(st);
        checks.below("velocity_sum_relative", std::abs(velocity_sum_residual(st)) / scale, 1e-10);
        double deriv = 0.0;
        for (std::size_t i = 0; i < st.n(); ++i) {
            deriv = std::max(deriv, std::abs(derivative_identity_residual(st, i)) / scale);
        }
        checks.below("derivative_identity_relative", deriv, 1e-9);

        double random_sum = 0.0;
        for (int t = 0; t < sc.samples; ++t) {
            const auto pts = smp.generic_points(2 * st.n(), kind, 0.1);
            const SelfDualState r{{pts.begin(), pts.begin() + st.n()}, {pts.begin() + st.n(), pts.end()}, st.eta, kind};
            random_sum = std::max(random_sum, std::abs(velocity_sum_residual(r)) / velocity_scale(r));
        }
        checks.below("velocity_sum_random_max_relative", random_sum, 1e-10);
    }
    report["checks"] = checks.list;
    report["passed"] = checks.all_passed;
    return exit_for(checks, nullptr);
}

int lax_spectrum(const Scenario &sc, const std::filesystem::path &out, json &report)
{
    const Trajectory traj = run_trajectory(sc);
    const std::size_t n = sc.q0.size();
    std::string csv = "t";
    for (std::size_t k = 0; k <= n; ++k) {
        csv += ",c_" + std::to_string(k) + "_re,c_" + std::to_string(k) + "_im";
    }
    csv += '\n';
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        std::string line = format_number(traj.times[i]);
        for (const cplx c : char_poly(build_lax(traj.states[i], sc.g).L)) {
            append_complex(line, c);
        }
        csv += line + '\n';
    }
    write_text(out / "spectrum.csv", csv);
    report["termination"] = termination_json(traj);

    Checks checks;
    const LaxPair p0 = build_lax(traj.states.front(), sc.g);
    report["lax_kind"] = to_string(p0.kind);
    const bool square_enough = p0.kind == LaxKind::Rational || sc.q0.size() >= sc.mu0.size();
    if (square_enough) {
        Sampler smp(sc.seed);
        double worst = 0.0;
        for (int t = 0; t < sc.samples; ++t) {
            const cplx lambda{smp.uniform(-3.0, 3.0), smp.uniform(-3.0, 3.0)};
            const cplx lhs = det(p0.L - lambda * CMatrix::Identity(static_cast<long>(n), static_cast<long>(n)));
            worst = std::max(worst, std::abs(det_identity_residual(p0, lambda)) / std::max(1.0, std::abs(lhs)));
        }
        checks.below("det_identity_max_relative", worst, 1e-9);
        if (traj.termination.status == TerminationStatus::Completed) {
            const SpectralReport rep = spectral_drift(traj, sc.g);
            checks.below("spectral_drift_relative", rep.drift, 1e-8);
            checks.below("shared_spectrum_relative", rep.shared_residual, 1e-8);
        }
    }
    report["checks"] = checks.list;
    report["passed"] = checks.all_passed && traj.termination.status == TerminationStatus::Completed;
    return exit_for(checks, &traj);
}

// A probe point away from every pole of f and of its eta-shifted copies.
cplx ilw_probe(Sampler &smp, const SelfDualState &st)
{
    std::vector<cplx> avoid;
    for (const cplx q : st.q) {
        avoid.insert(avoid.end(), {q, q - st.eta, q + st.eta});
    }
    for (const cplx m : st.mu) {
        avoid.insert(avoid.end(), {m, m + st.eta, m - st.eta});
    }
    for (int attempt = 0; attempt < 100000; ++attempt) {
        const cplx z = smp.cell_point(st.kind);
        const bool ok = std::all_of(avoid.begin(), avoid.end(),
                                    [&](cplx a) { return pole_proximity(z - a, st.kind) > 0.1; });
        if (ok) {
            return z;
        }
    }
    throw Error(ErrorKind::DegenerateInput, "no probe point away from the poles");
}

int ilw_residual_command(const Scenario &sc, json &report)
{
    const SelfDualState st = sc.state();
    const PoleField field = pole_field_from_state(st, sc.form);
    const Velocities v = selfdual_velocity(st, sc.form);
    Velocities perturbed = v;
    perturbed.qdot[0] *= 1.01;
    Sampler smp(sc.seed);
    double worst = 0.0;
    double weakest = std::numeric_limits<double>::infinity();
    for (int i = 0; i < sc.samples; ++i) {
        const cplx z = ilw_probe(smp, st);
        worst = std::max(worst, std::abs(ilw_residual(field, v, z)));
        weakest = std::min(weakest, std::abs(ilw_residual(field, perturbed, z)));
    }
    report["f0"] = to_json(field.f0);
    report["res_q"] = complex_array(field.res_q);
    report["res_mu"] = complex_array(field.res_mu);
    report["max_residual"] = worst;
    Checks checks;
    checks.below("max_residual", worst, 1e-9);
    checks.above("perturbed_min_residual", weakest, 1e-4);
    report["checks"] = checks.list;
    report["passed"] = checks.all_passed;
    return exit_for(checks, nullptr);
}

int limits(const Scenario &sc, json &report)
{
    const SelfDualState st = sc.state();
    Checks checks;
    if (st.n() == st.m()) {
        const double r3 = nonrelativistic_limit_residual(st, sc.nu, 1e3);
        const double r4 = nonrelativistic_limit_residual(st, sc.nu, 1e4);
        checks.within("nonrelativistic_ratio", r3 / r4, 8.0, 12.0);
    }
    if (sc.kind.type() == KernelType::Rational) {
        const double r3 = dimensional_reduction_residual(st, 1e3);
        const double r4 = dimensional_reduction_residual(st, 1e4);
        checks.within("dimensional_reduction_ratio", r3 / r4, 8.0, 12.0);
    } else if (sc.kind.type() == KernelType::Hyperbolic) {
        checks.below("dimensional_reduction_far", dimensional_reduction_residual(st, 30.0), 1e-10);
    }
    checks.within("kdv_ratio", kdv_multiplier_residual(1e-2, 0.5, 4) / kdv_multiplier_residual(1e-3, 0.5, 4), 900.0,
                  1100.0);
    checks.below("kdv_residual", kdv_multiplier_residual(1e-3, 0.5, 2), 1e-7);
    checks.below("hyperbolic_kernel", hyperbolic_kernel_limit_residual(0.3, 1.0, 20.0), 1e-10);
    double bo = 0.0;
    for (int n = -8; n <= 8; ++n) {
        if (n != 0) {
            bo = std::max(bo, std::abs(ilw_multiplier(n, 50.0, 0.5) - cplx{0.0, n > 0 ? 1.0 : -1.0}));
        }
    }
    checks.below("benjamin_ono_multiplier", bo, 1e-12);

    Sampler smp(sc.seed);
    PeriodicSignal sig;
    for (int n = 1; n <= 5; ++n) {
        const cplx c{smp.uniform(-1.0, 1.0), smp.uniform(-1.0, 1.0)};
        sig.coeffs[n] = c;
        sig.coeffs[-n] = std::conj(c);
    }
    const PeriodicSignal a = apply_T_fourier(sig), b = apply_T_kernel(sig, 512);
    double diff = 0.0;
    for (const auto &[n, c] : a.coeffs) {
        diff = std::max(diff, std::abs(c - b.coeffs.at(n)));
    }
    checks.below("kernel_vs_fourier", diff, 1e-8);
    report["checks"] = checks.list;
    report["passed"] = checks.all_passed;
    return exit_for(checks, nullptr);
}

} // namespace

int run(const std::string &command, const std::string &config_path, const std::string &out_dir,
        std::optional<std::uint64_t> seed, std::ostream &err)
{
    Scenario sc;
    try {
        std::ifstream in(config_path, std::ios::binary);
        if (!in) {
            throw ConfigError("cannot read " + config_path);
        }
        std::ostringstream text;
        text << in.rdbuf();
        sc = parse_scenario(text.str(), command);
        if (seed) {
            sc.seed = *seed;
        }
    } catch (const ConfigError &e) {
        err << "config error: " << e.what() << '\n';
        return ConfigFailure;
    } catch (const Error &e) {
        err << "config error: " << e.what() << '\n';
        return ConfigFailure;
    }

    const std::filesystem::path out(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) {
        err << "cannot create " << out_dir << ": " << ec.message() << '\n';
        return ConfigFailure;
    }

    json report;
    report["scenario"] = scenario_json(sc);
    int code = Ok;
    try {
        if (command == "simulate") {
            code = simulate(sc, out, report);
        } else if (command == "verify-identities") {
            code = verify_identities(sc, report);
        } else if (command == "lax-spectrum") {
            code = lax_spectrum(sc, out, report);
        } else if (command == "ilw-residual") {
            code = ilw_residual_command(sc, report);
        } else {
            code = limits(sc, report);
        }
    } catch (const Error &e) {
        err << "run failed: " << e.what() << '\n';
        report["error"] = e.what();
        report["passed"] = false;
        code = CheckFailure;
    }
    report["exit_code"] = code;
    try {
        write_text(out / "report.json", report.dump(2) + '\n');
    } catch (const std::exception &e) {
        err << e.what() << '\n';
        return CheckFailure;
    }
    if (code == Collision) {
        err << "integration stopped on a collision\n";
    } else if (code == CheckFailure) {
        err << "one or more checks failed; see report.json\n";
    }
    return code;
}

} // namespace rsdual::cli
