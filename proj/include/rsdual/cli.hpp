#ifndef RSDUAL_CLI_HPP
#define RSDUAL_CLI_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rsdual/dynamics.hpp"

namespace rsdual::cli
{

enum ExitCode : int { Ok = 0, ConfigFailure = 2, Collision = 3, CheckFailure = 4 };

inline const std::vector<std::string> &commands()
{
    static const std::vector<std::string> names{"simulate", "verify-identities", "lax-spectrum", "ilw-residual",
                                                "limits"};
    return names;
}

class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// One scenario file. Keys are listed in README.md.
struct Scenario {
    std::string command;
    KernelKind kind = KernelKind::rational();
    std::vector<cplx> q0;
    std::vector<cplx> mu0;
    cplx eta = 0.0;
    cplx nu = 1.0;
    cplx g = 1.0;
    FlowForm form = FlowForm::ThetaQuotient;
    double t_end = 1.0;
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double record_dt = 0.0;
    int samples = 20;
    std::uint64_t seed = 0;

    SelfDualState state() const { return {q0, mu0, eta, kind}; }
};

/// Parses JSON text. `command` is the command given on the command line; a
/// "command" key in the file, if present, must agree with it.
Scenario parse_scenario(std::string_view text, const std::string &command);

/// Runs one command and writes its outputs into out_dir. Diagnostics go to err.
int run(const std::string &command, const std::string &config_path, const std::string &out_dir,
        std::optional<std::uint64_t> seed, std::ostream &err);

/// 17 significant digits, '.' separator, independent of the locale.
std::string format_number(double x);

} // namespace rsdual::cli

#endif
