#include <cstdint>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "rsdual/cli.hpp"

int main(int argc, char **argv)
{
    CLI::App app{"self-dual many-body flows: integration and identity checks"};
    std::string command, config, out;
    std::uint64_t seed = 0;
    app.add_option("command", command, "what to run")->required()->check(CLI::IsMember(rsdual::cli::commands()));
    app.add_option("--config", config, "scenario JSON")->required();
    app.add_option("--out", out, "output directory")->required();
    auto *seed_opt = app.add_option("--seed", seed, "overrides the seed in the config");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : rsdual::cli::ConfigFailure;
    }
    std::optional<std::uint64_t> override;
    if (*seed_opt) {
        override = seed;
    }
    return rsdual::cli::run(command, config, out, override, std::cerr);
}
