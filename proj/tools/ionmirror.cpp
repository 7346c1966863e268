#include "ionmirror/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

int main(int argc, char** argv)
{
    CLI::App app{"Steady-state fluorescence of a Ba+ ion in front of a mirror"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "key = value configuration file");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "random seed (overrides the config)");
    app.add_option("--set", overrides, "override, key=value (repeatable)");

    for (const auto& name : ionmirror::command_names())
        app.add_subcommand(name)->fallthrough();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        return app.exit(e) == 0 ? 0 : 1;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try
    {
        auto config = config_path.empty() ? ionmirror::parse_config("", "<defaults>", overrides)
                                          : ionmirror::load_config(config_path, overrides);
        if (seed)
            config.seed = *seed;
        for (const auto& path : ionmirror::run_command(command, config, out_dir))
            std::cout << path.string() << '\n';
    }
    catch (const std::exception& e)
    {
        std::cerr << ionmirror::error_line(e) << '\n';
        return ionmirror::exit_code_for(e);
    }
    return 0;
}
