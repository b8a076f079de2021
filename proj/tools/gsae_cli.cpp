#include "commands.hpp"
#include "run_dir.hpp"

#include "gsae/errors.hpp"

#include "CLI11.hpp"

#include <Eigen/Core>

#include <iostream>
#include <random>

namespace {

std::uint64_t entropy_seed() {
    std::random_device device;
    return (static_cast<std::uint64_t>(device()) << 32) ^ static_cast<std::uint64_t>(device());
}

}

int main(int argc, char** argv) {
    using namespace gsae::cli;

    CLI::App app{"gsae: gene superset autoencoder"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir = ".";
    std::map<std::string, std::string> flags;
    app.add_option("--config", config_path, "key = value config file (flags override it)");
    app.add_option("--out", out_dir, "output directory");
    app.add_option_function<std::string>("--seed", [&](const std::string& v) { flags["seed"] = v; }, "64-bit seed");
    app.add_option_function<std::string>("--threads", [&](const std::string& v) { flags["threads"] = v; }, "worker threads");
    app.add_flag_callback("--float32", [&] { flags["float32"] = "true"; }, "single-precision parameter storage");

    const auto& table = commands();
    const Command* chosen = nullptr;
    for (const auto& command : table) {
        auto* sub = app.add_subcommand(command.name, command.help);
        for (const auto& key : command.keys) {
            if (key.name == "seed" || key.name == "threads" || key.name == "float32") {
                continue;
            }
            std::string help = key.help;
            if (key.fallback) {
                help += " [" + *key.fallback + "]";
            } else if (key.required) {
                help += " (required)";
            }
            const auto name = key.name;
            sub->add_option_function<std::string>("--" + name, [&flags, name](const std::string& v) { flags[name] = v; }, help);
        }
        sub->callback([&chosen, &command] { chosen = &command; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        std::map<std::string, std::string> file_values;
        if (!config_path.empty()) {
            file_values = read_config_file(config_path);
        }
        auto settings = resolve_settings(chosen->keys, file_values, flags);
        if (!settings.maybe("seed")) {
            settings.set("seed", std::to_string(entropy_seed()));
        }
        settings.u64("seed");
        const auto threads = settings.integer("threads");
        if (threads < 1) {
            throw gsae::Error(gsae::ErrorKind::config, "threads must be at least 1");
        }
        Eigen::setNbThreads(static_cast<int>(threads));

        RunDirectory run(out_dir, chosen->name);
        try {
            chosen->run(settings, run);
            run.finish(settings);
        } catch (...) {
            run.abandon();
            throw;
        }
        return 0;
    } catch (const gsae::Error& e) {
        std::cerr << "gsae: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "gsae: unexpected failure: " << e.what() << '\n';
        return 1;
    }
}
