#ifndef GSAE_TOOLS_COMMANDS_HPP
#define GSAE_TOOLS_COMMANDS_HPP

#include "run_dir.hpp"

#include <functional>
#include <string>
#include <vector>

namespace gsae::cli {

struct Command {
    std::string name;
    std::string help;
    std::vector<KeySpec> keys;
    std::function<void(const Settings&, RunDirectory&)> run;
};

/// Keys accepted by every subcommand: seed, float32, threads.
std::vector<KeySpec> global_keys();

const std::vector<Command>& commands();

}

#endif
