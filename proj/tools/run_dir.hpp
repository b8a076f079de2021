#ifndef GSAE_TOOLS_RUN_DIR_HPP
#define GSAE_TOOLS_RUN_DIR_HPP

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace gsae::cli {

inline constexpr int manifest_schema_version = 1;

/**
 * One configurable key of a subcommand. Keys without a default are optional unless `required`.
 */
struct KeySpec {
    std::string name;
    std::optional<std::string> fallback;
    std::string help;
    bool required = false;
};

/// Parse `key = value` lines; blank lines and lines starting with `#` are ignored.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/**
 * Resolved string settings of one run with typed accessors. Accessors throw a config error on malformed values.
 */
class Settings {
public:
    Settings() = default;
    explicit Settings(std::map<std::string, std::string> values) : my_values(std::move(values)) {}

    bool has(const std::string& key) const { return my_values.count(key) > 0; }
    std::string text(const std::string& key) const;
    std::optional<std::string> maybe(const std::string& key) const;
    double real(const std::string& key) const;
    std::int64_t integer(const std::string& key) const;
    std::size_t count(const std::string& key) const;
    std::uint64_t u64(const std::string& key) const;
    bool flag(const std::string& key) const;
    std::filesystem::path path(const std::string& key) const;

    void set(const std::string& key, std::string value) { my_values[key] = std::move(value); }
    const std::map<std::string, std::string>& values() const { return my_values; }

private:
    std::map<std::string, std::string> my_values;
};

/**
 * Defaults, then the config file, then command-line flags. Unknown file keys and missing required keys are config errors.
 */
Settings resolve_settings(const std::vector<KeySpec>& keys, const std::map<std::string, std::string>& file_values, const std::map<std::string, std::string>& flag_values);

std::string sha256_file(const std::filesystem::path& path);

/**
 * Output directory of one run: holds a lock file while the run is active, tracks every artifact it writes,
 * and either finishes with a manifest or removes its partial outputs.
 */
class RunDirectory {
public:
    RunDirectory(std::filesystem::path root, std::string command);
    ~RunDirectory();

    RunDirectory(const RunDirectory&) = delete;
    RunDirectory& operator=(const RunDirectory&) = delete;

    const std::filesystem::path& root() const { return my_root; }

    /// Path of a new artifact; it is removed again if the run fails.
    std::filesystem::path artifact(const std::string& name);
    void add_input(const std::filesystem::path& path);
    void note(const std::string& key, nlohmann::json value) { my_notes[key] = std::move(value); }

    /// Write `config.txt` and `manifest.json`, then release the lock.
    void finish(const Settings& settings);
    /// Remove every artifact written so far, then release the lock.
    void abandon();

private:
    void release();

    std::filesystem::path my_root;
    std::string my_command;
    bool my_created_root = false;
    bool my_locked = false;
    bool my_done = false;
    std::vector<std::filesystem::path> my_artifacts;
    std::vector<std::filesystem::path> my_inputs;
    nlohmann::json my_notes = nlohmann::json::object();
    std::chrono::steady_clock::time_point my_start;
};

}

#endif
