#include "run_dir.hpp"

#include "gsae/errors.hpp"
#include "gsae/rng.hpp"
#include "gsae/text.hpp"

#include <openssl/evp.h>

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <memory>

namespace gsae::cli {

namespace {

std::string trim(const std::string& value) {
    const auto first = value.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return "";
    }
    const auto last = value.find_last_not_of(" \t\r");
    return value.substr(first, last - first + 1);
}

const char* lock_name = ".gsae.lock";

}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
    auto input = text::open_input(path);
    std::map<std::string, std::string> output;
    std::string line;
    std::size_t line_number = 0;
    while (text::read_line(input, line)) {
        ++line_number;
        const auto content = trim(line);
        if (content.empty() || content.front() == '#') {
            continue;
        }
        const auto eq = content.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::parse, text::location(path.string(), line_number) + ": expected key = value");
        }
        const auto key = trim(content.substr(0, eq));
        if (key.empty()) {
            throw Error(ErrorKind::parse, text::location(path.string(), line_number) + ": empty key");
        }
        if (output.count(key)) {
            throw Error(ErrorKind::duplicate, text::location(path.string(), line_number) + ": key '" + key + "' given twice");
        }
        output[key] = trim(content.substr(eq + 1));
    }
    return output;
}

std::string Settings::text(const std::string& key) const {
    const auto it = my_values.find(key);
    if (it == my_values.end()) {
        throw Error(ErrorKind::config, "missing setting '" + key + "'");
    }
    return it->second;
}

std::optional<std::string> Settings::maybe(const std::string& key) const {
    const auto it = my_values.find(key);
    if (it == my_values.end() || it->second.empty()) {
        return std::nullopt;
    }
    return it->second;
}

double Settings::real(const std::string& key) const {
    const auto value = text::parse_double(text(key));
    if (!value) {
        throw Error(ErrorKind::config, "setting '" + key + "' must be a number, got '" + text(key) + "'");
    }
    return *value;
}

std::int64_t Settings::integer(const std::string& key) const {
    const auto value = text::parse_int(text(key));
    if (!value) {
        throw Error(ErrorKind::config, "setting '" + key + "' must be an integer, got '" + text(key) + "'");
    }
    return *value;
}

std::size_t Settings::count(const std::string& key) const {
    const auto value = integer(key);
    if (value < 0) {
        throw Error(ErrorKind::config, "setting '" + key + "' must not be negative");
    }
    return static_cast<std::size_t>(value);
}

std::uint64_t Settings::u64(const std::string& key) const {
    const auto raw = text(key);
    std::uint64_t value = 0;
    const auto result = std::from_chars(raw.data(), raw.data() + raw.size(), value);
    if (raw.empty() || result.ec != std::errc() || result.ptr != raw.data() + raw.size()) {
        throw Error(ErrorKind::config, "setting '" + key + "' must be an unsigned 64-bit integer, got '" + raw + "'");
    }
    return value;
}

bool Settings::flag(const std::string& key) const {
    auto value = text(key);
    std::transform(value.begin(), value.end(), value.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (value == "true" || value == "1" || value == "yes" || value == "on") {
        return true;
    }
    if (value == "false" || value == "0" || value == "no" || value == "off") {
        return false;
    }
    throw Error(ErrorKind::config, "setting '" + key + "' must be true or false, got '" + value + "'");
}

std::filesystem::path Settings::path(const std::string& key) const {
    return std::filesystem::path(text(key));
}

Settings resolve_settings(const std::vector<KeySpec>& keys, const std::map<std::string, std::string>& file_values, const std::map<std::string, std::string>& flag_values) {
    std::map<std::string, std::string> values;
    for (const auto& key : keys) {
        if (key.fallback) {
            values[key.name] = *key.fallback;
        }
    }
    auto known = [&](const std::string& name) {
        return std::any_of(keys.begin(), keys.end(), [&](const KeySpec& k) { return k.name == name; });
    };
    for (const auto& [name, value] : file_values) {
        if (!known(name)) {
            throw Error(ErrorKind::config, "unknown config key '" + name + "'");
        }
        values[name] = value;
    }
    for (const auto& [name, value] : flag_values) {
        values[name] = value;
    }
    for (const auto& key : keys) {
        if (key.required && (!values.count(key.name) || values[key.name].empty())) {
            throw Error(ErrorKind::config, "missing required setting '" + key.name + "'");
        }
    }
    return Settings(std::move(values));
}

std::string sha256_file(const std::filesystem::path& path) {
    auto input = text::open_input(path);
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> context(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!context || EVP_DigestInit_ex(context.get(), EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorKind::io, "cannot initialise SHA-256");
    }
    std::array<char, 1 << 16> buffer{};
    while (input) {
        input.read(buffer.data(), buffer.size());
        const auto got = input.gcount();
        if (got > 0) {
            EVP_DigestUpdate(context.get(), buffer.data(), static_cast<std::size_t>(got));
        }
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int length = 0;
    EVP_DigestFinal_ex(context.get(), digest.data(), &length);
    static const char* hex = "0123456789abcdef";
    std::string output;
    for (unsigned int i = 0; i < length; ++i) {
        output += hex[digest[i] >> 4];
        output += hex[digest[i] & 0xf];
    }
    return output;
}

RunDirectory::RunDirectory(std::filesystem::path root, std::string command) :
    my_root(std::move(root)), my_command(std::move(command)), my_start(std::chrono::steady_clock::now()) {
    std::error_code ec;
    if (!std::filesystem::exists(my_root)) {
        my_created_root = std::filesystem::create_directories(my_root, ec);
        if (ec) {
            throw Error(ErrorKind::io, "cannot create output directory '" + my_root.string() + "': " + ec.message());
        }
    } else if (!std::filesystem::is_directory(my_root)) {
        throw Error(ErrorKind::io, "output path '" + my_root.string() + "' is not a directory");
    }
    const auto lock = my_root / lock_name;
    const int fd = ::open(lock.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
        if (my_created_root) {
            std::filesystem::remove(my_root, ec);
        }
        throw Error(ErrorKind::io, "output directory '" + my_root.string() + "' is locked by another run (remove " + lock.string() + " if stale)");
    }
    const auto pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] const auto written = ::write(fd, pid.data(), pid.size());
    ::close(fd);
    my_locked = true;
}

RunDirectory::~RunDirectory() {
    if (!my_done) {
        abandon();
    }
}

std::filesystem::path RunDirectory::artifact(const std::string& name) {
    auto path = my_root / name;
    if (std::find(my_artifacts.begin(), my_artifacts.end(), path) == my_artifacts.end()) {
        my_artifacts.push_back(path);
    }
    return path;
}

void RunDirectory::add_input(const std::filesystem::path& path) {
    my_inputs.push_back(path);
}

void RunDirectory::finish(const Settings& settings) {
    {
        auto output = text::open_output(artifact("config.txt"));
        for (const auto& [key, value] : settings.values()) {
            output << key << " = " << value << "\n";
        }
    }

    nlohmann::json manifest;
    manifest["schema_version"] = manifest_schema_version;
    manifest["command"] = my_command;
    manifest["prng"] = Rng::version;
    manifest["seed"] = settings.text("seed");
    manifest["config"] = settings.values();
    nlohmann::json inputs = nlohmann::json::array();
    for (const auto& path : my_inputs) {
        inputs.push_back({{"path", path.string()}, {"sha256", sha256_file(path)}});
    }
    manifest["inputs"] = std::move(inputs);
    nlohmann::json outputs = nlohmann::json::array();
    for (const auto& path : my_artifacts) {
        outputs.push_back({{"path", path.filename().string()}, {"sha256", sha256_file(path)}});
    }
    manifest["outputs"] = std::move(outputs);
    manifest["results"] = my_notes;
    manifest["wall_time_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - my_start).count();

    const auto path = artifact("manifest.json");
    auto output = text::open_output(path);
    output << manifest.dump(1) << "\n";
    output.close();
    if (!output) {
        throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
    }
    my_done = true;
    release();
}

void RunDirectory::abandon() {
    std::error_code ec;
    for (const auto& path : my_artifacts) {
        std::filesystem::remove(path, ec);
    }
    my_artifacts.clear();
    my_done = true;
    release();
    if (my_created_root && std::filesystem::is_empty(my_root, ec)) {
        std::filesystem::remove(my_root, ec);
    }
}

void RunDirectory::release() {
    if (my_locked) {
        std::error_code ec;
        std::filesystem::remove(my_root / lock_name, ec);
        my_locked = false;
    }
}

}
