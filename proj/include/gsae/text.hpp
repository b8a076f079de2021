#ifndef GSAE_TEXT_HPP
#define GSAE_TEXT_HPP

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

/**
 * @file text.hpp
 * @brief Small helpers shared by the TSV readers and writers.
 */

namespace gsae::text {

/// Reads one line, dropping a trailing carriage return.
inline bool read_line(std::istream& input, std::string& line) {
    if (!std::getline(input, line)) {
        return false;
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    return true;
}

inline std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find('\t', start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

inline std::optional<double> parse_double(std::string_view field) {
    double value = 0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    if (begin != end && *begin == '+') {
        ++begin;
    }
    auto result = std::from_chars(begin, end, value);
    if (result.ec != std::errc() || result.ptr != end || begin == end) {
        return std::nullopt;
    }
    return value;
}

inline std::optional<std::int64_t> parse_int(std::string_view field) {
    std::int64_t value = 0;
    auto result = std::from_chars(field.data(), field.data() + field.size(), value);
    if (result.ec != std::errc() || result.ptr != field.data() + field.size() || field.empty()) {
        return std::nullopt;
    }
    return value;
}

/// Shortest decimal form that reads back to the same double.
inline std::string format_double(double value) {
    char buffer[64];
    auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, result.ptr);
}

inline std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream input(path, std::ios::binary);
    if (!input) {
        throw Error(ErrorKind::io, "cannot open '" + path.string() + "' for reading");
    }
    return input;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream output(path, std::ios::binary);
    if (!output) {
        throw Error(ErrorKind::io, "cannot open '" + path.string() + "' for writing");
    }
    return output;
}

inline std::string location(const std::string& source, std::size_t line_number) {
    return source + ":" + std::to_string(line_number);
}

}

#endif
