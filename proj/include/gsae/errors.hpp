#ifndef GSAE_ERRORS_HPP
#define GSAE_ERRORS_HPP

#include <stdexcept>
#include <string>

/**
 * @file errors.hpp
 * @brief Exception types thrown by the library.
 */

namespace gsae {

/**
 * Category of a library error.
 * The CLI maps every category to a nonzero exit code; tests match on the category.
 */
enum class ErrorKind {
    parse,
    domain,
    duplicate,
    empty_result,
    alignment,
    consistency,
    shape,
    config,
    degenerate,
    undefined_test,
    training,
    io
};

inline const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::parse: return "parse";
        case ErrorKind::domain: return "domain";
        case ErrorKind::duplicate: return "duplicate";
        case ErrorKind::empty_result: return "empty-result";
        case ErrorKind::alignment: return "alignment";
        case ErrorKind::consistency: return "consistency";
        case ErrorKind::shape: return "shape";
        case ErrorKind::config: return "config";
        case ErrorKind::degenerate: return "degenerate";
        case ErrorKind::undefined_test: return "undefined-test";
        case ErrorKind::training: return "training";
        case ErrorKind::io: return "io";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message) :
        std::runtime_error(std::string(error_kind_name(kind)) + " error: " + message), my_kind(kind) {}

    ErrorKind kind() const { return my_kind; }

private:
    ErrorKind my_kind;
};

}

#endif
