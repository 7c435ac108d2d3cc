#pragma once

#include <stdexcept>
#include <string>

namespace stitch3d {

enum class ErrorCode {
    io,             // file could not be read or written
    parse,          // malformed input (JSON, base64, payload sizes)
    invalid,        // argument or invariant violation
    solve,          // every candidate evaluation failed
    eval,           // evaluation precondition violated (e.g. empty ground truth)
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

[[noreturn]] inline void fail_invalid(const std::string& message) {
    throw Error(ErrorCode::invalid, message);
}

[[noreturn]] inline void fail_parse(const std::string& message) {
    throw Error(ErrorCode::parse, message);
}

[[noreturn]] inline void fail_io(const std::string& message) {
    throw Error(ErrorCode::io, message);
}

}  // namespace stitch3d
