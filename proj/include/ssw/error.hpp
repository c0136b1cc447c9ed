#pragma once

#include <stdexcept>
#include <string>

namespace ssw {

// Library-wide failure. `code` is a stable identifier used in reports and
// tests (e.g. "OddPower", "MasterEquationViolated").
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& msg, std::string residual = {})
        : std::runtime_error(code + ": " + msg),
          code_(std::move(code)),
          residual_(std::move(residual)) {}

    const std::string& code() const noexcept { return code_; }
    const std::string& residual() const noexcept { return residual_; }

private:
    std::string code_;
    std::string residual_;
};

class ParseError : public Error {
public:
    ParseError(std::string code, const std::string& msg, std::size_t offset)
        : Error(std::move(code), msg + " at byte " + std::to_string(offset)),
          offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

}  // namespace ssw
