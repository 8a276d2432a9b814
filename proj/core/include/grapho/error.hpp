#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace grapho {

class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message, std::optional<std::size_t> line = std::nullopt)
        : std::runtime_error(code + ": " + message), code_(std::move(code)), line_(line) {}

    const std::string& code() const noexcept { return code_; }
    std::optional<std::size_t> line() const noexcept { return line_; }

private:
    std::string code_;
    std::optional<std::size_t> line_;
};

}  // namespace grapho
