#pragma once

#include <stdexcept>
#include <string>

namespace boxmatch {

// Bad user input (files, configs, CLI values). The CLI maps this to exit code 1;
// any other exception is treated as an internal error (exit code 2).
struct InputError : std::runtime_error {
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace boxmatch
