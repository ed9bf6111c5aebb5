// This file is part of esp-router, released under the Apache-2.0 license.
// See LICENSE for details.

#pragma once

#include <cstdint>
#include <string>

namespace espr {

/// splitmix64 step; used to derive independent RNG streams from one seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t counter);

/// Hex-encoded SHA-256 digest.
std::string sha256_hex(const std::string& data);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& data);

enum class LogLevel : int { None = 0, Error = 1, Warn = 2, Info = 3, Debug = 4 };

/// Level comes from ESP_ROUTER_LOG (error|warn|info|debug); default warn.
LogLevel log_level();
void log_msg(LogLevel level, const std::string& msg);

}  // namespace espr
