#pragma once

#include <synchro80/core.hpp>

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace synchro80
{
/**
 * Launch configuration read from a `key = value` text file. Keys are the
 * BackendConfig fields plus `driver` and `driver.<param>`; `#` starts a
 * comment. Required: segment_id, ndof, frequency_hz, mode, driver.
 */
struct LaunchConfig
{
    BackendConfig backend;
    std::string driver;
    std::vector<std::pair<std::string, std::string>> driver_params;
};

/// Throws Error(BadConfig) whose message starts with the offending key.
LaunchConfig parse_launch_config(const std::string &text);
LaunchConfig load_launch_config(const std::filesystem::path &path);

}  // namespace synchro80
