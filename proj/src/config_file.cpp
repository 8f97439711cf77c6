#include <synchro80/config_file.hpp>
#include <synchro80/errors.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace synchro80
{
namespace
{
std::string trim(const std::string &s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos)
    {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void bad(const std::string &key, const std::string &why)
{
    throw Error(ErrorCode::BadConfig, key + ": " + why);
}

std::uint32_t parse_u32(const std::string &key, const std::string &value)
{
    std::uint32_t v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size())
    {
        bad(key, "expected a non-negative integer, got '" + value + "'");
    }
    return v;
}

double parse_positive_real(const std::string &key, const std::string &value)
{
    try
    {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used == value.size() && std::isfinite(v) && v > 0.0)
        {
            return v;
        }
    }
    catch (const std::exception &)
    {
    }
    bad(key, "expected a positive number, got '" + value + "'");
}
}  // namespace

LaunchConfig parse_launch_config(const std::string &text)
{
    LaunchConfig cfg;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
        {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty())
        {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
        {
            bad("line " + std::to_string(line_no), "expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!seen.insert(key).second)
        {
            bad(key, "duplicate key");
        }

        if (key == "segment_id")
            cfg.backend.segment_id = value;
        else if (key == "ndof")
            cfg.backend.ndof = parse_u32(key, value);
        else if (key == "frequency_hz")
            cfg.backend.frequency_hz = parse_positive_real(key, value);
        else if (key == "mode")
        {
            if (value == "normal")
                cfg.backend.mode = SyncMode::NORMAL;
            else if (value == "bursting")
                cfg.backend.mode = SyncMode::BURSTING;
            else
                bad(key, "expected 'normal' or 'bursting', got '" + value + "'");
        }
        else if (key == "history_capacity")
            cfg.backend.history_capacity = parse_u32(key, value);
        else if (key == "payload_capacity")
            cfg.backend.payload_capacity = parse_u32(key, value);
        else if (key == "command_ring_capacity")
            cfg.backend.command_ring_capacity = parse_u32(key, value);
        else if (key == "driver")
            cfg.driver = value;
        else if (key.starts_with("driver.") && key.size() > 7)
            cfg.driver_params.emplace_back(key.substr(7), value);
        else
            bad(key, "unknown key");
    }
    for (const char *required : {"segment_id", "ndof", "frequency_hz", "mode", "driver"})
    {
        if (!seen.contains(required))
        {
            bad(required, "missing");
        }
    }
    try
    {
        validate_config(cfg.backend);
    }
    catch (const Error &e)
    {
        // validate_config messages name the field already
        throw Error(ErrorCode::BadConfig,
                    std::string(e.what()).substr(std::string("BadConfig: ").size()));
    }
    return cfg;
}

LaunchConfig load_launch_config(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw Error(ErrorCode::BadConfig, path.string() + ": cannot open");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_launch_config(text.str());
}

}  // namespace synchro80
