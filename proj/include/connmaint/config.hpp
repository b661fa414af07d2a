#pragma once

// Scenario configuration files: one `dotted.key = value` per line, `#`
// starts a comment, lists are comma-separated. Unknown keys, malformed
// values and out-of-range values are rejected with a message naming the key.
// The full key table lives in docs/config.md.

#include "connmaint/engine.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace connmaint {

// Parses `text`, then applies `overrides` (each "key=value") on top.
ScenarioConfig parse_config_text(const std::string& text,
                                 const std::vector<std::string>& overrides = {});
ScenarioConfig parse_config(const std::filesystem::path& path,
                            const std::vector<std::string>& overrides = {});

// Every key with its effective value; parse_config_text() reads it back.
std::string format_config(const ScenarioConfig& config);

std::vector<std::string> config_keys();

// Comma-separated lists, e.g. "0,0.05,0.1" or "1,2,3". A single "a:b:c"
// item expands to a, a+c, ... up to b (inclusive within 1e-9).
std::vector<double> parse_double_list(const std::string& text, const std::string& what);
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace connmaint
