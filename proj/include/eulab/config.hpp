#pragma once

// JSON run configurations: file loading, flat "key.path=value" overrides,
// strict key validation, and canonical snapshots with a stable hash.

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace eulab {

nlohmann::json load_json_file(const std::string& path);

// Apply one override of the form "key.path=value".  The value is parsed as
// JSON when it parses (numbers, booleans, arrays), otherwise as a string.
void apply_override(nlohmann::json& config, const std::string& spec);

// Reject keys outside `allowed`; the error names the offending key.
void require_keys(const nlohmann::json& obj, const std::vector<std::string>& allowed,
                  const std::string& context);

// Sorted-key indented dump; the snapshot and hash input format.
std::string canonical_dump(const nlohmann::json& config);

// FNV-1a (64-bit) of the canonical dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

}  // namespace eulab
