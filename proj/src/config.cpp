#include "eulab/config.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

#include "eulab/errors.hpp"

namespace eulab {

using nlohmann::json;

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
}

void apply_override(json& config, const std::string& spec) {
  const std::size_t eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override \"" + spec + "\" is not of the form key.path=value");
  }
  const std::string path = spec.substr(0, eq);
  const std::string raw = spec.substr(eq + 1);

  json* node = &config;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (key.empty()) throw ConfigError("override \"" + spec + "\" has an empty key");
    if (dot == std::string::npos) {
      json value = json::parse(raw, nullptr, false);
      (*node)[key] = value.is_discarded() ? json(raw) : value;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

void require_keys(const json& obj, const std::vector<std::string>& allowed,
                  const std::string& context) {
  if (!obj.is_object()) throw ConfigError("config: " + context + " must be an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const std::string& key : allowed) {
      if (item.key() == key) known = true;
    }
    if (!known) {
      throw ConfigError("config: unknown key \"" + item.key() + "\" in " + context);
    }
  }
}

std::string canonical_dump(const json& config) { return config.dump(2); }

std::string config_hash(const json& config) {
  const std::string text = canonical_dump(config);
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (const char c : text) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001B3ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << hash;
  return os.str();
}

}  // namespace eulab
