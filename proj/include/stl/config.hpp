#pragma once

#include "json.hpp"
#include <string>

#include "stl/problem.hpp"

namespace stl {

using Json = nlohmann::json;

// Parsed run configuration. A TOML subset (tables, dotted keys, strings,
// numbers, booleans, arrays, inline tables) is read into a JSON tree.
struct Config {
    Json root = Json::object();
    std::string source = "<string>";

    // FNV-1a over the canonical (key-sorted) dump; stable under key reordering
    std::string digest() const;
    bool has(const std::string& section) const;
    const Json& section(const std::string& name) const;  // Config error naming the section when absent
    const Json* find(const std::string& section) const;
};

Config parse_config(const std::string& text, const std::string& source = "<string>");
Config load_config(const std::string& path);

std::string fnv1a_hex(const std::string& data);

// typed lookups with Config errors that name the offending key
double get_number(const Json& obj, const std::string& key, const std::string& where);
double get_number(const Json& obj, const std::string& key, double fallback);
int get_int(const Json& obj, const std::string& key, int fallback);
std::string get_string(const Json& obj, const std::string& key, const std::string& fallback);
bool get_bool(const Json& obj, const std::string& key, bool fallback);
Vec get_vec(const Json& obj, const std::string& key, const Vec& fallback);

Potential potential_from_json(const Json& j, int dim, const std::string& where);
CostSpec cost_from_config(const Config& cfg);
SpaceTimeGrid grid_from_config(const Config& cfg, const CostSpec& spec);

}  // namespace stl
