#include "monofbsde/config.hpp"

#include <fstream>
#include <limits>
#include <sstream>

namespace monofbsde {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
    KeyValueConfig config;
    std::string section;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("config line " + std::to_string(line_no) + ": unclosed section");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        config.values_[section.empty() ? key : section + "." + key] = trim(line.substr(eq + 1));
    }
    return config;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse(in);
}

void KeyValueConfig::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like section.key=value: " + assignment);
    values_[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    const auto value = get(key);
    if (!value) return fallback;
    if (*value == "inf" || *value == "+inf") return std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double parsed = std::stod(*value, &used);
        if (used != value->size()) throw std::invalid_argument(*value);
        return parsed;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' is not a number: " + *value);
    }
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const {
    const auto value = get(key);
    if (!value) return fallback;
    try {
        std::size_t used = 0;
        const long long parsed = std::stoll(*value, &used);
        if (used != value->size()) throw std::invalid_argument(*value);
        return parsed;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' is not an integer: " + *value);
    }
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
    const auto value = get(key);
    if (!value) return fallback;
    std::vector<double> out;
    std::stringstream ss(*value);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        KeyValueConfig single;
        single.set(key, trim(cell));
        out.push_back(single.get_double(key, 0.0));
    }
    return out;
}

}  // namespace monofbsde
