#include "netaipw/config.hpp"

#include "netaipw/error.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

namespace netaipw {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
    T value{};
    const char* first = text.data();
    const char* last = first + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) throw Error(ErrorKind::Parse, "key '" + key + "': cannot parse '" + text + "'");
    return value;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
    KeyValueConfig cfg;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::Parse, "line " + std::to_string(number) + ": expected key = value");
        }
        const std::string key = trim(t.substr(0, eq));
        if (key.empty()) throw Error(ErrorKind::Parse, "line " + std::to_string(number) + ": empty key");
        cfg.values_[key] = trim(t.substr(eq + 1));
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open config " + path);
    return parse(in);
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_number<double>(key, it->second);
}

std::size_t KeyValueConfig::get_size(const std::string& key, std::size_t fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_number<std::size_t>(key, it->second);
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_number<std::uint64_t>(key, it->second);
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw Error(ErrorKind::Parse, "key '" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<std::string> KeyValueConfig::get_list(const std::string& key,
                                                  const std::vector<std::string>& fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<std::string> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void KeyValueConfig::require_known(const std::set<std::string>& known) const {
    for (const auto& [key, value] : values_) {
        if (!known.count(key)) throw Error(ErrorKind::Parse, "unknown config key '" + key + "'");
    }
}

}  // namespace netaipw
