#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace netaipw {

/// Flat "key = value" document. Blank lines and lines starting with '#' are
/// ignored; later keys override earlier ones.
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::istream& in);
    static KeyValueConfig load(const std::string& path);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::size_t get_size(const std::string& key, std::size_t fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    /// Comma-separated list.
    std::vector<std::string> get_list(const std::string& key, const std::vector<std::string>& fallback) const;

    /// Throws Parse naming the first key outside `known`.
    void require_known(const std::set<std::string>& known) const;

    const std::map<std::string, std::string>& values() const noexcept { return values_; }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace netaipw
