#pragma once
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ipd {

// Flat key=value text. '#' starts a comment; blank lines are ignored.
class Config {
public:
    static Config parse(const std::string& text);
    static Config load(const std::string& path);

    bool has(const std::string& k) const { return values_.count(k) > 0; }
    void set(const std::string& k, const std::string& v) { values_[k] = v; }
    std::string get(const std::string& k, const std::string& def) const;
    double get_double(const std::string& k, double def) const;
    int64_t get_int(const std::string& k, int64_t def) const;
    bool get_bool(const std::string& k, bool def) const;
    std::vector<double> get_list(const std::string& k, const std::vector<double>& def) const;
    const std::map<std::string, std::string>& values() const { return values_; }
    // Keys that were never read; reported as configuration errors.
    std::vector<std::string> unused() const;

private:
    std::map<std::string, std::string> values_;
    mutable std::map<std::string, bool> read_;
};

std::vector<double> parse_list(const std::string& s);

}  // namespace ipd
