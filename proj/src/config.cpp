#include "ipd/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ipd {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& k, const std::string& v) {
    try {
        size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return d;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: " + k + " is not a number: " + v);
    }
}

}  // namespace

Config Config::parse(const std::string& text) {
    Config c;
    std::istringstream is(text);
    std::string line;
    int no = 0;
    while (std::getline(is, line)) {
        ++no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("config line " + std::to_string(no) + ": missing '='");
        std::string k = trim(line.substr(0, eq));
        if (k.empty()) throw std::invalid_argument("config line " + std::to_string(no) + ": empty key");
        c.values_[k] = trim(line.substr(eq + 1));
    }
    return c;
}

Config Config::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

std::string Config::get(const std::string& k, const std::string& def) const {
    auto it = values_.find(k);
    if (it == values_.end()) return def;
    read_[k] = true;
    return it->second;
}

double Config::get_double(const std::string& k, double def) const {
    return has(k) ? to_double(k, get(k, "")) : def;
}

int64_t Config::get_int(const std::string& k, int64_t def) const {
    if (!has(k)) return def;
    double d = to_double(k, get(k, ""));
    if (d != double(int64_t(d))) throw std::invalid_argument("config: " + k + " must be an integer");
    return int64_t(d);
}

bool Config::get_bool(const std::string& k, bool def) const {
    if (!has(k)) return def;
    std::string v = get(k, "");
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw std::invalid_argument("config: " + k + " must be a boolean");
}

std::vector<double> Config::get_list(const std::string& k, const std::vector<double>& def) const {
    return has(k) ? parse_list(get(k, "")) : def;
}

std::vector<std::string> Config::unused() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
        if (!read_.count(k)) out.push_back(k);
    return out;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(to_double("list", item));
    }
    return out;
}

}  // namespace ipd
