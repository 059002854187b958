#include "oucd/common/config_file.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <sstream>

#include "oucd/common/error.hpp"

namespace oucd {
namespace {

std::pair<std::string, std::string> split_key(std::string_view dotted) {
    const auto dot = dotted.find('.');
    if (dot == std::string_view::npos || dot == 0 || dot + 1 == dotted.size()) {
        throw UsageError("config key '" + std::string(dotted) + "' must look like section.key");
    }
    return {std::string(dotted.substr(0, dot)), std::string(dotted.substr(dot + 1))};
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

template <typename N>
N parse_number(std::string_view key, const std::string& text) {
    N value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        throw UsageError("config key '" + std::string(key) + "': cannot parse '" + text + "'");
    }
    return value;
}

} // namespace

ConfigFile ConfigFile::parse(std::string_view text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in{std::string(text)};
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw UsageError(std::string("config parse error: ") + e.message() + " at line " +
                         std::to_string(e.line()));
    }
    ConfigFile cfg;
    for (const auto& [section, body] : tree) {
        if (body.empty()) {
            throw UsageError("config entry '" + section + "' is outside any [section]");
        }
        for (const auto& [key, value] : body) {
            cfg.sections_[section][key] = trim(value.get_value<std::string>());
        }
    }
    return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read config file " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
}

void ConfigFile::set(std::string_view dotted_key, std::string value) {
    auto [section, key] = split_key(dotted_key);
    sections_[section][key] = trim(value);
}

std::optional<std::string> ConfigFile::get(std::string_view dotted_key) const {
    const auto [section, key] = split_key(dotted_key);
    const auto s = sections_.find(section);
    if (s == sections_.end()) {
        return std::nullopt;
    }
    const auto k = s->second.find(key);
    if (k == s->second.end()) {
        return std::nullopt;
    }
    return k->second;
}

bool ConfigFile::contains(std::string_view dotted_key) const {
    return get(dotted_key).has_value();
}

std::string ConfigFile::get_string(std::string_view key, std::string fallback) const {
    auto v = get(key);
    return v ? *v : std::move(fallback);
}

long long ConfigFile::get_int(std::string_view key, long long fallback) const {
    auto v = get(key);
    return v ? parse_number<long long>(key, *v) : fallback;
}

double ConfigFile::get_double(std::string_view key, double fallback) const {
    auto v = get(key);
    return v ? parse_number<double>(key, *v) : fallback;
}

bool ConfigFile::get_bool(std::string_view key, bool fallback) const {
    auto v = get(key);
    if (!v) {
        return fallback;
    }
    if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") {
        return true;
    }
    if (*v == "false" || *v == "0" || *v == "no" || *v == "off") {
        return false;
    }
    throw UsageError("config key '" + std::string(key) + "': expected a boolean, got '" + *v +
                     "'");
}

std::vector<int> ConfigFile::get_int_list(std::string_view key, std::vector<int> fallback) const {
    auto v = get(key);
    if (!v) {
        return fallback;
    }
    std::vector<int> out;
    for (const auto& item : split_list(*v)) {
        out.push_back(parse_number<int>(key, item));
    }
    return out;
}

std::vector<double> ConfigFile::get_double_list(std::string_view key,
                                                std::vector<double> fallback) const {
    auto v = get(key);
    if (!v) {
        return fallback;
    }
    std::vector<double> out;
    for (const auto& item : split_list(*v)) {
        out.push_back(parse_number<double>(key, item));
    }
    return out;
}

void ConfigFile::apply_overrides(std::span<const std::string> overrides,
                                 const std::set<std::string>& allowed) {
    std::vector<std::pair<std::string, std::string>> parsed;
    for (const auto& item : overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw UsageError("override '" + item + "' must look like section.key=value");
        }
        std::string key = trim(std::string_view(item).substr(0, eq));
        split_key(key);
        if (!allowed.contains(key)) {
            throw UsageError("unknown override key '" + key + "'");
        }
        parsed.emplace_back(std::move(key), item.substr(eq + 1));
    }
    for (auto& [key, value] : parsed) {
        set(key, std::move(value));
    }
}

void ConfigFile::require_known_keys(const std::set<std::string>& allowed) const {
    for (const auto& key : keys()) {
        if (!allowed.contains(key)) {
            throw UsageError("unknown config key '" + key + "'");
        }
    }
}

void ConfigFile::merge(const ConfigFile& other) {
    for (const auto& [section, body] : other.sections_) {
        for (const auto& [key, value] : body) {
            sections_[section][key] = value;
        }
    }
}

std::vector<std::string> ConfigFile::keys() const {
    std::vector<std::string> out;
    for (const auto& [section, body] : sections_) {
        for (const auto& [key, value] : body) {
            out.push_back(section + "." + key);
        }
    }
    return out;
}

std::string ConfigFile::section_text(std::string_view section) const {
    std::ostringstream out;
    const auto s = sections_.find(std::string(section));
    out << "[" << section << "]\n";
    if (s != sections_.end()) {
        for (const auto& [key, value] : s->second) {
            out << key << " = " << value << "\n";
        }
    }
    return out.str();
}

std::string ConfigFile::to_text() const {
    std::string out;
    for (const auto& [section, body] : sections_) {
        if (!out.empty()) {
            out += "\n";
        }
        out += section_text(section);
    }
    return out;
}

void ConfigFile::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write config file " + path.string());
    }
    out << to_text();
}

} // namespace oucd
