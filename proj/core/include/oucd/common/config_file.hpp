#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace oucd {

/// Sectioned key-value configuration (INI syntax). Keys are addressed as
/// "section.key". Serialization is sorted, so equal contents give equal text.
class ConfigFile {
public:
    ConfigFile() = default;

    /// Throws UsageError on malformed text.
    static ConfigFile parse(std::string_view text);
    /// Throws IoError when the file cannot be read, UsageError on bad syntax.
    static ConfigFile load(const std::filesystem::path& path);

    void set(std::string_view dotted_key, std::string value);
    [[nodiscard]] std::optional<std::string> get(std::string_view dotted_key) const;
    [[nodiscard]] bool contains(std::string_view dotted_key) const;

    [[nodiscard]] std::string get_string(std::string_view key, std::string fallback) const;
    [[nodiscard]] long long get_int(std::string_view key, long long fallback) const;
    [[nodiscard]] double get_double(std::string_view key, double fallback) const;
    [[nodiscard]] bool get_bool(std::string_view key, bool fallback) const;
    [[nodiscard]] std::vector<int> get_int_list(std::string_view key,
                                                std::vector<int> fallback) const;
    [[nodiscard]] std::vector<double> get_double_list(std::string_view key,
                                                      std::vector<double> fallback) const;

    /// Applies "section.key=value" overrides in order. Keys outside `allowed`
    /// are rejected with UsageError before anything is changed.
    void apply_overrides(std::span<const std::string> overrides,
                         const std::set<std::string>& allowed);
    /// Throws UsageError naming the first key not in `allowed`.
    void require_known_keys(const std::set<std::string>& allowed) const;

    /// Overlays every entry of `other` onto this file.
    void merge(const ConfigFile& other);

    [[nodiscard]] std::vector<std::string> keys() const;
    [[nodiscard]] std::string section_text(std::string_view section) const;
    [[nodiscard]] std::string to_text() const;
    void save(const std::filesystem::path& path) const;

private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

} // namespace oucd
