#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "kacsim/kernels.hpp"
#include "kacsim/wild.hpp"

namespace kacsim {

/// One configuration value. The raw token is kept verbatim; typed accessors
/// parse on demand so 64-bit seeds survive untruncated.
class ConfigValue {
public:
    ConfigValue() = default;
    ConfigValue(std::string raw, std::string path, int line)
        : raw_(std::move(raw)), path_(std::move(path)), line_(line) {}

    double as_double() const;
    std::int64_t as_int() const;
    std::uint64_t as_u64() const;
    bool as_bool() const;
    std::string as_string() const;
    std::vector<double> as_double_array() const;

    const std::string& raw() const { return raw_; }
    const std::string& path() const { return path_; }

private:
    [[noreturn]] void fail(const std::string& what) const;

    std::string raw_;
    std::string path_;
    int line_ = 0;
};

/// Nested key = value tables parsed from the structured text format:
/// `[section.subsection]` headers open tables, `key = value` lines fill the
/// current one, `#` starts a comment.
class ConfigTable {
public:
    static ConfigTable parse_file(const std::filesystem::path& path);
    static ConfigTable parse_string(const std::string& text,
                                    const std::string& origin = "<string>");

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    bool has_table(const std::string& name) const { return tables_.count(name) != 0; }

    const ConfigValue& at(const std::string& key) const;
    const ConfigValue* find(const std::string& key) const;
    const ConfigTable& table(const std::string& name) const;
    const ConfigTable* find_table(const std::string& name) const;

    double get_double(const std::string& key) const { return at(key).as_double(); }
    double get_double(const std::string& key, double fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    std::string get_string(const std::string& key) const { return at(key).as_string(); }

    const std::string& path() const { return path_; }

    /// Full resolved content as JSON (raw value strings), for embedding in
    /// output headers.
    nlohmann::json to_json() const;

private:
    ConfigTable* descend(const std::string& name);

    std::string path_; // dotted location, "" for the root
    std::map<std::string, ConfigValue> values_;
    std::map<std::string, ConfigTable> tables_;
};

/// Builders from config tables. Errors carry the offending key path.
ScalarDistribution scalar_dist_from_config(const ConfigTable& t);
InitialDistribution init_from_config(const ConfigTable& t);
KernelPtr kernel_from_config(const ConfigTable& t);

} // namespace kacsim
