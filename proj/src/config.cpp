#include "kacsim/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "kacsim/errors.hpp"

namespace kacsim {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// Strips a trailing comment, respecting double-quoted strings.
std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

std::string join_path(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
}

} // namespace

void ConfigValue::fail(const std::string& what) const {
    throw ConfigError("config: " + path_ + " (line " + std::to_string(line_) +
                      "): " + what + ", got `" + raw_ + "`");
}

double ConfigValue::as_double() const {
    char* end = nullptr;
    const double v = std::strtod(raw_.c_str(), &end);
    if (end == raw_.c_str() || *end != '\0') fail("expected a number");
    return v;
}

std::int64_t ConfigValue::as_int() const {
    char* end = nullptr;
    const long long v = std::strtoll(raw_.c_str(), &end, 10);
    if (end == raw_.c_str() || *end != '\0') fail("expected an integer");
    return v;
}

std::uint64_t ConfigValue::as_u64() const {
    char* end = nullptr;
    if (!raw_.empty() && raw_[0] == '-') fail("expected a non-negative integer");
    const unsigned long long v = std::strtoull(raw_.c_str(), &end, 10);
    if (end == raw_.c_str() || *end != '\0') fail("expected a non-negative integer");
    return v;
}

bool ConfigValue::as_bool() const {
    if (raw_ == "true") return true;
    if (raw_ == "false") return false;
    fail("expected true or false");
}

std::string ConfigValue::as_string() const {
    if (raw_.size() >= 2 && raw_.front() == '"' && raw_.back() == '"')
        return raw_.substr(1, raw_.size() - 2);
    return raw_;
}

std::vector<double> ConfigValue::as_double_array() const {
    if (raw_.size() < 2 || raw_.front() != '[' || raw_.back() != ']')
        fail("expected an array like [1, 2, 3]");
    std::vector<double> out;
    const std::string body = raw_.substr(1, raw_.size() - 2);
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::string tok = trim(item);
        if (tok.empty()) fail("empty array element");
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str() || *end != '\0') fail("bad array element `" + tok + "`");
        out.push_back(v);
    }
    return out;
}

ConfigTable* ConfigTable::descend(const std::string& name) {
    auto it = tables_.find(name);
    if (it == tables_.end()) {
        ConfigTable t;
        t.path_ = join_path(path_, name);
        it = tables_.emplace(name, std::move(t)).first;
    }
    return &it->second;
}

ConfigTable ConfigTable::parse_string(const std::string& text, const std::string& origin) {
    ConfigTable root;
    ConfigTable* current = &root;
    std::istringstream is(text);
    std::string raw_line;
    int lineno = 0;
    while (std::getline(is, raw_line)) {
        ++lineno;
        const std::string line = trim(strip_comment(raw_line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config: " + origin + " line " +
                                  std::to_string(lineno) + ": unterminated [section]");
            const std::string header = trim(line.substr(1, line.size() - 2));
            if (header.empty())
                throw ConfigError("config: " + origin + " line " +
                                  std::to_string(lineno) + ": empty section name");
            current = &root;
            std::stringstream ss(header);
            std::string part;
            while (std::getline(ss, part, '.')) {
                part = trim(part);
                if (part.empty())
                    throw ConfigError("config: " + origin + " line " +
                                      std::to_string(lineno) + ": bad section name `" +
                                      header + "`");
                current = current->descend(part);
            }
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: " + origin + " line " + std::to_string(lineno) +
                              ": expected `key = value` or `[section]`, got `" + line +
                              "`");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config: " + origin + " line " + std::to_string(lineno) +
                              ": empty key");
        const std::string key_path = join_path(current->path_, key);
        if (current->values_.count(key))
            throw ConfigError("config: duplicate key " + key_path + " (line " +
                              std::to_string(lineno) + ")");
        current->values_.emplace(key, ConfigValue(value, key_path, lineno));
    }
    return root;
}

ConfigTable ConfigTable::parse_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path.string());
    std::stringstream buffer;
    buffer << is.rdbuf();
    return parse_string(buffer.str(), path.string());
}

const ConfigValue& ConfigTable::at(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end())
        throw ConfigError("config: missing required key " + join_path(path_, key));
    return it->second;
}

const ConfigValue* ConfigTable::find(const std::string& key) const {
    const auto it = values_.find(key);
    return it == values_.end() ? nullptr : &it->second;
}

const ConfigTable& ConfigTable::table(const std::string& name) const {
    const auto* t = find_table(name);
    if (t == nullptr)
        throw ConfigError("config: missing required table [" + join_path(path_, name) +
                          "]");
    return *t;
}

const ConfigTable* ConfigTable::find_table(const std::string& name) const {
    const auto it = tables_.find(name);
    return it == tables_.end() ? nullptr : &it->second;
}

double ConfigTable::get_double(const std::string& key, double fallback) const {
    const auto* v = find(key);
    return v == nullptr ? fallback : v->as_double();
}

std::uint64_t ConfigTable::get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto* v = find(key);
    return v == nullptr ? fallback : v->as_u64();
}

nlohmann::json ConfigTable::to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [key, value] : values_) j[key] = value.raw();
    for (const auto& [name, sub] : tables_) j[name] = sub.to_json();
    return j;
}

// ---------------------------------------------------------------------------

ScalarDistribution scalar_dist_from_config(const ConfigTable& t) {
    const std::string type = t.at("type").as_string();
    if (type == "point_mass") return ScalarDistribution::point_mass(t.get_double("value"));
    if (type == "uniform01") return ScalarDistribution::uniform01();
    if (type == "uniform")
        return ScalarDistribution::uniform(t.get_double("a"), t.get_double("b"));
    if (type == "bernoulli") return ScalarDistribution::bernoulli(t.get_double("p"));
    if (type == "symmetric_two_point")
        return ScalarDistribution::symmetric_two_point(t.get_double("x"));
    if (type == "exponential") return ScalarDistribution::exponential(t.get_double("mean"));
    if (type == "gaussian")
        return ScalarDistribution::gaussian(t.get_double("mean"), t.get_double("stddev"));
    if (type == "rademacher") return ScalarDistribution::rademacher(t.get_double("scale"));
    throw ConfigError("config: " + t.path() + ".type: unknown distribution `" + type +
                      "`");
}

InitialDistribution init_from_config(const ConfigTable& t) {
    const std::string type = t.at("type").as_string();
    if (type == "point_mass") return InitialDistribution::point_mass(t.get_double("value"));
    if (type == "uniform")
        return InitialDistribution::uniform(t.get_double("a"), t.get_double("b"));
    if (type == "exponential")
        return InitialDistribution::exponential(t.get_double("mean"));
    if (type == "gaussian")
        return InitialDistribution::gaussian(t.get_double("mean"), t.get_double("stddev"));
    if (type == "empirical") {
        if (t.has("values"))
            return InitialDistribution::empirical(t.at("values").as_double_array());
        if (t.has("path")) {
            const EmpiricalMeasure m =
                EmpiricalMeasure::load(std::filesystem::path(t.get_string("path")));
            return InitialDistribution::empirical(m.samples());
        }
        throw ConfigError("config: " + t.path() + ": empirical needs values or path");
    }
    throw ConfigError("config: " + t.path() + ".type: unknown initial law `" + type + "`");
}

KernelPtr kernel_from_config(const ConfigTable& t) {
    const std::string type = t.at("type").as_string();
    if (type == "kac_classical") return kac_classical();
    if (type == "inelastic_kac") {
        std::optional<ScalarDistribution> bg;
        if (const auto* b = t.find_table("background"))
            bg = scalar_dist_from_config(*b);
        return inelastic_kac(t.get_double("p"), std::move(bg));
    }
    if (type == "saving_propensity")
        return saving_propensity(t.get_double("lambda"),
                                 scalar_dist_from_config(t.table("eta")));
    if (type == "pure_gambling")
        return pure_gambling(scalar_dist_from_config(t.table("eta")));
    if (type == "redistribution_full")
        return redistribution_full(kernel_from_config(t.table("base")),
                                   t.get_double("epsilon"),
                                   scalar_dist_from_config(t.table("a0dist")));
    if (type == "redistribution_bernoulli")
        return redistribution_bernoulli(kernel_from_config(t.table("base")),
                                        t.get_double("epsilon"), t.get_double("delta"),
                                        scalar_dist_from_config(t.table("a0dist")));
    if (type == "chi_minus_one")
        return chi_minus_one(kernel_from_config(t.table("base")),
                             t.get_double("epsilon"));
    if (type == "chi_zero")
        return chi_zero(kernel_from_config(t.table("base")), t.get_double("epsilon"),
                        t.get_double("m0"));
    if (type == "chi_general")
        return chi_general(kernel_from_config(t.table("base")), t.get_double("epsilon"),
                           t.get_double("chi"), t.get_double("m0"));
    if (type == "thermal_bath_diff")
        return thermal_bath_diff(kernel_from_config(t.table("base")), t.get_double("a"),
                                 t.get_double("b"));
    if (type == "degenerate_pin")
        return degenerate_pin(kernel_from_config(t.table("base")), t.get_double("m"));
    throw ConfigError("config: " + t.path() + ".type: unknown kernel `" + type + "`");
}

} // namespace kacsim
