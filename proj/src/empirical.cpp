#include "kacsim/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "kacsim/errors.hpp"
#include "kacsim/quadrature.hpp"

namespace kacsim {

EmpiricalMeasure EmpiricalMeasure::from_samples(std::vector<double> samples,
                                                nlohmann::json meta) {
    if (samples.empty())
        throw ConfigError("empirical measure: need at least one sample");
    for (const double v : samples) {
        if (!std::isfinite(v))
            throw ConfigError("empirical measure: samples must be finite");
    }
    std::sort(samples.begin(), samples.end());
    EmpiricalMeasure m;
    m.samples_ = std::move(samples);
    m.meta_ = std::move(meta);
    m.meta_["count"] = m.samples_.size();
    return m;
}

double EmpiricalMeasure::mean() const {
    double s = 0.0;
    for (const double v : samples_) s += v;
    return s / static_cast<double>(samples_.size());
}

double EmpiricalMeasure::second_moment() const {
    double s = 0.0;
    for (const double v : samples_) s += v * v;
    return s / static_cast<double>(samples_.size());
}

double EmpiricalMeasure::variance() const {
    const double m = mean();
    return second_moment() - m * m;
}

double EmpiricalMeasure::abs_moment(double gamma) const {
    double s = 0.0;
    for (const double v : samples_) s += pow_abs(v, gamma);
    return s / static_cast<double>(samples_.size());
}

EmpiricalMeasure EmpiricalMeasure::subsample(std::size_t k, RngStream& rng) const {
    if (k == 0 || k > samples_.size())
        throw ConfigError("subsample: need 1 <= k <= sample count");
    // Partial Fisher-Yates over an index array.
    std::vector<std::size_t> idx(samples_.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::vector<double> out(k);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + rng.below(idx.size() - i);
        std::swap(idx[i], idx[j]);
        out[i] = samples_[idx[i]];
    }
    nlohmann::json meta = meta_;
    meta["subsampled_from"] = samples_.size();
    return from_samples(std::move(out), std::move(meta));
}

void EmpiricalMeasure::save(std::ostream& os) const {
    os << meta_.dump() << '\n';
    char buf[40];
    for (const double v : samples_) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        os << buf << '\n';
    }
}

void EmpiricalMeasure::save(const std::filesystem::path& path) const {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open for writing: " + path.string());
    save(os);
}

EmpiricalMeasure EmpiricalMeasure::load(std::istream& is) {
    std::string header;
    if (!std::getline(is, header))
        throw ConfigError("empirical measure: missing header line");
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(header);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("empirical measure: bad header JSON: ") + e.what());
    }
    std::vector<double> samples;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        char* end = nullptr;
        const double v = std::strtod(line.c_str(), &end);
        if (end == line.c_str())
            throw ConfigError("empirical measure: bad sample line: " + line);
        samples.push_back(v);
    }
    return from_samples(std::move(samples), std::move(meta));
}

EmpiricalMeasure EmpiricalMeasure::load(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open for reading: " + path.string());
    return load(is);
}

} // namespace kacsim
