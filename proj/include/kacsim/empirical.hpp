#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "kacsim/rng.hpp"

namespace kacsim {

/// Sorted weighted-equally sample set representing a probability measure on
/// the real line, with a free-form JSON meta block (time point or "steady",
/// kernel description, seed, sample count).
class EmpiricalMeasure {
public:
    static EmpiricalMeasure from_samples(std::vector<double> samples,
                                         nlohmann::json meta);

    const std::vector<double>& samples() const { return samples_; }
    const nlohmann::json& meta() const { return meta_; }
    std::size_t size() const { return samples_.size(); }

    double mean() const;
    double second_moment() const;
    double variance() const;
    double abs_moment(double gamma) const;
    double min() const { return samples_.front(); }
    double max() const { return samples_.back(); }

    /// k entries drawn without replacement, sorted. Requires k <= size().
    EmpiricalMeasure subsample(std::size_t k, RngStream& rng) const;

    /// Plain-text artifact: one JSON header line, then one sample per line
    /// with 17 significant digits (round-trips bit-exactly).
    void save(std::ostream& os) const;
    void save(const std::filesystem::path& path) const;
    static EmpiricalMeasure load(std::istream& is);
    static EmpiricalMeasure load(const std::filesystem::path& path);

private:
    EmpiricalMeasure() = default;

    std::vector<double> samples_;
    nlohmann::json meta_;
};

} // namespace kacsim
