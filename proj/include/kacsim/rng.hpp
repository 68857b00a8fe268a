#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace kacsim {

/// Small splittable PCG32 stream.
///
/// Every stream is identified by (seed, stream id); `substream(k)` derives an
/// independent child stream from that identity without touching the parent
/// state, so sample k of a Monte Carlo run always sees the same variates no
/// matter how work is scheduled across workers.
class RngStream {
public:
    RngStream() : RngStream(0x853c49e6748fea9bULL) {}

    explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
        : seed_(seed), sid_(stream_id) {
        const std::uint64_t inc = (mix(stream_id, 0x5851f42d4c957f2dULL) << 1u) | 1u;
        inc_ = inc;
        state_ = 0;
        next_u32();
        state_ += mix(seed, stream_id);
        next_u32();
    }

    std::uint32_t next_u32() {
        const std::uint64_t old = state_;
        state_ = old * 6364136223846793005ULL + inc_;
        const auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
        const auto rot = static_cast<std::uint32_t>(old >> 59u);
        return (xorshifted >> rot) | (xorshifted << ((-rot) & 31u));
    }

    std::uint64_t next_u64() {
        const std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    /// Unbiased uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) {
        // Lemire's multiply-shift with rejection.
        std::uint64_t x = next_u64();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (lo < threshold) {
                x = next_u64();
                m = static_cast<__uint128_t>(x) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Gaussian draw via Box-Muller. Always consumes exactly two uniforms
    /// (the sine branch is discarded) so the stream position stays a pure
    /// function of the draw count.
    double normal(double mean = 0.0, double stddev = 1.0) {
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double z = std::sqrt(-2.0 * std::log(u1)) *
                         std::cos(2.0 * std::numbers::pi * u2);
        return mean + stddev * z;
    }

    double exponential(double mean) { return -mean * std::log(uniform01()); }

    /// Independent child stream derived from (seed, stream id, index).
    /// Does not advance this stream.
    RngStream substream(std::uint64_t index) const {
        return RngStream(seed_, mix(sid_, index));
    }

    /// Independent child stream; consumes one u64 from this stream, so
    /// successive forks are distinct.
    RngStream fork() {
        return RngStream(mix(seed_, next_u64()), mix(sid_, 0x9e3779b97f4a7c15ULL));
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return sid_; }

private:
    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 0x2545f4914f6cdd1dULL);
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t state_ = 0;
    std::uint64_t inc_ = 1;
    std::uint64_t seed_ = 0;
    std::uint64_t sid_ = 0;
};

} // namespace kacsim
