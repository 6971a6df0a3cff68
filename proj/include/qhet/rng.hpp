#pragma once

#include <array>
#include <cstdint>

namespace qhet {

/// Philox4x32-10 counter-based generator. One instance per (seed, stream)
/// pair is an independent substream; draws depend only on those two values,
/// never on which thread runs them. Streams are cheap to construct, so the
/// simulation harness makes one per replication.
class Philox {
public:
    Philox(std::uint64_t seed, std::uint64_t stream);

    std::uint32_t next_u32();
    std::uint64_t next_u64();

    /// uniform on [0, 1) with 53 random bits
    double next_double();

    /// uniform on (0, 1]; safe as a log() argument
    double next_positive_double();

    /// standard normal (Box-Muller; pairs are cached)
    double next_normal();

    /// Gamma(shape, 1) by Marsaglia-Tsang squeeze (shape < 1 via the boost)
    double next_gamma(double shape);

    /// chi-square with df > 0 (fractional df allowed)
    double next_chi_square(double df);

private:
    void refill();

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> counter_;
    std::array<std::uint32_t, 4> block_;
    int pos_ = 4;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

}  // namespace qhet
