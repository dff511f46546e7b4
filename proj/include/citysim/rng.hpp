#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace citysim {

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Finalizer from SplitMix64; used for id hashing and key derivation.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// What kind of entity a random stream belongs to.
enum class StreamKind : std::uint8_t {
    Person = 1,
    Firm = 2,
    Government = 3,
    Market = 4,
    Graph = 5,
    Governance = 6,
    Test = 7,
};

/// Address of a random stream: every draw in the simulation is a pure function of
/// (seed, step, phase, kind, entity, tag, draw index).
struct StreamAddress {
    std::uint64_t seed = 0;
    std::uint32_t step = 0;
    std::uint8_t phase = 0;
    StreamKind kind = StreamKind::Test;
    std::uint32_t entity = 0;
    std::uint16_t tag = 0;
};

/// Counter-based random stream. Copying a stream copies its position; two streams with the
/// same address produce the same sequence regardless of where or when they are evaluated.
class RandomStream {
public:
    explicit RandomStream(const StreamAddress& address);

    /// Shorthand for test and tool code.
    static RandomStream seeded(std::uint64_t seed, std::uint32_t entity = 0, std::uint16_t tag = 0);

    std::uint32_t next_u32();
    std::uint64_t next_u64();
    /// Uniform in [0, 1) with 53 bits of precision.
    double uniform();
    /// Uniform integer in [0, n); n must be positive.
    std::uint64_t uniform_int(std::uint64_t n);
    bool bernoulli(double p);
    /// Index drawn with probability proportional to weights; returns weights.size() if
    /// every weight is zero.
    std::size_t weighted_index(std::span<const double> weights);

    std::uint64_t draws() const { return draws_; }

    // UniformRandomBitGenerator interface.
    using result_type = std::uint64_t;
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }
    result_type operator()() { return next_u64(); }

private:
    void refill();

    std::array<std::uint32_t, 2> key_{};
    std::array<std::uint32_t, 4> counter_{};
    std::array<std::uint32_t, 4> block_{};
    unsigned used_ = 4;
    std::uint64_t draws_ = 0;
};

} // namespace citysim
