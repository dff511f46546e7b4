#include "citysim/rng.hpp"

#include <cmath>

namespace citysim {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

} // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c,
                                        std::array<std::uint32_t, 2> k) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            k[0] += kPhiloxW0;
            k[1] += kPhiloxW1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, c[0], hi0, lo0);
        mulhilo(kPhiloxM1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
}

RandomStream::RandomStream(const StreamAddress& a) {
    key_ = {static_cast<std::uint32_t>(a.seed), static_cast<std::uint32_t>(a.seed >> 32)};
    counter_ = {0u, a.entity, a.step,
                (static_cast<std::uint32_t>(a.phase) << 24) |
                    (static_cast<std::uint32_t>(a.kind) << 16) | a.tag};
}

RandomStream RandomStream::seeded(std::uint64_t seed, std::uint32_t entity, std::uint16_t tag) {
    return RandomStream(StreamAddress{seed, 0, 0, StreamKind::Test, entity, tag});
}

void RandomStream::refill() {
    block_ = philox4x32(counter_, key_);
    ++counter_[0];
    used_ = 0;
}

std::uint32_t RandomStream::next_u32() {
    if (used_ == 4) refill();
    ++draws_;
    return block_[used_++];
}

std::uint64_t RandomStream::next_u64() {
    const std::uint64_t hi = next_u32();
    const std::uint64_t lo = next_u32();
    return (hi << 32) | lo;
}

double RandomStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RandomStream::uniform_int(std::uint64_t n) {
    // Rejection keeps the draw unbiased for every n.
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % n;
}

bool RandomStream::bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform() < p;
}

std::size_t RandomStream::weighted_index(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) return weights.size();
    const double target = uniform() * total;
    double acc = 0.0;
    std::size_t last_positive = weights.size();
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0.0) continue;
        acc += weights[i];
        last_positive = i;
        if (target < acc) return i;
    }
    // Rounding in the running sum can leave target just above acc.
    return last_positive;
}

} // namespace citysim
