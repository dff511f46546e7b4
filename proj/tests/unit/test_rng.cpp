#include <doctest.h>

#include <cmath>
#include <vector>

#include <set>

#include "citysim/rng.hpp"

using namespace citysim;

// Known-answer vectors for Philox4x32-10 published with the Random123 library.
TEST_CASE("philox known answers") {
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) ==
          std::array<std::uint32_t, 4>{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          std::array<std::uint32_t, 4>{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          std::array<std::uint32_t, 4>{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are addressed, not scheduled") {
    const StreamAddress a{42, 7, 3, StreamKind::Person, 11, 2};
    RandomStream x(a), y(a);
    for (int i = 0; i < 100; ++i) CHECK(x.next_u64() == y.next_u64());

    StreamAddress b = a;
    b.entity = 12;
    RandomStream z(b), x2(a);
    int same = 0;
    for (int i = 0; i < 100; ++i) same += x2.next_u64() == z.next_u64();
    CHECK(same == 0);
}

TEST_CASE("every address field changes the sequence") {
    const StreamAddress base{1, 2, 3, StreamKind::Firm, 4, 5};
    std::set<std::uint64_t> firsts;
    auto first = [](StreamAddress s) { return RandomStream(s).next_u64(); };
    firsts.insert(first(base));
    StreamAddress s = base;
    s.seed = 9;
    firsts.insert(first(s));
    s = base;
    s.step = 9;
    firsts.insert(first(s));
    s = base;
    s.phase = 9;
    firsts.insert(first(s));
    s = base;
    s.kind = StreamKind::Market;
    firsts.insert(first(s));
    s = base;
    s.entity = 9;
    firsts.insert(first(s));
    s = base;
    s.tag = 9;
    firsts.insert(first(s));
    CHECK(firsts.size() == 7);
}

TEST_CASE("uniform, integer and weighted draws") {
    RandomStream r = RandomStream::seeded(5);
    double sum = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double u = r.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(sum / 20000 == doctest::Approx(0.5).epsilon(0.02));

    std::array<int, 7> counts{};
    for (int i = 0; i < 70000; ++i) ++counts[r.uniform_int(7)];
    for (int c : counts) CHECK(std::abs(c / 70000.0 - 1.0 / 7) < 0.01);

    const std::vector<double> w{1.0, 0.0, 3.0};
    std::array<int, 3> wc{};
    for (int i = 0; i < 40000; ++i) ++wc[r.weighted_index(w)];
    CHECK(wc[1] == 0);
    CHECK(std::abs(wc[0] / 40000.0 - 0.25) < 0.01);

    const std::vector<double> zero{0.0, 0.0};
    CHECK(r.weighted_index(zero) == 2);
    CHECK_FALSE(r.bernoulli(0.0));
    CHECK(r.bernoulli(1.0));
}

TEST_CASE("mix64 spreads consecutive ids") {
    std::set<std::uint64_t> buckets;
    for (std::uint64_t i = 0; i < 64; ++i) buckets.insert(mix64(i) % 4);
    CHECK(buckets.size() == 4);
}
