#include <doctest.h>

#include "../oracles.hpp"
#include "citysim/learning.hpp"

using namespace citysim;

namespace {

LearningParams greedy(double alpha = 0.1, double gamma = 0.9) {
    LearningParams p;
    p.alpha = alpha;
    p.gamma = gamma;
    p.epsilon = 0.0;
    return p;
}

} // namespace

TEST_CASE("discretization") {
    const SignalBins bins{{1.0, 10.0}, {1.0, 10.0}, {0.01, 100.0}};
    CHECK(discretize_signals(0, 0, 0, bins) == StateKey{0, 0, 0});
    CHECK(discretize_signals(50, 0, -5, bins) == StateKey{2, 0, 0});
    CHECK(bin_signal(5, BinThresholds{1, 10}) == 1);
    CHECK(bin_signal(10, BinThresholds{1, 10}) == 2);
    CHECK(bin_signal(0.999, BinThresholds{1, 10}) == 0);
}

TEST_CASE("greedy selection and ties") {
    QTable q(2, greedy());
    const StateKey s{0, 0, 0};
    q.set(s, 0, 1.0);
    q.set(s, 1, 5.0);
    RandomStream r = RandomStream::seeded(1);
    CHECK(select_action(q, s, r) == 1);

    QTable flat(4, greedy());
    for (int i = 0; i < 20; ++i) CHECK(select_action(flat, s, r) == 0);
}

TEST_CASE("full exploration is uniform") {
    LearningParams p = greedy();
    p.epsilon = 1.0;
    QTable q(4, p);
    q.set({0, 0, 0}, 2, 100.0);
    RandomStream r = RandomStream::seeded(2);
    std::array<int, 4> counts{};
    for (int i = 0; i < 10000; ++i) ++counts[select_action(q, {0, 0, 0}, r)];
    for (int c : counts) CHECK(std::abs(c / 10000.0 - 0.25) <= 0.02);
}

TEST_CASE("update arithmetic") {
    const StateKey s{0, 0, 0}, t{1, 1, 1};
    QTable overwrite(3, greedy(1.0, 0.0));
    update(overwrite, s, 1, 7.5, t);
    CHECK(overwrite.value(s, 1) == 7.5);

    QTable q(3, greedy(0.5, 0.9));
    q.set(s, 0, 2.0);
    q.set(t, 2, 4.0);
    q.set(s, 1, -1.0);
    update(q, s, 0, 1.0, t);
    CHECK(q.value(s, 0) == doctest::Approx(0.5 * 2 + 0.5 * (1 + 0.9 * 4)));
    CHECK(q.value(s, 0) == doctest::Approx(3.3));
    CHECK(q.value(s, 1) == -1.0);
    CHECK(q.value({2, 2, 2}, 0) == 0.0);
}

TEST_CASE("values stay within the reward bound") {
    LearningParams p;
    p.epsilon = 0.3;
    QTable q(9, p);
    RandomStream r = RandomStream::seeded(3);
    const double bound = 1.0 / (1.0 - p.gamma);
    for (int i = 0; i < 20000; ++i) {
        const StateKey s{static_cast<std::uint8_t>(r.uniform_int(3)), 0, 0};
        const StateKey n{static_cast<std::uint8_t>(r.uniform_int(3)), 0, 0};
        const ActionId a = select_action(q, s, r);
        update(q, s, a, 2.0 * r.uniform() - 1.0, n);
    }
    for (const auto& [s, row] : q.rows()) {
        for (double v : row) CHECK(std::abs(v) <= bound + 1e-12);
    }
}

TEST_CASE("epsilon decays to its floor") {
    LearningParams p;
    p.epsilon = 0.5;
    p.epsilon_decay = 0.5;
    p.epsilon_floor = 0.1;
    QTable q(2, p);
    q.decay_epsilon();
    CHECK(q.epsilon() == doctest::Approx(0.25));
    for (int i = 0; i < 10; ++i) q.decay_epsilon();
    CHECK(q.epsilon() == doctest::Approx(0.1));
}

TEST_CASE("joint actions") {
    for (ActionId a = 0; a < kJointActionCount; ++a) {
        const auto [x, y] = decode_joint_action(a);
        CHECK(encode_joint_action(x, y) == a);
    }
    CHECK(decode_joint_action(kHoldAction) == std::pair{Lever::Hold, Lever::Hold});
    CHECK(apply_lever(1.0, Lever::Increase, 0.25) == 1.25);
    CHECK(apply_lever(1.0, Lever::Decrease, 0.25) == 0.75);
    CHECK(apply_lever(1.0, Lever::Hold, 0.25) == 1.0);

    const QTable q = joint_action_table(LearningParams{}, 0.01);
    RandomStream r = RandomStream::seeded(4);
    QTable g = q;
    g.set_epsilon(0.0);
    CHECK(select_action(g, {1, 2, 0}, r) == kHoldAction);
}

TEST_CASE("deterministic under identical seeds") {
    auto train = [](std::uint64_t seed) {
        QTable q(3, LearningParams{});
        RandomStream r = RandomStream::seeded(seed);
        for (int i = 0; i < 500; ++i) {
            const ActionId a = select_action(q, {0, 0, 0}, r);
            update(q, {0, 0, 0}, a, r.uniform(), {0, 0, 0});
        }
        return q;
    };
    CHECK(train(9) == train(9));
}
