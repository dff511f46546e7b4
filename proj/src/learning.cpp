#include "citysim/learning.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace citysim {

QTable::QTable(std::size_t action_count, const LearningParams& params)
    : action_count_(action_count), params_(params), epsilon_(params.epsilon) {}

double QTable::value(const StateKey& s, ActionId a) const {
    assert(a < action_count_);
    auto it = rows_.find(s);
    return it == rows_.end() ? 0.0 : it->second[a];
}

void QTable::set(const StateKey& s, ActionId a, double v) {
    assert(a < action_count_);
    auto [it, inserted] = rows_.try_emplace(s, action_count_, 0.0);
    it->second[a] = v;
}

double QTable::max_value(const StateKey& s) const {
    auto it = rows_.find(s);
    if (it == rows_.end()) return 0.0;
    return *std::max_element(it->second.begin(), it->second.end());
}

void QTable::decay_epsilon() {
    epsilon_ = std::max(params_.epsilon_floor, epsilon_ * params_.epsilon_decay);
}

void QTable::dump(std::ostream& out) const {
    for (const auto& [s, row] : rows_) {
        for (std::size_t a = 0; a < row.size(); ++a) {
            out << int(s[0]) << ' ' << int(s[1]) << ' ' << int(s[2]) << ',' << a << ','
                << row[a] << '\n';
        }
    }
}

ActionId select_action(const QTable& q, const StateKey& s, RandomStream& rng) {
    assert(q.action_count() > 0);
    if (rng.uniform() < q.epsilon()) {
        return static_cast<ActionId>(rng.uniform_int(q.action_count()));
    }
    ActionId best = 0;
    double best_value = q.value(s, 0);
    for (ActionId a = 1; a < q.action_count(); ++a) {
        const double v = q.value(s, a);
        if (v > best_value) {
            best = a;
            best_value = v;
        }
    }
    return best;
}

void update(QTable& q, const StateKey& s, ActionId a, double reward, const StateKey& s_next) {
    assert(std::isfinite(reward));
    const double target = reward + q.gamma() * q.max_value(s_next);
    q.set(s, a, (1.0 - q.alpha()) * q.value(s, a) + q.alpha() * target);
}

std::uint8_t bin_signal(double value, const BinThresholds& t) {
    if (value < t.low) return 0;
    if (value < t.high) return 1;
    return 2;
}

StateKey discretize_signals(double sold, double leftover, double profit_delta, const SignalBins& bins) {
    return {bin_signal(sold, bins.sold), bin_signal(leftover, bins.leftover),
            bin_signal(profit_delta, bins.profit_delta)};
}

std::pair<Lever, Lever> decode_joint_action(ActionId a) {
    assert(a < kJointActionCount);
    return {static_cast<Lever>(a / 3), static_cast<Lever>(a % 3)};
}

ActionId encode_joint_action(Lever first, Lever second) {
    return static_cast<ActionId>(first) * 3 + static_cast<ActionId>(second);
}

QTable joint_action_table(const LearningParams& params, double hold_prior) {
    QTable q(kJointActionCount, params);
    if (hold_prior == 0.0) return q;
    for (std::uint8_t a = 0; a < 3; ++a) {
        for (std::uint8_t b = 0; b < 3; ++b) {
            for (std::uint8_t c = 0; c < 3; ++c) q.set({a, b, c}, kHoldAction, hold_prior);
        }
    }
    return q;
}

} // namespace citysim
