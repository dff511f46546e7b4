#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <ostream>
#include <utility>
#include <vector>

#include "citysim/rng.hpp"

namespace citysim {

/// Discretized signals; every table in the simulation uses three signals of three bins.
using StateKey = std::array<std::uint8_t, 3>;
using ActionId = std::uint32_t;

struct LearningParams {
    double alpha = 0.1;
    double gamma = 0.9;
    double epsilon = 0.1;
    double epsilon_decay = 0.999;
    double epsilon_floor = 0.01;

    friend bool operator==(const LearningParams&, const LearningParams&) = default;
};

/// Tabular action-value function. Unseen (state, action) pairs read as exactly 0.
class QTable {
public:
    QTable() = default;
    QTable(std::size_t action_count, const LearningParams& params);

    std::size_t action_count() const { return action_count_; }
    double value(const StateKey& s, ActionId a) const;
    void set(const StateKey& s, ActionId a, double v);
    double max_value(const StateKey& s) const;

    double alpha() const { return params_.alpha; }
    double gamma() const { return params_.gamma; }
    double epsilon() const { return epsilon_; }
    void set_epsilon(double e) { epsilon_ = e; }
    /// Multiplicative decay toward the configured floor; called once per step.
    void decay_epsilon();
    const LearningParams& params() const { return params_; }

    const std::map<StateKey, std::vector<double>>& rows() const { return rows_; }

    /// Diagnostic dump, one `state,action,value` row per stored cell.
    void dump(std::ostream& out) const;

    friend bool operator==(const QTable&, const QTable&) = default;

private:
    std::size_t action_count_ = 0;
    LearningParams params_{};
    double epsilon_ = 0.0;
    std::map<StateKey, std::vector<double>> rows_;
};

/// Epsilon-greedy: explore uniformly with probability epsilon, otherwise argmax with ties
/// going to the lowest index. Always consumes exactly one uniform draw before deciding.
ActionId select_action(const QTable& q, const StateKey& s, RandomStream& rng);

/// Q(s,a) <- (1-alpha) Q(s,a) + alpha (reward + gamma max_a' Q(s',a')).
void update(QTable& q, const StateKey& s, ActionId a, double reward, const StateKey& s_next);

struct BinThresholds {
    double low = 1.0;
    double high = 10.0;
};

/// Bin 0 below `low` (zero/negative), 1 below `high`, 2 otherwise.
std::uint8_t bin_signal(double value, const BinThresholds& t);

struct SignalBins {
    BinThresholds sold{1.0, 20.0};
    BinThresholds leftover{1.0, 20.0};
    BinThresholds profit_delta{0.01, 100.0};
};

StateKey discretize_signals(double sold, double leftover, double profit_delta, const SignalBins& bins);

/// Per-lever move encoded in the nine joint actions.
enum class Lever : std::uint8_t { Decrease = 0, Increase = 1, Hold = 2 };

inline constexpr std::size_t kJointActionCount = 9;
/// The (hold, hold) action.
inline constexpr ActionId kHoldAction = 8;

/// Joint action a = first * 3 + second, in {decrease, increase, hold}^2.
std::pair<Lever, Lever> decode_joint_action(ActionId a);
ActionId encode_joint_action(Lever first, Lever second);

/// A joint-action table whose hold action starts at `hold_prior` in all 27 states, so an
/// untrained learner keeps its levers still instead of defaulting to action 0.
QTable joint_action_table(const LearningParams& params, double hold_prior);

/// Applies a lever move of size `step`.
inline double apply_lever(double value, Lever lever, double step) {
    switch (lever) {
    case Lever::Decrease: return value - step;
    case Lever::Increase: return value + step;
    case Lever::Hold: break;
    }
    return value;
}

} // namespace citysim
