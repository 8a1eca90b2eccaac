#pragma once

#include <iterator>
#include <optional>
#include <stdexcept>
#include <vector>

#include "contagion/game.hpp"

namespace contagion {

enum class Direction { Down = 0, Up = 1 };

inline HistoryWindow successor(const HistoryWindow& h, int x) { return h.successor(x); }

inline bool is_decoupled(const StrategyTable& s, const HistoryWindow& h) {
    return s.decoupled_at(h);
}

// Decomposition of the order imbalance at the current step over the agents'
// in-use strategies. a_coupled + a_decoupled is the exact identity split of
// the current actions; a_decoupled_ahead sums the decoupled strategies'
// common two-step-ahead predictions, which is the quantity the certain-
// predictability condition tests.
struct ImbalanceSplit {
    int a_coupled = 0;
    int a_decoupled = 0;
    int a_decoupled_ahead = 0;
    int total = 0;
};

inline ImbalanceSplit split_imbalance(const GameState& state) {
    ImbalanceSplit split;
    const HistoryWindow& h = state.history();
    for (int i = 0; i < state.config().n_agents; ++i) {
        const auto& agent = state.agents()[static_cast<std::size_t>(i)];
        const StrategyTable& s =
            agent.strategies[static_cast<std::size_t>(state.chosen_strategy(i))];
        const int action = s.predict(h);
        if (s.decoupled_at(h)) {
            split.a_decoupled += action;
            split.a_decoupled_ahead += s.predict(h.successor(0));
        } else {
            split.a_coupled += action;
        }
        split.total += action;
    }
    return split;
}

// Certain-predictability condition: the decoupled two-step-ahead sum strictly
// outweighs any possible coupled opposition.
inline std::optional<Direction> predictability_flag(const GameState& state) {
    const ImbalanceSplit split = split_imbalance(state);
    const double half = static_cast<double>(state.config().n_agents) / 2.0;
    if (split.a_decoupled_ahead > half) return Direction::Up;
    if (split.a_decoupled_ahead < -half) return Direction::Down;
    return std::nullopt;
}

struct OracleResult {
    std::optional<Direction> direction;
    // True when, in both forced branches, every agent's chosen-strategy index
    // at the second step equals its choice at the scanned step.
    bool choices_stable = false;
};

// Exhaustive ground truth: force each possible next move, advance the clone
// one further step and compare the resolved directions. A day is flagged only
// when both branches agree (with odd N no step resolves by coin flip).
inline OracleResult two_branch_oracle(const GameState& state) {
    if (state.config().tie_break != TieBreak::LowestIndex)
        throw std::logic_error("two_branch_oracle: requires the deterministic tie-break");
    if (state.config().n_agents % 2 == 0)
        throw std::logic_error("two_branch_oracle: requires odd N (no coin-flip steps)");

    std::vector<int> chosen_now(static_cast<std::size_t>(state.config().n_agents));
    for (int i = 0; i < state.config().n_agents; ++i)
        chosen_now[static_cast<std::size_t>(i)] = state.chosen_strategy(i);

    int branch_move[2];
    bool stable = true;
    for (int forced = 0; forced < 2; ++forced) {
        GameState clone = state;
        clone.step_forced(forced);
        const StepRecord rec = clone.step();
        branch_move[forced] = rec.move;
        for (int i = 0; i < state.config().n_agents; ++i)
            if (rec.chosen_strategy[static_cast<std::size_t>(i)] !=
                chosen_now[static_cast<std::size_t>(i)])
                stable = false;
    }

    OracleResult out;
    out.choices_stable = stable;
    if (branch_move[0] == branch_move[1])
        out.direction = branch_move[0] == 1 ? Direction::Up : Direction::Down;
    return out;
}

struct PredictiveDay {
    long long t = 0;
    Direction direction = Direction::Down;
    long long run_length = 1;  // consecutive predictive days starting here
};

// One row per scanned step; enough to replot the decoupled-imbalance series
// with predictive days and run starts marked.
struct ScanRecord {
    long long t = 0;
    int a_coupled = 0;
    int a_decoupled = 0;
    int a_decoupled_ahead = 0;
    std::optional<Direction> flag;
    std::optional<Direction> oracle;
    bool choices_stable = false;
    long long run_length = 0;  // 0 when the day is not predictive
};

struct ScanResult {
    std::vector<ScanRecord> records;
    std::vector<PredictiveDay> predictive_days;
    long long flag_count = 0;            // steps where the condition fired
    long long flag_confirmed_count = 0;  // of those, oracle-confirmed with matching direction
};

// Runs the game, evaluating the oracle at every step that still has two
// in-run steps ahead of it (t = 0 .. T-3).
inline ScanResult scan_predictive_days(const GameConfig& config, long long steps) {
    if (steps < 3) throw std::invalid_argument("scan_predictive_days: need at least 3 steps");
    GameState state(config);
    ScanResult result;
    result.records.reserve(static_cast<std::size_t>(steps - 2));
    for (long long t = 0; t + 2 < steps; ++t) {
        ScanRecord rec;
        rec.t = t;
        const ImbalanceSplit split = split_imbalance(state);
        rec.a_coupled = split.a_coupled;
        rec.a_decoupled = split.a_decoupled;
        rec.a_decoupled_ahead = split.a_decoupled_ahead;
        rec.flag = predictability_flag(state);
        const OracleResult oracle = two_branch_oracle(state);
        rec.oracle = oracle.direction;
        rec.choices_stable = oracle.choices_stable;
        if (rec.flag.has_value()) {
            ++result.flag_count;
            if (rec.oracle == rec.flag) ++result.flag_confirmed_count;
        }
        result.records.push_back(rec);
        state.step();
    }

    // Run lengths, back to front: a predictive day's run is itself plus the
    // run starting on the following day.
    for (auto it = result.records.rbegin(); it != result.records.rend(); ++it) {
        if (!it->oracle.has_value()) continue;
        const long long next_run = it == result.records.rbegin() ? 0 : std::prev(it)->run_length;
        it->run_length = 1 + next_run;
    }
    for (const ScanRecord& rec : result.records)
        if (rec.oracle.has_value())
            result.predictive_days.push_back({rec.t, *rec.oracle, rec.run_length});
    return result;
}

}  // namespace contagion
