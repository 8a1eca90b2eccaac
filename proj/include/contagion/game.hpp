#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "contagion/rng.hpp"

namespace contagion {

// Largest memory length for which a full 2^m strategy table is allowed.
inline constexpr int kMaxMemory = 24;

// The last m price directions, oldest first (0 = down, 1 = up). Stored as an
// integer code with the oldest bit in the most significant position, so
// (0,1,0) has code 0b010 = 2 and shifting in the next move is a single
// shift-and-mask.
class HistoryWindow {
public:
    HistoryWindow(int m, std::uint32_t code) : m_(m), code_(code) {
        if (m < 1 || m > kMaxMemory) throw std::invalid_argument("history: memory length out of range");
        if (code >> m) throw std::invalid_argument("history: code wider than memory length");
    }

    static HistoryWindow from_bits(const std::vector<int>& bits) {
        if (bits.empty()) throw std::invalid_argument("history: empty bit sequence");
        std::uint32_t code = 0;
        for (int b : bits) {
            if (b != 0 && b != 1) throw std::invalid_argument("history: entries must be 0 or 1");
            code = (code << 1) | static_cast<std::uint32_t>(b);
        }
        return HistoryWindow(static_cast<int>(bits.size()), code);
    }

    static HistoryWindow random(int m, Rng& rng) {
        if (m < 1 || m > kMaxMemory) throw std::invalid_argument("history: memory length out of range");
        std::uint32_t code = 0;
        for (int i = 0; i < m; ++i) code = (code << 1) | static_cast<std::uint32_t>(rand_bit(rng));
        return HistoryWindow(m, code);
    }

    int memory() const { return m_; }
    std::uint32_t code() const { return code_; }

    // Drop the oldest direction, append x.
    HistoryWindow successor(int x) const {
        if (x != 0 && x != 1) throw std::invalid_argument("history: appended bit must be 0 or 1");
        const std::uint32_t mask = (1u << m_) - 1u;
        return HistoryWindow(m_, ((code_ << 1) | static_cast<std::uint32_t>(x)) & mask);
    }

    std::vector<int> bits() const {
        std::vector<int> out(static_cast<std::size_t>(m_));
        for (int i = 0; i < m_; ++i) out[static_cast<std::size_t>(i)] = (code_ >> (m_ - 1 - i)) & 1u;
        return out;
    }

    // Shift in place (run loop fast path).
    void push(int x) { *this = successor(x); }

private:
    int m_;
    std::uint32_t code_;
};

// Buy/sell prediction for every possible m-bit history.
class StrategyTable {
public:
    StrategyTable(int m, std::vector<std::int8_t> predictions) : m_(m), pred_(std::move(predictions)) {
        if (m < 1 || m > kMaxMemory) throw std::invalid_argument("strategy: memory length out of range");
        if (pred_.size() != (std::size_t{1} << m)) throw std::invalid_argument("strategy: table size must be 2^m");
        for (std::int8_t p : pred_)
            if (p != 1 && p != -1) throw std::invalid_argument("strategy: predictions must be +1 or -1");
    }

    int memory() const { return m_; }
    std::size_t size() const { return pred_.size(); }

    int predict(const HistoryWindow& h) const {
        if (h.memory() != m_) throw std::invalid_argument("strategy: history memory mismatch");
        return pred_[h.code()];
    }

    // True iff the prediction two steps ahead is the same whichever way the
    // market moves next, conditioned on h.
    bool decoupled_at(const HistoryWindow& h) const {
        return predict(h.successor(0)) == predict(h.successor(1));
    }

    static StrategyTable constant(int m, int action) {
        return StrategyTable(m, std::vector<std::int8_t>(std::size_t{1} << m,
                                                         static_cast<std::int8_t>(action)));
    }

private:
    int m_;
    std::vector<std::int8_t> pred_;
};

// Every entry drawn independently and uniformly from {+1,-1}.
inline StrategyTable random_strategy(int m, Rng& rng) {
    if (m < 1 || m > kMaxMemory) throw std::invalid_argument("random_strategy: memory length out of range");
    std::vector<std::int8_t> pred(std::size_t{1} << m);
    for (auto& p : pred) p = static_cast<std::int8_t>(rand_sign(rng));
    return StrategyTable(m, std::move(pred));
}

enum class GameVariant { MinorityGame, DollarGame };
enum class PayoffRule { Linear, Sign };
enum class TieBreak { LowestIndex, Random };

struct GameConfig {
    int n_agents = 101;
    int memory = 3;
    int strategies_per_agent = 2;
    GameVariant variant = GameVariant::MinorityGame;
    PayoffRule payoff = PayoffRule::Linear;
    TieBreak tie_break = TieBreak::LowestIndex;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_agents < 1) throw std::invalid_argument("game: n_agents must be >= 1");
        if (memory < 1 || memory > kMaxMemory) throw std::invalid_argument("game: memory out of range");
        if (strategies_per_agent < 1) throw std::invalid_argument("game: strategies_per_agent must be >= 1");
    }
};

struct AgentState {
    std::vector<StrategyTable> strategies;
    std::vector<long long> scores;  // one running payoff accumulator per strategy
};

struct StepRecord {
    long long t = 0;
    int imbalance = 0;  // A(t), sum of the +-1 actions
    int move = 0;       // 1 = up, 0 = down
    std::vector<std::int8_t> actions;
    std::vector<int> chosen_strategy;
};

class GameState {
public:
    explicit GameState(const GameConfig& config)
        : config_(config),
          rng_(config.seed),
          history_((config.validate(), HistoryWindow::random(config.memory, rng_))) {
        agents_.reserve(static_cast<std::size_t>(config_.n_agents));
        for (int i = 0; i < config_.n_agents; ++i) {
            AgentState a;
            a.strategies.reserve(static_cast<std::size_t>(config_.strategies_per_agent));
            for (int s = 0; s < config_.strategies_per_agent; ++s)
                a.strategies.push_back(random_strategy(config_.memory, rng_));
            a.scores.assign(static_cast<std::size_t>(config_.strategies_per_agent), 0);
            agents_.push_back(std::move(a));
        }
    }

    const GameConfig& config() const { return config_; }
    const std::vector<AgentState>& agents() const { return agents_; }
    std::vector<AgentState>& agents() { return agents_; }
    const HistoryWindow& history() const { return history_; }
    long long time() const { return t_; }

    // Overrides the current window (scenario setup); forgets the previous one.
    void set_history(const HistoryWindow& h) {
        if (h.memory() != config_.memory)
            throw std::invalid_argument("game: history memory mismatch");
        history_ = h;
        prev_history_.reset();
    }

    // Index of the strategy the agent plays right now: highest score, ties to
    // the lowest index (or a uniform pick when the random tie-break is on).
    int chosen_strategy(int agent, Rng* tie_rng = nullptr) const {
        const auto& a = agents_[static_cast<std::size_t>(agent)];
        int best = 0;
        int n_tied = 1;
        for (int s = 1; s < static_cast<int>(a.scores.size()); ++s) {
            if (a.scores[static_cast<std::size_t>(s)] > a.scores[static_cast<std::size_t>(best)]) {
                best = s;
                n_tied = 1;
            } else if (config_.tie_break == TieBreak::Random && tie_rng != nullptr &&
                       a.scores[static_cast<std::size_t>(s)] == a.scores[static_cast<std::size_t>(best)]) {
                // reservoir pick among tied indices
                ++n_tied;
                if (static_cast<int>((*tie_rng)() % static_cast<std::uint64_t>(n_tied)) == 0) best = s;
            }
        }
        return best;
    }

    StepRecord step() { return step_impl(-1); }

    // Same dynamics but the resolved move is forced; scores and imbalance are
    // still computed from the agents' actual actions.
    StepRecord step_forced(int forced_move) {
        if (forced_move != 0 && forced_move != 1)
            throw std::invalid_argument("game: forced move must be 0 or 1");
        return step_impl(forced_move);
    }

private:
    StepRecord step_impl(int forced_move) {
        const int n = config_.n_agents;
        StepRecord rec;
        rec.t = t_;
        rec.actions.resize(static_cast<std::size_t>(n));
        rec.chosen_strategy.resize(static_cast<std::size_t>(n));

        int imbalance = 0;
        for (int i = 0; i < n; ++i) {
            const int s = chosen_strategy(i, &rng_);
            const int a = agents_[static_cast<std::size_t>(i)]
                              .strategies[static_cast<std::size_t>(s)]
                              .predict(history_);
            rec.chosen_strategy[static_cast<std::size_t>(i)] = s;
            rec.actions[static_cast<std::size_t>(i)] = static_cast<std::int8_t>(a);
            imbalance += a;
        }
        rec.imbalance = imbalance;

        // Virtual scoring: every strategy of every agent is scored, used or not.
        for (auto& agent : agents_) {
            for (std::size_t s = 0; s < agent.strategies.size(); ++s) {
                long long delta = 0;
                if (config_.variant == GameVariant::MinorityGame) {
                    const int a_now = agent.strategies[s].predict(history_);
                    delta = payoff(-a_now, imbalance);
                } else if (prev_history_.has_value()) {
                    const int a_prev = agent.strategies[s].predict(*prev_history_);
                    delta = payoff(a_prev, imbalance);
                }
                agent.scores[s] += delta;
            }
        }

        int move;
        if (forced_move >= 0) {
            move = forced_move;
        } else if (imbalance > 0) {
            move = 1;
        } else if (imbalance < 0) {
            move = 0;
        } else {
            move = rand_bit(rng_);
        }
        rec.move = move;

        prev_history_ = history_;
        history_.push(move);
        ++t_;
        return rec;
    }

    long long payoff(int sign_factor, int imbalance) const {
        if (config_.payoff == PayoffRule::Linear) return static_cast<long long>(sign_factor) * imbalance;
        const int s = imbalance > 0 ? 1 : (imbalance < 0 ? -1 : 0);
        return static_cast<long long>(sign_factor) * s;
    }

    GameConfig config_;
    Rng rng_;
    HistoryWindow history_;
    std::optional<HistoryWindow> prev_history_;
    std::vector<AgentState> agents_;
    long long t_ = 0;
};

inline std::vector<StepRecord> run_game(const GameConfig& config, long long steps) {
    if (steps < 1) throw std::invalid_argument("run_game: steps must be >= 1");
    GameState state(config);
    std::vector<StepRecord> out;
    out.reserve(static_cast<std::size_t>(steps));
    for (long long t = 0; t < steps; ++t) out.push_back(state.step());
    return out;
}

}  // namespace contagion
