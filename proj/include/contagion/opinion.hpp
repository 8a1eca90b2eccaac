#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "contagion/rng.hpp"

namespace contagion {

// Exact integer binomial coefficient; k capped where the multiplicative form
// stays inside 64 bits for all j.
inline unsigned long long binomial_coeff(int k, int j) {
    if (k < 0 || j < 0 || j > k) throw std::invalid_argument("binomial_coeff: need 0 <= j <= k");
    if (k > 62) throw std::invalid_argument("binomial_coeff: k above the overflow-safe bound of 62");
    if (j > k - j) j = k - j;
    unsigned __int128 c = 1;  // the interleaved multiply overflows 64 bits near k = 62
    for (int i = 1; i <= j; ++i) {
        c = c * static_cast<unsigned>(k - j + i) / static_cast<unsigned>(i);
    }
    return static_cast<unsigned long long>(c);
}

// m[k][j]: probability that a size-k group with j bullish members polarizes
// all-bullish. Rows are indexed by group size, row k has k+1 entries.
class TransitionMatrix {
public:
    explicit TransitionMatrix(int k_max) : rows_(static_cast<std::size_t>(k_max) + 1) {
        if (k_max < 1) throw std::invalid_argument("transition matrix: k_max must be >= 1");
        for (int k = 1; k <= k_max; ++k) rows_[static_cast<std::size_t>(k)].assign(static_cast<std::size_t>(k) + 1, 0.0);
    }

    int k_max() const { return static_cast<int>(rows_.size()) - 1; }

    double at(int k, int j) const {
        check(k, j);
        return rows_[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
    }

    void set(int k, int j, double p) {
        check(k, j);
        if (p < 0.0 || p > 1.0) throw std::invalid_argument("transition matrix: probability out of [0,1]");
        rows_[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] = p;
    }

private:
    void check(int k, int j) const {
        if (k < 1 || k > k_max() || j < 0 || j > k)
            throw std::invalid_argument("transition matrix: (k,j) out of range");
    }
    std::vector<std::vector<double>> rows_;
};

enum class BaselineKind { Majority, Neutral };

// Majority: the group adopts the majority view (tie_prob decides even splits).
// Neutral: m = j/k, opinion unchanged on average.
inline TransitionMatrix baseline_matrix(BaselineKind kind, int k_max, double tie_prob = 0.5) {
    if (tie_prob < 0.0 || tie_prob > 1.0) throw std::invalid_argument("baseline_matrix: tie_prob out of [0,1]");
    TransitionMatrix m(k_max);
    for (int k = 1; k <= k_max; ++k) {
        for (int j = 0; j <= k; ++j) {
            double p;
            if (kind == BaselineKind::Neutral) {
                p = static_cast<double>(j) / static_cast<double>(k);
            } else if (2 * j > k) {
                p = 1.0;
            } else if (2 * j < k) {
                p = 0.0;
            } else {
                p = tie_prob;
            }
            m.set(k, j, p);
        }
        m.set(k, 0, 0.0);
        m.set(k, k, 1.0);
    }
    return m;
}

// Performance-modulated persuasion: interior entries scaled by exp(r/alpha)
// and capped at 1; applied to the stored baseline each day, never compounded.
// Unanimity rows stay pinned unless `pin_unanimity` is relaxed.
inline TransitionMatrix modulate_matrix(const TransitionMatrix& baseline, double last_return,
                                        double alpha, bool pin_unanimity = true) {
    if (alpha <= 0.0) throw std::invalid_argument("modulate_matrix: alpha must be > 0");
    const double factor = std::exp(last_return / alpha);
    TransitionMatrix out(baseline.k_max());
    for (int k = 1; k <= baseline.k_max(); ++k) {
        for (int j = 0; j <= k; ++j) {
            if (pin_unanimity && (j == 0 || j == k)) {
                out.set(k, j, j == 0 ? 0.0 : 1.0);
            } else {
                out.set(k, j, std::min(1.0, baseline.at(k, j) * factor));
            }
        }
    }
    return out;
}

struct SentimentParams {
    std::vector<double> group_size_dist;  // pi_k over k = 1..k_max
    double return_scale = 1.0;            // mu in the return equation
    double vol_base = 0.01;               // sigma_0
    double vol_sensitivity = 1.0;         // beta
    double feedback_scale = 0.1;          // alpha
    double clamp_eps = 1e-3;
    bool pin_unanimity = true;

    int k_max() const { return static_cast<int>(group_size_dist.size()); }

    void validate() const {
        if (group_size_dist.empty()) throw std::invalid_argument("sentiment: empty group-size distribution");
        double sum = 0.0;
        for (double w : group_size_dist) {
            if (w < 0.0) throw std::invalid_argument("sentiment: negative group-size weight");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("sentiment: group-size weights must sum to 1");
        if (return_scale <= 0.0 || vol_base <= 0.0 || vol_sensitivity <= 0.0 || feedback_scale <= 0.0)
            throw std::invalid_argument("sentiment: mu, sigma0, beta, alpha must be > 0");
        if (clamp_eps <= 0.0 || clamp_eps >= 0.5) throw std::invalid_argument("sentiment: clamp_eps out of (0,0.5)");
    }

    // Uniform over group sizes {2,3,4}.
    static SentimentParams defaults() {
        SentimentParams p;
        p.group_size_dist = {0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
        return p;
    }
};

// One mean-field communication round: groups of size k (weights pi_k) with j
// bulls polarize with probability m[k][j].
inline double update_bullishness(double b, const TransitionMatrix& m, const std::vector<double>& pi) {
    if (b < 0.0 || b > 1.0) throw std::invalid_argument("update_bullishness: B out of [0,1]");
    if (static_cast<int>(pi.size()) != m.k_max())
        throw std::invalid_argument("update_bullishness: group-size weights do not match k_max");
    double b_new = 0.0;
    for (int k = 1; k <= m.k_max(); ++k) {
        const double w = pi[static_cast<std::size_t>(k - 1)];
        if (w == 0.0) continue;
        double inner = 0.0;
        for (int j = 0; j <= k; ++j)
            inner += m.at(k, j) * static_cast<double>(binomial_coeff(k, j)) *
                     std::pow(b, j) * std::pow(1.0 - b, k - j);
        b_new += w * inner;
    }
    return std::clamp(b_new, 0.0, 1.0);
}

inline double market_return(double bullishness_change, double mu, double news_shock) {
    if (mu <= 0.0) throw std::invalid_argument("market_return: mu must be > 0");
    return bullishness_change / mu + news_shock;
}

inline double volatility(double bullishness_change, double sigma0, double beta) {
    if (sigma0 <= 0.0 || beta <= 0.0) throw std::invalid_argument("volatility: sigma0 and beta must be > 0");
    return sigma0 * std::exp(bullishness_change / beta);
}

struct SentimentState {
    TransitionMatrix baseline;
    double bullishness = 0.5;
    double bullishness_prev = 0.5;
    double last_return = 0.0;
    double last_volatility = 0.0;
    long long t = 0;
};

struct DayRecord {
    long long t = 0;
    double bullishness = 0.0;
    double bullishness_change = 0.0;  // RB(t), percentage change
    double sigma = 0.0;
    double r = 0.0;
};

// One day of the coupled sentiment/market loop: yesterday's return reshapes
// the transition probabilities, communication moves the bullishness, and the
// change in bullishness sets today's return and volatility. Passing a null
// rng forces the news shock to zero.
inline DayRecord coupled_step(SentimentState& state, const SentimentParams& params, Rng* rng) {
    params.validate();
    const TransitionMatrix m =
        modulate_matrix(state.baseline, state.last_return, params.feedback_scale, params.pin_unanimity);
    const double b_prev = state.bullishness;
    double b = update_bullishness(b_prev, m, params.group_size_dist);
    b = std::clamp(b, params.clamp_eps, 1.0 - params.clamp_eps);
    const double rb = (b - b_prev) / b_prev;
    const double sigma = volatility(rb, params.vol_base, params.vol_sensitivity);
    const double phi = rng != nullptr ? rand_gaussian(*rng, sigma) : 0.0;
    const double r = market_return(rb, params.return_scale, phi);

    state.bullishness_prev = b_prev;
    state.bullishness = b;
    state.last_return = r;
    state.last_volatility = sigma;
    ++state.t;
    return {state.t, b, rb, sigma, r};
}

// Finite-population day: shuffle, partition into groups with sizes drawn from
// pi (final group truncated to the remainder), polarize each group.
inline std::vector<std::uint8_t> simulate_day_agents(const std::vector<std::uint8_t>& population,
                                                     const TransitionMatrix& m,
                                                     const std::vector<double>& pi, Rng& rng) {
    if (population.empty()) throw std::invalid_argument("simulate_day_agents: empty population");
    if (static_cast<int>(pi.size()) != m.k_max())
        throw std::invalid_argument("simulate_day_agents: group-size weights do not match k_max");

    const std::size_t n = population.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {  // Fisher-Yates, pinned generator
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(order[i - 1], order[j]);
    }

    auto draw_group_size = [&]() {
        const double u = rand_unit(rng);
        double acc = 0.0;
        for (std::size_t k = 0; k < pi.size(); ++k) {
            acc += pi[k];
            if (u < acc) return static_cast<int>(k) + 1;
        }
        return static_cast<int>(pi.size());
    };

    std::vector<std::uint8_t> out = population;
    std::size_t pos = 0;
    while (pos < n) {
        const int k = std::min<int>(draw_group_size(), static_cast<int>(n - pos));
        int bulls = 0;
        for (int i = 0; i < k; ++i) bulls += out[order[pos + static_cast<std::size_t>(i)]] ? 1 : 0;
        const std::uint8_t verdict = rand_unit(rng) < m.at(k, bulls) ? 1 : 0;
        for (int i = 0; i < k; ++i) out[order[pos + static_cast<std::size_t>(i)]] = verdict;
        pos += static_cast<std::size_t>(k);
    }
    return out;
}

enum class TippingKind { UpperReflection, LowerReflection };

struct TippingEvent {
    long long t = 0;
    TippingKind kind = TippingKind::UpperReflection;
    double bullishness = 0.0;
};

// Upward crossings of `upper` and downward crossings of `lower` by the
// bullishness path; no re-fire while the path stays on the far side.
inline std::vector<TippingEvent> detect_tipping(const std::vector<DayRecord>& series, double upper,
                                                double lower) {
    if (!(lower < upper) || lower <= 0.0 || upper >= 1.0)
        throw std::invalid_argument("detect_tipping: need 0 < lower < upper < 1");
    std::vector<TippingEvent> events;
    for (std::size_t i = 1; i < series.size(); ++i) {
        const double prev = series[i - 1].bullishness;
        const double cur = series[i].bullishness;
        if (prev <= upper && cur > upper)
            events.push_back({series[i].t, TippingKind::UpperReflection, cur});
        if (prev >= lower && cur < lower)
            events.push_back({series[i].t, TippingKind::LowerReflection, cur});
    }
    return events;
}

}  // namespace contagion
