#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "contagion/rng.hpp"

namespace contagion {

struct IndexMeta {
    std::string id;
    double capitalization = 1.0;  // relative scale suffices
    double timezone = 0.0;        // signed offset in hours
};

struct IafParams {
    double threshold = 0.05;  // R_C, return units
    double gamma = 1.0;       // capitalization-dominance scale
    double tau = 8.0;         // hours, interdependence decay scale
    double noise_sigma = 0.0; // per-index exogenous noise std, return units

    void validate() const {
        if (threshold <= 0.0) throw std::invalid_argument("iaf: threshold must be > 0");
        if (gamma <= 0.0) throw std::invalid_argument("iaf: gamma must be > 0");
        if (tau <= 0.0) throw std::invalid_argument("iaf: tau must be > 0");
        if (noise_sigma < 0.0) throw std::invalid_argument("iaf: noise_sigma must be >= 0");
    }
};

// alpha_ij = 1 - exp[-K_j / (K_i * gamma)]
inline double coupling_alpha(double cap_i, double cap_j, double gamma) {
    if (cap_i <= 0.0 || cap_j <= 0.0 || gamma <= 0.0)
        throw std::invalid_argument("coupling_alpha: inputs must be positive");
    return 1.0 - std::exp(-cap_j / (cap_i * gamma));
}

// beta_ij = exp[-|Z_i - Z_j| / tau]
inline double coupling_beta(double tz_i, double tz_j, double tau) {
    if (tau <= 0.0) throw std::invalid_argument("coupling_beta: tau must be > 0");
    return std::exp(-std::abs(tz_i - tz_j) / tau);
}

struct FiringEvent {
    long long t = 0;
    int source = 0;  // index whose accumulated stress got priced in
    int target = 0;
    double stress = 0.0;  // accumulated stress at transmission time
};

// The stress tensor is the oscillator: returns from index j accumulate on
// cum[i][j] until the threshold is crossed, at which point the stress is
// priced into index i and the entry resets to j's fresh return.
class IafState {
public:
    IafState(std::vector<IndexMeta> metas, IafParams params)
        : metas_(std::move(metas)), params_(params) {
        params_.validate();
        if (metas_.empty()) throw std::invalid_argument("iaf: need at least one index");
        for (const auto& m : metas_)
            if (m.capitalization <= 0.0)
                throw std::invalid_argument("iaf: capitalization must be > 0");
        const std::size_t n = metas_.size();
        cum_.assign(n, std::vector<double>(n, 0.0));
        last_returns_.assign(n, 0.0);
        coupling_.assign(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j)
                    coupling_[i][j] =
                        coupling_alpha(metas_[i].capitalization, metas_[j].capitalization,
                                       params_.gamma) *
                        coupling_beta(metas_[i].timezone, metas_[j].timezone, params_.tau);
    }

    std::size_t size() const { return metas_.size(); }
    const std::vector<IndexMeta>& metas() const { return metas_; }
    const IafParams& params() const { return params_; }
    long long time() const { return t_; }
    const std::vector<std::vector<double>>& stress() const { return cum_; }
    const std::vector<double>& last_returns() const { return last_returns_; }
    double coupling(std::size_t target, std::size_t source) const { return coupling_[target][source]; }

    // Replaces the computed transmission weight for source -> target.
    void set_coupling(std::size_t target, std::size_t source, double value) {
        if (target >= size() || source >= size() || target == source)
            throw std::invalid_argument("iaf: bad coupling pair");
        coupling_[target][source] = value;
    }

    void zero_couplings() {
        for (auto& row : coupling_)
            for (double& c : row) c = 0.0;
    }

    std::optional<std::size_t> find_index(const std::string& id) const {
        for (std::size_t i = 0; i < metas_.size(); ++i)
            if (metas_[i].id == id) return i;
        return std::nullopt;
    }

    // One synchronous step: fire-check against the previous stress, compute
    // all returns, then update every stress entry. `injected` entries, when
    // present, replace the computed return of that index. Fired transmissions
    // with a nonzero coupling are appended to `events` when supplied.
    std::vector<double> step(const std::vector<std::optional<double>>& injected, Rng& rng,
                             std::vector<FiringEvent>* events = nullptr) {
        const std::size_t n = size();
        if (!injected.empty() && injected.size() != n)
            throw std::invalid_argument("iaf: injection vector size mismatch");

        std::vector<std::vector<char>> fired(n, std::vector<char>(n, 0));
        std::vector<double> returns(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double sum = 0.0;
            int n_firing = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                if (std::abs(cum_[i][j]) > params_.threshold) {
                    fired[i][j] = 1;
                    ++n_firing;
                    sum += coupling_[i][j] * cum_[i][j];
                    if (events != nullptr && coupling_[i][j] != 0.0)
                        events->push_back({t_, static_cast<int>(j), static_cast<int>(i), cum_[i][j]});
                }
            }
            double r = n_firing > 0 ? sum / n_firing : 0.0;
            r += rand_gaussian(rng, params_.noise_sigma);
            if (!injected.empty() && injected[i].has_value()) r = *injected[i];
            returns[i] = r;
        }

        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                cum_[i][j] = (fired[i][j] ? 0.0 : cum_[i][j]) + returns[j];
            }

        last_returns_ = returns;
        ++t_;
        return returns;
    }

private:
    std::vector<IndexMeta> metas_;
    IafParams params_;
    std::vector<std::vector<double>> cum_;
    std::vector<std::vector<double>> coupling_;
    std::vector<double> last_returns_;
    long long t_ = 0;
};

struct CascadeTrace {
    std::vector<FiringEvent> events;
    int origin = 0;
    double shock = 0.0;
};

// Injects the shock as the origin's return at the first step, then lets the
// network run until a full quiet step or the horizon.
inline CascadeTrace trace_quake(IafState& state, std::size_t origin, double shock,
                                long long horizon, std::uint64_t seed = 0) {
    if (origin >= state.size()) throw std::invalid_argument("trace_quake: unknown origin index");
    if (horizon < 1) throw std::invalid_argument("trace_quake: horizon must be >= 1");
    Rng rng(seed);
    CascadeTrace trace;
    trace.origin = static_cast<int>(origin);
    trace.shock = shock;
    std::vector<std::optional<double>> injected(state.size());
    injected[origin] = shock;
    for (long long k = 0; k < horizon; ++k) {
        const std::size_t before = trace.events.size();
        state.step(injected, rng, &trace.events);
        injected.assign(state.size(), std::nullopt);
        if (k > 0 && trace.events.size() == before) break;  // quiet step, cascade over
    }
    return trace;
}

struct IafRun {
    std::vector<std::vector<double>> returns;  // T x N
};

inline IafRun run_iaf(IafState& state, long long steps, std::uint64_t seed) {
    if (steps < 1) throw std::invalid_argument("run_iaf: steps must be >= 1");
    Rng rng(seed);
    IafRun run;
    run.returns.reserve(static_cast<std::size_t>(steps));
    const std::vector<std::optional<double>> no_injection;
    for (long long t = 0; t < steps; ++t) run.returns.push_back(state.step(no_injection, rng));
    return run;
}

}  // namespace contagion
