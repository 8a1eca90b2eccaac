#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

#include "contagion/game.hpp"
#include "contagion/iaf.hpp"
#include "contagion/io.hpp"
#include "contagion/opinion.hpp"

namespace contagion {

// Network spec: one `index <id> <capitalization> <timezone>` line per index,
// global `r_c`, `gamma`, `tau`, `noise_sigma` keys, and optional
// `coupling <source> <target> <value>` overrides. When any coupling line is
// present, all unlisted pairs transmit nothing.
inline IafState load_iaf_network(const KvConfig& cfg) {
    IafParams params;
    params.threshold = cfg.get_double_or("r_c", params.threshold);
    params.gamma = cfg.get_double_or("gamma", params.gamma);
    params.tau = cfg.get_double_or("tau", params.tau);
    params.noise_sigma = cfg.get_double_or("noise_sigma", params.noise_sigma);

    std::vector<IndexMeta> metas;
    for (const std::string& spec : cfg.all("index")) {
        std::istringstream in(spec);
        IndexMeta meta;
        if (!(in >> meta.id >> meta.capitalization >> meta.timezone))
            throw std::invalid_argument("network config: bad index line '" + spec + "'");
        metas.push_back(meta);
    }
    if (metas.empty()) throw std::invalid_argument("network config: no index lines");

    IafState state(std::move(metas), params);
    const auto couplings = cfg.all("coupling");
    if (!couplings.empty()) {
        state.zero_couplings();
        for (const std::string& spec : couplings) {
            std::istringstream in(spec);
            std::string src, dst;
            double value = 0.0;
            if (!(in >> src >> dst >> value))
                throw std::invalid_argument("network config: bad coupling line '" + spec + "'");
            const auto s = state.find_index(src);
            const auto d = state.find_index(dst);
            if (!s || !d) throw std::invalid_argument("network config: unknown index in coupling '" + spec + "'");
            state.set_coupling(*d, *s, value);
        }
    }
    return state;
}

inline GameConfig load_game_config(const KvConfig& cfg) {
    GameConfig gc;
    gc.n_agents = static_cast<int>(cfg.get_int_or("n_agents", gc.n_agents));
    gc.memory = static_cast<int>(cfg.get_int_or("memory", gc.memory));
    gc.strategies_per_agent = static_cast<int>(cfg.get_int_or("strategies", gc.strategies_per_agent));
    const std::string payoff = cfg.get_or("payoff", "linear");
    if (payoff == "linear") {
        gc.payoff = PayoffRule::Linear;
    } else if (payoff == "sign") {
        gc.payoff = PayoffRule::Sign;
    } else {
        throw std::invalid_argument("game config: payoff must be linear or sign");
    }
    const std::string tie = cfg.get_or("tie_break", "lowest");
    if (tie == "lowest") {
        gc.tie_break = TieBreak::LowestIndex;
    } else if (tie == "random") {
        gc.tie_break = TieBreak::Random;
    } else {
        throw std::invalid_argument("game config: tie_break must be lowest or random");
    }
    return gc;
}

struct OpinionScenario {
    SentimentParams params;
    BaselineKind baseline = BaselineKind::Neutral;
    double tie_prob = 0.5;
    double b0 = 0.5;
    double tipping_upper = 0.9;
    double tipping_lower = 0.1;
    bool noise = true;
};

inline OpinionScenario load_opinion_scenario(const KvConfig& cfg) {
    OpinionScenario s;
    const std::string kind = cfg.get_or("baseline", "neutral");
    if (kind == "majority") {
        s.baseline = BaselineKind::Majority;
    } else if (kind == "neutral") {
        s.baseline = BaselineKind::Neutral;
    } else {
        throw std::invalid_argument("opinion config: baseline must be majority or neutral");
    }
    s.params = SentimentParams::defaults();
    if (cfg.has("pi")) s.params.group_size_dist = parse_double_list(cfg.get("pi"));
    s.params.return_scale = cfg.get_double_or("mu", s.params.return_scale);
    s.params.vol_base = cfg.get_double_or("sigma0", s.params.vol_base);
    s.params.vol_sensitivity = cfg.get_double_or("beta", s.params.vol_sensitivity);
    s.params.feedback_scale = cfg.get_double_or("alpha", s.params.feedback_scale);
    s.params.clamp_eps = cfg.get_double_or("eps", s.params.clamp_eps);
    s.params.pin_unanimity = cfg.get_int_or("pin_unanimity", 1) != 0;
    s.tie_prob = cfg.get_double_or("tie_prob", s.tie_prob);
    s.b0 = cfg.get_double_or("b0", s.b0);
    s.tipping_upper = cfg.get_double_or("upper", s.tipping_upper);
    s.tipping_lower = cfg.get_double_or("lower", s.tipping_lower);
    s.noise = cfg.get_int_or("noise", 1) != 0;
    s.params.validate();
    return s;
}

}  // namespace contagion
