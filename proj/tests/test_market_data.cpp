#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "contagion/iaf.hpp"
#include "contagion/market_data.hpp"
#include "helpers.hpp"

using namespace contagion;
using contagion::testing::synth_date;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

ReturnSeries series_from(const std::vector<double>& values, ReturnKind kind = ReturnKind::OpenClose) {
    ReturnSeries s;
    s.kind = kind;
    for (std::size_t i = 0; i < values.size(); ++i) s.entries.emplace_back(synth_date(static_cast<long long>(i)), values[i]);
    return s;
}

}  // namespace

TEST_CASE("load_quotes parses well-formed rows and reports bad ones") {
    const std::string path = write_temp("quotes_diag.csv",
                                        "date,index_id,open,close\n"
                                        "2013-05-23,N225,14700,13700\n"
                                        "2013-05-24,N225,-1,13800\n"
                                        "not-a-date,N225,100,101\n"
                                        "2013-05-23,N225,14700,13700\n"
                                        "2013-05-26,N225,100\n");
    const QuoteDataset data = load_quotes(path);
    REQUIRE(data.rows.size() == 1);
    REQUIRE(data.rows[0].index_id == "N225");
    REQUIRE(data.rows[0].open == 14700.0);
    REQUIRE(data.diagnostics.size() == 4);
    bool saw_nonpositive = false, saw_duplicate = false;
    for (const auto& d : data.diagnostics) {
        if (d.message.find("nonpositive") != std::string::npos) saw_nonpositive = true;
        if (d.message.find("duplicate") != std::string::npos) saw_duplicate = true;
    }
    REQUIRE(saw_nonpositive);
    REQUIRE(saw_duplicate);
}

TEST_CASE("load_quotes fails only when no valid row remains") {
    const std::string path = write_temp("quotes_empty.csv",
                                        "date,index_id,open,close\n"
                                        "bad,N225,1,1\n");
    REQUIRE_THROWS_AS(load_quotes(path), std::runtime_error);
}

TEST_CASE("compute_returns matches hand arithmetic") {
    const std::string path = write_temp("quotes_ret.csv",
                                        "date,index_id,open,close\n"
                                        "2013-05-22,N225,100,105\n"
                                        "2013-05-23,N225,14700,13700\n"
                                        "2013-05-24,N225,105,104\n");
    const QuoteDataset data = load_quotes(path);

    const auto oc = compute_returns(data, ReturnKind::OpenClose);
    REQUIRE(oc.size() == 1);
    REQUIRE(oc[0].entries.size() == 3);
    REQUIRE(oc[0].entries[0].second == Catch::Approx(0.05).epsilon(1e-12));
    REQUIRE(oc[0].entries[1].second == Catch::Approx(-1000.0 / 14700.0).epsilon(1e-12));

    const auto co = compute_returns(data, ReturnKind::CloseOpen);
    REQUIRE(co[0].entries.size() == 2);
    // close 105 on day 1 -> open 14700 on day 2
    REQUIRE(co[0].entries[0].second == Catch::Approx((14700.0 - 105.0) / 105.0).epsilon(1e-12));
    // close 13700 -> open 105
    REQUIRE(co[0].entries[1].second == Catch::Approx((105.0 - 13700.0) / 13700.0).epsilon(1e-12));

    const auto log_oc = compute_returns(data, ReturnKind::OpenClose, ReturnConvention::Log);
    REQUIRE(log_oc[0].entries[0].second == Catch::Approx(std::log(1.05)).epsilon(1e-12));
}

TEST_CASE("zero overnight move gives a zero close-open return") {
    const std::string path = write_temp("quotes_zero.csv",
                                        "date,index_id,open,close\n"
                                        "2013-05-22,X,90,100\n"
                                        "2013-05-23,X,100,101\n");
    const auto co = compute_returns(load_quotes(path), ReturnKind::CloseOpen);
    REQUIRE(co[0].entries[0].second == 0.0);
}

TEST_CASE("change_blindness constructed oracle: large moves copied, small random") {
    Rng rng(11);
    std::vector<double> cond, resp;
    for (int i = 0; i < 20000; ++i) {
        const double c = 0.08 * (rand_unit(rng) - 0.5);
        double r;
        if (std::abs(c) > 0.02) {
            r = c > 0 ? 0.01 : -0.01;
        } else {
            r = rand_sign(rng) * 0.01;
        }
        cond.push_back(c);
        resp.push_back(r);
    }
    const auto bins = change_blindness(series_from(cond), series_from(resp),
                                       {0.0, 0.01, 0.02, 0.03, 0.04});
    REQUIRE(bins.bins[2].probability.value() == 1.0);
    REQUIRE(bins.bins[3].probability.value() == 1.0);
    long long total = 0;
    for (const auto& b : bins.bins) total += b.count;
    REQUIRE(total == bins.aligned_pairs);
}

TEST_CASE("independent sign series concentrate near one half") {
    Rng rng(21);
    std::vector<double> cond, resp;
    for (int i = 0; i < 100000; ++i) {
        cond.push_back(rand_sign(rng) * (0.001 + 0.03 * rand_unit(rng)));
        resp.push_back(rand_sign(rng) * 0.01);
    }
    const auto bins = change_blindness(series_from(cond), series_from(resp),
                                       {0.0, 0.008, 0.016, 0.024, 0.032});
    for (const auto& b : bins.bins) {
        REQUIRE(b.count > 0);
        REQUIRE(*b.probability > 0.47);
        REQUIRE(*b.probability < 0.53);
    }
}

TEST_CASE("a single aligned matching day yields probability one with count one") {
    const auto bins = change_blindness(series_from({0.01}), series_from({0.02}), {0.0, 0.05});
    REQUIRE(bins.bins[0].count == 1);
    REQUIRE(bins.bins[0].probability.value() == 1.0);
}

TEST_CASE("sign-agreement is invariant under a simultaneous sign flip") {
    Rng rng(31);
    std::vector<double> cond, resp, cond_f, resp_f;
    for (int i = 0; i < 5000; ++i) {
        cond.push_back(0.05 * (rand_unit(rng) - 0.5));
        resp.push_back(0.05 * (rand_unit(rng) - 0.5));
        cond_f.push_back(-cond.back());
        resp_f.push_back(-resp.back());
    }
    const std::vector<double> edges = {0.0, 0.01, 0.02, 0.03};
    const auto a = change_blindness(series_from(cond), series_from(resp), edges);
    const auto b = change_blindness(series_from(cond_f), series_from(resp_f), edges);
    for (std::size_t i = 0; i < a.bins.size(); ++i) {
        REQUIRE(a.bins[i].count == b.bins[i].count);
        REQUIRE(a.bins[i].probability == b.bins[i].probability);
    }
}

TEST_CASE("zero returns are dropped, never assigned a sign") {
    const auto bins = change_blindness(series_from({0.01, 0.0, 0.02}), series_from({0.01, 0.01, 0.0}),
                                       {0.0, 0.05});
    REQUIRE(bins.bins[0].count == 1);
    REQUIRE(bins.dropped_zero == 2);
}

TEST_CASE("no date overlap is an error") {
    ReturnSeries a = series_from({0.01, 0.02});
    ReturnSeries b;
    b.entries.emplace_back("2099-01-01", 0.01);
    REQUIRE_THROWS_AS(change_blindness(a, b, {0.0, 0.05}), std::runtime_error);
}

TEST_CASE("empty bins carry no probability") {
    const auto bins = change_blindness(series_from({0.001}), series_from({0.001}), {0.0, 0.01, 0.02});
    REQUIRE_FALSE(bins.bins[1].probability.has_value());
}

TEST_CASE("oscillator output reproduces the large-move/small-move dichotomy") {
    IafParams params;
    params.threshold = 0.05;
    params.noise_sigma = 0.03;
    IafState state({{"src", 1.0, 0.0}, {"dst", 1.0, 0.0}}, params);
    state.set_coupling(1, 0, 1.0);
    state.set_coupling(0, 1, 0.0);  // one-way transmission

    IafRun run = run_iaf(state, 60000, 314);
    // condition next-day target returns on today's source move magnitude
    std::vector<double> cond, resp;
    for (std::size_t t = 0; t + 1 < run.returns.size(); ++t) {
        cond.push_back(run.returns[t][0]);
        resp.push_back(run.returns[t + 1][1]);
    }
    const auto bins = change_blindness(series_from(cond), series_from(resp),
                                       {0.0, 0.02, 0.05, 0.08, 0.15});
    REQUIRE(bins.bins[0].count > 100);
    REQUIRE(bins.bins[3].count > 100);
    const double small = *bins.bins[0].probability;
    const double large = *bins.bins[3].probability;
    REQUIRE(small < 0.58);
    REQUIRE(large > small + 0.05);
}
