// Command-line driver: every simulator and analysis in the library as a
// subcommand with seeded reproducibility and plot-ready CSV output.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "contagion/decoupling.hpp"
#include "contagion/game.hpp"
#include "contagion/iaf.hpp"
#include "contagion/io.hpp"
#include "contagion/market_data.hpp"
#include "contagion/opinion.hpp"
#include "contagion/rng.hpp"
#include "contagion/scenario.hpp"

namespace fs = std::filesystem;
using namespace contagion;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonOpts {
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    long long steps = 1000;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required = false) {
    auto* c = cmd->add_option("--config", opts.config_path, "scenario config file");
    if (config_required) c->required();
    cmd->add_option("--seed", opts.seed, "RNG seed");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--steps", opts.steps, "number of steps to simulate");
}

KvConfig load_config_or_empty(const CommonOpts& opts) {
    if (opts.config_path.empty()) return {};
    if (!fs::exists(opts.config_path))
        throw ConfigError("config file not found: " + opts.config_path);
    return load_kv(opts.config_path);
}

std::string dir_str(const std::optional<Direction>& d) {
    if (!d.has_value()) return "";
    return *d == Direction::Up ? "up" : "down";
}

struct RunContext {
    std::string subcommand;
    std::string config_hash;
    std::uint64_t seed = 0;
    fs::path out_dir;
    RunManifest manifest;

    RunContext(const std::string& name, const CommonOpts& opts, const KvConfig& cfg,
               const std::string& extra = "") {
        subcommand = name;
        seed = opts.seed;
        out_dir = opts.out_dir;
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        std::ostringstream material;
        material << name << '\n' << cfg.raw << '\n' << opts.seed << '\n' << opts.steps << '\n' << extra;
        config_hash = hex64(fnv1a(material.str()));
        manifest.subcommand = name;
        manifest.config_hash = config_hash;
        manifest.seed = seed;
        manifest.rng_algorithm = kRngAlgorithm;
        manifest.started_at = now_iso8601();
    }

    CsvWriter open_csv(const std::string& filename) {
        const fs::path path = out_dir / filename;
        CsvWriter csv(path.string());
        csv.comment("contagion v" + std::string(kToolVersion) + " subcommand=" + subcommand +
                    " seed=" + std::to_string(seed) + " config_hash=" + config_hash +
                    " rng=" + kRngAlgorithm);
        manifest.outputs.push_back(filename);
        return csv;
    }

    void finish() {
        manifest.finished_at = now_iso8601();
        write_manifest(manifest, out_dir / "manifest.json");
    }
};

int run_game_sim(const CommonOpts& opts, GameVariant variant, bool per_agent) {
    const KvConfig cfg = load_config_or_empty(opts);
    GameConfig gc = load_game_config(cfg);
    gc.variant = variant;
    gc.seed = opts.seed;
    const char* name = variant == GameVariant::MinorityGame ? "mg-sim" : "dollar-sim";
    RunContext ctx(name, opts, cfg, per_agent ? "per-agent" : "");

    const auto records = run_game(gc, opts.steps);
    CsvWriter csv = ctx.open_csv("game.csv");
    std::vector<std::string> header = {"t", "A", "move"};
    if (per_agent)
        for (int i = 0; i < gc.n_agents; ++i) header.push_back("a" + std::to_string(i));
    csv.row(header);
    for (const StepRecord& rec : records) {
        std::vector<std::string> row = {std::to_string(rec.t), std::to_string(rec.imbalance),
                                        std::to_string(rec.move)};
        if (per_agent)
            for (std::int8_t a : rec.actions) row.push_back(std::to_string(static_cast<int>(a)));
        csv.row(row);
    }
    csv.close();
    ctx.finish();
    return 0;
}

int run_decoupling_scan(const CommonOpts& opts) {
    const KvConfig cfg = load_config_or_empty(opts);
    GameConfig gc = load_game_config(cfg);
    gc.seed = opts.seed;
    RunContext ctx("decoupling-scan", opts, cfg);

    const ScanResult scan = scan_predictive_days(gc, opts.steps);
    CsvWriter csv = ctx.open_csv("scan.csv");
    csv.row({"t", "a_coupled", "a_decoupled", "a_decoupled_ahead", "flag_eq2", "oracle_direction",
             "run_length"});
    for (const ScanRecord& rec : scan.records)
        csv.row({std::to_string(rec.t), std::to_string(rec.a_coupled), std::to_string(rec.a_decoupled),
                 std::to_string(rec.a_decoupled_ahead), dir_str(rec.flag), dir_str(rec.oracle),
                 std::to_string(rec.run_length)});
    csv.close();

    std::cerr << "predictive days: " << scan.predictive_days.size() << ", condition fired "
              << scan.flag_count << " times, oracle-confirmed " << scan.flag_confirmed_count << "\n";
    ctx.finish();
    return 0;
}

int run_iaf_sim(const CommonOpts& opts) {
    const KvConfig cfg = load_config_or_empty(opts);
    if (opts.config_path.empty()) throw ConfigError("iaf-sim: --config is required");
    IafState state = load_iaf_network(cfg);
    RunContext ctx("iaf-sim", opts, cfg);

    const IafRun run = run_iaf(state, opts.steps, opts.seed);
    CsvWriter csv = ctx.open_csv("returns.csv");
    std::vector<std::string> header = {"t"};
    for (const IndexMeta& meta : state.metas()) header.push_back(meta.id);
    csv.row(header);
    for (std::size_t t = 0; t < run.returns.size(); ++t) {
        std::vector<std::string> row = {std::to_string(t)};
        for (double r : run.returns[t]) row.push_back(format_double(r));
        csv.row(row);
    }
    csv.close();
    ctx.finish();
    return 0;
}

int run_quake_trace(const CommonOpts& opts, const std::string& origin_id, double shock,
                    long long horizon) {
    const KvConfig cfg = load_config_or_empty(opts);
    if (opts.config_path.empty()) throw ConfigError("quake-trace: --config is required");
    IafState state = load_iaf_network(cfg);
    std::ostringstream extra;
    extra << origin_id << ' ' << shock << ' ' << horizon;
    RunContext ctx("quake-trace", opts, cfg, extra.str());

    std::size_t origin = 0;
    if (!origin_id.empty()) {
        const auto found = state.find_index(origin_id);
        if (!found) throw ConfigError("quake-trace: unknown origin index '" + origin_id + "'");
        origin = *found;
    }
    const CascadeTrace trace = trace_quake(state, origin, shock, horizon, opts.seed);
    CsvWriter csv = ctx.open_csv("cascade.csv");
    csv.row({"t", "source", "target", "stress"});
    for (const FiringEvent& ev : trace.events)
        csv.row({std::to_string(ev.t), state.metas()[static_cast<std::size_t>(ev.source)].id,
                 state.metas()[static_cast<std::size_t>(ev.target)].id, format_double(ev.stress)});
    csv.close();
    ctx.finish();
    return 0;
}

int run_opinion_sim(const CommonOpts& opts) {
    const KvConfig cfg = load_config_or_empty(opts);
    const OpinionScenario scenario = load_opinion_scenario(cfg);
    RunContext ctx("opinion-sim", opts, cfg);

    SentimentState state{baseline_matrix(scenario.baseline, scenario.params.k_max(), scenario.tie_prob)};
    state.bullishness = scenario.b0;
    state.bullishness_prev = scenario.b0;
    Rng rng(opts.seed);
    std::vector<DayRecord> days;
    days.reserve(static_cast<std::size_t>(opts.steps));
    for (long long t = 0; t < opts.steps; ++t)
        days.push_back(coupled_step(state, scenario.params, scenario.noise ? &rng : nullptr));
    const auto events = detect_tipping(days, scenario.tipping_upper, scenario.tipping_lower);

    CsvWriter csv = ctx.open_csv("days.csv");
    csv.row({"t", "B", "RB", "sigma", "r", "tipping_flag"});
    std::size_t ev = 0;
    for (const DayRecord& day : days) {
        std::string flag;
        if (ev < events.size() && events[ev].t == day.t) {
            flag = events[ev].kind == TippingKind::UpperReflection ? "upper" : "lower";
            ++ev;
        }
        csv.row({std::to_string(day.t), format_double(day.bullishness),
                 format_double(day.bullishness_change), format_double(day.sigma),
                 format_double(day.r), flag});
    }
    csv.close();
    ctx.finish();
    return 0;
}

struct BlindnessOpts {
    std::string input;
    std::string cond_index;
    std::string resp_index;
    std::string cond_kind = "openclose";
    std::string resp_kind = "closeopen";
    std::string edges = "0.0,0.005,0.01,0.02,0.04,0.08";
    std::string lag = "same";
    std::string bin_by = "magnitude";
    bool log_returns = false;
};

int run_change_blindness(const CommonOpts& opts, const BlindnessOpts& b) {
    if (!fs::exists(b.input)) throw ConfigError("change-blindness: input file not found: " + b.input);
    std::ostringstream extra;
    extra << b.input << ' ' << b.cond_index << ' ' << b.resp_index << ' ' << b.cond_kind << ' '
          << b.resp_kind << ' ' << b.edges << ' ' << b.lag << ' ' << b.bin_by << ' ' << b.log_returns;
    RunContext ctx("change-blindness", opts, {}, extra.str());

    auto kind_of = [](const std::string& s) {
        if (s == "openclose") return ReturnKind::OpenClose;
        if (s == "closeopen") return ReturnKind::CloseOpen;
        throw ConfigError("change-blindness: return kind must be openclose or closeopen");
    };
    const auto convention = b.log_returns ? ReturnConvention::Log : ReturnConvention::Simple;
    const QuoteDataset data = load_quotes(b.input);
    for (const LoadDiagnostic& d : data.diagnostics)
        std::cerr << b.input << ":" << d.line << ": " << d.message << "\n";

    auto find_series = [](const std::vector<ReturnSeries>& all, const std::string& id) -> const ReturnSeries& {
        for (const ReturnSeries& s : all)
            if (id.empty() || s.index_id == id) return s;
        throw ConfigError("change-blindness: index '" + id + "' not in dataset");
    };
    const auto cond_all = compute_returns(data, kind_of(b.cond_kind), convention);
    const auto resp_all = compute_returns(data, kind_of(b.resp_kind), convention);
    const ReturnSeries& cond = find_series(cond_all, b.cond_index);
    const ReturnSeries& resp = find_series(resp_all, b.resp_index);

    const auto edges = parse_double_list(b.edges);
    const auto lag = b.lag == "next" ? AlignmentLag::NextDay : AlignmentLag::SameDay;
    const auto bin_by = b.bin_by == "signed" ? BinBy::Signed : BinBy::Magnitude;
    const ConditionalBins bins = change_blindness(cond, resp, edges, lag, bin_by);

    CsvWriter csv = ctx.open_csv("bins.csv");
    csv.comment("conditioning=" + cond.index_id + " kind=" + b.cond_kind + " response=" + resp.index_id +
                " kind=" + b.resp_kind + " lag=" + b.lag + " bin_by=" + b.bin_by +
                " convention=" + (b.log_returns ? std::string("log") : std::string("simple")));
    csv.row({"bin_lo", "bin_hi", "count", "probability"});
    for (const ConditionalBin& bin : bins.bins)
        csv.row({format_double(bin.lo), format_double(bin.hi), std::to_string(bin.count),
                 bin.probability.has_value() ? format_double(*bin.probability) : ""});
    csv.close();
    ctx.finish();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"contagion: synchronized-decision-making market simulators"};
    app.require_subcommand(1);

    CommonOpts mg_opts, dollar_opts, scan_opts, iaf_opts, quake_opts, opinion_opts, blind_opts;
    bool mg_per_agent = false, dollar_per_agent = false;

    auto* mg = app.add_subcommand("mg-sim", "simulate the Minority Game");
    add_common(mg, mg_opts);
    mg->add_flag("--per-agent", mg_per_agent, "emit per-agent action columns");

    auto* dollar = app.add_subcommand("dollar-sim", "simulate the $-Game");
    add_common(dollar, dollar_opts);
    dollar->add_flag("--per-agent", dollar_per_agent, "emit per-agent action columns");

    auto* scan = app.add_subcommand("decoupling-scan", "scan an MG run for predictive days");
    add_common(scan, scan_opts);

    auto* iaf = app.add_subcommand("iaf-sim", "run the coupled IAF index network");
    add_common(iaf, iaf_opts, true);

    auto* quake = app.add_subcommand("quake-trace", "trace a price-quake cascade");
    add_common(quake, quake_opts, true);
    std::string origin_id;
    double shock = -0.07;
    long long horizon = 100;
    quake->add_option("--origin", origin_id, "id of the shocked index (default: first)");
    quake->add_option("--shock", shock, "initial return injected at the origin");
    quake->add_option("--horizon", horizon, "maximum steps to trace");

    auto* opinion = app.add_subcommand("opinion-sim", "run the sentiment feedback loop");
    add_common(opinion, opinion_opts);

    auto* blind = app.add_subcommand("change-blindness", "conditional sign-agreement analysis");
    add_common(blind, blind_opts);
    BlindnessOpts bopts;
    blind->add_option("--input", bopts.input, "quotes CSV (date,index_id,open,close)")->required();
    blind->add_option("--cond-index", bopts.cond_index, "conditioning index id");
    blind->add_option("--resp-index", bopts.resp_index, "response index id");
    blind->add_option("--cond-kind", bopts.cond_kind, "openclose|closeopen");
    blind->add_option("--resp-kind", bopts.resp_kind, "openclose|closeopen");
    blind->add_option("--edges", bopts.edges, "comma-separated bin edges");
    blind->add_option("--lag", bopts.lag, "same|next");
    blind->add_option("--bin-by", bopts.bin_by, "magnitude|signed");
    blind->add_flag("--log-returns", bopts.log_returns, "use log returns");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (mg->parsed()) return run_game_sim(mg_opts, GameVariant::MinorityGame, mg_per_agent);
        if (dollar->parsed()) return run_game_sim(dollar_opts, GameVariant::DollarGame, dollar_per_agent);
        if (scan->parsed()) return run_decoupling_scan(scan_opts);
        if (iaf->parsed()) return run_iaf_sim(iaf_opts);
        if (quake->parsed()) return run_quake_trace(quake_opts, origin_id, shock, horizon);
        if (opinion->parsed()) return run_opinion_sim(opinion_opts);
        if (blind->parsed()) return run_change_blindness(blind_opts, bopts);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
