// cms: Cloud-MANET simulator command line.
//
// Subcommands: run, compare-discovery, emit-tables, sweep. All file outputs
// are written atomically (temp file + rename). Verbosity is controlled by
// the CMS_LOG environment variable (error|warn|info|debug).

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "cms/config.hpp"
#include "cms/engine.hpp"
#include "cms/errors.hpp"
#include "cms/io.hpp"
#include "cms/log.hpp"
#include "cms/transport.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::vector<double> parse_double_list(const std::string& text, const std::string& flag) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const double v = std::stod(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw cms::ConfigInvalid(flag, "expected a comma-separated number list, got \"" +
                                               text + "\"");
        }
    }
    if (out.empty()) throw cms::ConfigInvalid(flag, "empty list");
    return out;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& flag) {
    std::vector<int> out;
    for (const double v : parse_double_list(text, flag)) {
        if (v != static_cast<int>(v)) throw cms::ConfigInvalid(flag, "expected integers");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

// "t=0.1" .. "t=1.0" column labels; one decimal when exact, %g otherwise.
std::string t_label(double t) {
    const double scaled = t * 10.0;
    char buf[32];
    if (scaled == std::floor(scaled)) {
        std::snprintf(buf, sizeof(buf), "%.1f", t);
    } else {
        std::snprintf(buf, sizeof(buf), "%g", t);
    }
    return buf;
}

std::string metric_cell(const std::optional<double>& v) {
    return v ? cms::format_sig6(*v) : std::string();
}

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
};

cms::ScenarioConfig load_config(const CommonArgs& args) {
    cms::ScenarioConfig cfg = cms::load_scenario_config(args.config_path);
    if (args.seed) cfg.sim.seed = *args.seed;
    return cfg;
}

int cmd_run(const CommonArgs& common, const std::string& out_path,
            const std::string& journal_path, const std::string& csv_path) {
    const cms::ScenarioConfig cfg = load_config(common);
    cms::SimEngine engine(cfg);
    const cms::SimReport report = engine.run();
    cms::atomic_write_file(out_path, cms::report_to_json(report));
    cms::log_info("wrote report to " + out_path);
    if (!journal_path.empty()) {
        cms::atomic_write_file(journal_path, engine.cloud().journal_jsonl());
        cms::log_info("wrote message journal to " + journal_path);
    }
    if (!csv_path.empty()) {
        cms::atomic_write_file(csv_path, cms::report_to_csv(report));
    }
    return kExitOk;
}

int cmd_compare_discovery(const CommonArgs& common, int trials, const std::string& out_path) {
    const cms::ScenarioConfig cfg = load_config(common);
    const auto reports = cms::compare_discovery(cfg, trials);
    std::string csv = "strategy,avg_path_length,avg_stretch,success_rate\n";
    for (const auto& r : reports) {
        csv += std::string(cms::to_string(r.strategy)) + "," +
               metric_cell(r.metrics.avg_path_length) + "," + metric_cell(r.metrics.avg_stretch) +
               "," + cms::format_sig6(r.metrics.success_rate) + "\n";
    }
    cms::atomic_write_file(out_path, csv);
    cms::log_info("wrote discovery comparison to " + out_path);
    return kExitOk;
}

int cmd_emit_tables(const CommonArgs& common, const std::string& speeds_text,
                    const std::string& counts_text, const std::string& t_text,
                    const std::string& out_dir, int jobs) {
    const cms::ScenarioConfig cfg = load_config(common);
    const auto speeds = parse_double_list(speeds_text, "--speeds");
    const auto counts = parse_int_list(counts_text, "--counts");
    const auto t_grid = t_text.empty() ? cms::default_t_grid()
                                       : parse_double_list(t_text, "--t-grid");

    const auto samples = cms::measure_throughput(cfg, counts, speeds, t_grid, jobs);

    for (const double speed : speeds) {
        std::string csv = "devices";
        for (const double t : t_grid) csv += ",t=" + t_label(t);
        csv += "\n";
        for (const int count : counts) {
            csv += std::to_string(count);
            for (const double t : t_grid) {
                for (const auto& s : samples) {
                    if (s.speed == speed && s.device_count == count && s.t == t) {
                        csv += "," + cms::format_sig6(s.value);
                        break;
                    }
                }
            }
            csv += "\n";
        }
        char name[64];
        std::snprintf(name, sizeof(name), "speed_%g.csv", speed);
        const std::string path = out_dir + "/" + name;
        cms::atomic_write_file(path, csv);
        cms::log_info("wrote " + path);
    }
    return kExitOk;
}

int cmd_sweep(const CommonArgs& common, const std::string& param, const std::string& out_dir,
              int jobs) {
    const auto eq = param.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 >= param.size()) {
        throw cms::ConfigInvalid("--param", "expected key=v1,v2,..., got \"" + param + "\"");
    }
    const std::string key = param.substr(0, eq);
    std::vector<std::string> values;
    {
        std::stringstream ss(param.substr(eq + 1));
        std::string item;
        while (std::getline(ss, item, ',')) values.push_back(item);
    }
    if (values.empty()) throw cms::ConfigInvalid("--param", "empty value list");

    const cms::ScenarioConfig base = load_config(common);
    // validate every override up front so a bad value fails before any run
    std::vector<cms::ScenarioConfig> configs;
    for (const auto& value : values) {
        cms::ScenarioConfig cfg = base;
        cms::apply_override(cfg, key, value);
        configs.push_back(cfg);
    }

    std::vector<cms::SimReport> reports(configs.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&]() {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= configs.size()) return;
            reports[k] = cms::run_scenario(configs[k]);
        }
    };
    int workers = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, static_cast<int>(configs.size()));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::string file_key = key;
    for (char& c : file_key) {
        if (c == '.') c = '_';
    }
    std::string csv = "param,value,throughput_mbps,offered_messages,delivered_messages\n";
    for (std::size_t k = 0; k < configs.size(); ++k) {
        const std::string report_path = out_dir + "/" + file_key + "-" + values[k] + ".json";
        cms::atomic_write_file(report_path, cms::report_to_json(reports[k]));
        csv += key + "," + values[k] + "," + cms::format_sig6(reports[k].traffic.throughput_mbps) +
               "," + std::to_string(reports[k].traffic.offered_messages) + "," +
               std::to_string(reports[k].traffic.delivered_messages) + "\n";
    }
    cms::atomic_write_file(out_dir + "/sweep.csv", csv);
    cms::log_info("wrote sweep results to " + out_dir);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cloud-MANET simulator"};
    app.require_subcommand(1);

    CommonArgs common;
    std::uint64_t seed_value = 0;

    // run
    auto* run = app.add_subcommand("run", "Run one scenario and write the JSON report");
    std::string run_out, run_journal, run_csv;
    run->add_option("--config", common.config_path, "Scenario TOML file")->required();
    auto* run_seed = run->add_option("--seed", seed_value, "Override the scenario seed");
    run->add_option("--out", run_out, "Report JSON path")->required();
    run->add_option("--journal", run_journal, "Persist the message log as JSONL");
    run->add_option("--csv", run_csv, "Also write the per-tick samples as CSV");

    // compare-discovery
    auto* cmp = app.add_subcommand("compare-discovery",
                                   "Benchmark the three discovery strategies");
    int trials = 500;
    std::string cmp_out;
    cmp->add_option("--config", common.config_path, "Scenario TOML file")->required();
    auto* cmp_seed = cmp->add_option("--seed", seed_value, "Override the scenario seed");
    cmp->add_option("--trials", trials, "Discovery trials per strategy")
        ->check(CLI::PositiveNumber);
    cmp->add_option("--out", cmp_out, "Output CSV path")->required();

    // emit-tables
    auto* tables = app.add_subcommand("emit-tables", "Emit the throughput tables, one CSV per speed");
    std::string speeds_text = "10,20,50";
    std::string counts_text = "5,10,50";
    std::string t_text;
    std::string out_dir;
    int jobs = 0;
    tables->add_option("--config", common.config_path, "Scenario TOML file")->required();
    auto* tables_seed = tables->add_option("--seed", seed_value, "Override the scenario seed");
    tables->add_option("--speeds", speeds_text, "Comma-separated speeds in m/s");
    tables->add_option("--counts", counts_text, "Comma-separated device counts");
    tables->add_option("--t-grid", t_text, "Comma-separated offered-load multipliers");
    tables->add_option("--out-dir", out_dir, "Output directory")->required();
    tables->add_option("--jobs", jobs, "Worker threads (default: logical CPUs)");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Run the scenario across one parameter range");
    std::string param;
    std::string sweep_dir = "sweep_out";
    int sweep_jobs = 0;
    sweep->add_option("--config", common.config_path, "Scenario TOML file")->required();
    auto* sweep_seed = sweep->add_option("--seed", seed_value, "Override the scenario seed");
    sweep->add_option("--param", param, "Swept field, e.g. devices.count=5,10,50")->required();
    sweep->add_option("--out-dir", sweep_dir, "Output directory");
    sweep->add_option("--jobs", sweep_jobs, "Worker threads (default: logical CPUs)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (run->parsed()) {
            if (run_seed->count() > 0) common.seed = seed_value;
            return cmd_run(common, run_out, run_journal, run_csv);
        }
        if (cmp->parsed()) {
            if (cmp_seed->count() > 0) common.seed = seed_value;
            return cmd_compare_discovery(common, trials, cmp_out);
        }
        if (tables->parsed()) {
            if (tables_seed->count() > 0) common.seed = seed_value;
            return cmd_emit_tables(common, speeds_text, counts_text, t_text, out_dir, jobs);
        }
        if (sweep->parsed()) {
            if (sweep_seed->count() > 0) common.seed = seed_value;
            return cmd_sweep(common, param, sweep_dir, sweep_jobs);
        }
    } catch (const cms::ConfigInvalid& e) {
        std::cerr << "cms: config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const cms::SimError& e) {
        std::cerr << "cms: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "cms: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
