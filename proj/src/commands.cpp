#include "sharecap/commands.hpp"

#include "sharecap/errors.hpp"
#include "sharecap/model.hpp"
#include "sharecap/planner.hpp"
#include "sharecap/probe.hpp"
#include "sharecap/sim.hpp"
#include "sharecap/table.hpp"
#include "sharecap/units.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace sharecap::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double quantity(const json& value, const char* what) {
    if (value.is_number()) return value.get<double>();
    if (value.is_string()) return parse_bits(value.get<std::string>());
    throw ConfigError(std::string("expected number or unit string for ") + what);
}

Discipline parse_discipline(const std::string& name) {
    if (name == "fair_sharing") return Discipline::fair_sharing;
    if (name == "proportional_fair") return Discipline::proportional_fair;
    throw ConfigError("unknown discipline '" + name + "'");
}

ChannelSpec parse_channel(const json& config) {
    if (!config.contains("channel")) throw ConfigError("missing 'channel'");
    const json& channel = config.at("channel");
    ChannelSpec spec;
    spec.capacity_C = quantity(channel.at("capacity"), "channel.capacity");
    spec.discipline = parse_discipline(channel.value("discipline", "fair_sharing"));
    if (spec.capacity_C <= 0.0) throw ConfigError("channel capacity must be positive");
    return spec;
}

ClassMix parse_mix(const json& config) {
    ClassMix mix;
    mix.channel = parse_channel(config);
    if (!config.contains("classes") || !config.at("classes").is_array() || config.at("classes").empty())
        throw ConfigError("missing or empty 'classes'");
    for (const json& entry : config.at("classes")) {
        UserClass cls;
        cls.label = entry.value("label", "class" + std::to_string(mix.classes.size()));
        cls.arrival_rate = entry.at("lambda").get<double>();
        cls.mean_size = quantity(entry.at("mean_size"), "mean_size");
        cls.channel_rate = entry.contains("channel_rate")
                               ? quantity(entry.at("channel_rate"), "channel_rate")
                               : mix.channel.capacity_C;
        mix.classes.push_back(cls);
    }
    return mix;
}

ServiceDistribution parse_distribution(const json& config) {
    ServiceDistribution dist;
    if (!config.contains("service_distribution")) return dist;
    const json& sd = config.at("service_distribution");
    const std::string kind = sd.value("kind", "exponential");
    if (kind == "exponential") {
        dist.kind = ServiceDistribution::Kind::exponential;
    } else if (kind == "deterministic") {
        dist.kind = ServiceDistribution::Kind::deterministic;
    } else if (kind == "bounded_pareto") {
        dist.kind = ServiceDistribution::Kind::bounded_pareto;
        dist.pareto_shape = sd.value("shape", 1.5);
        dist.pareto_cap_factor = sd.value("cap_factor", 100.0);
    } else {
        throw ConfigError("unknown service distribution '" + kind + "'");
    }
    return dist;
}

SimConfig parse_sim_config(const json& config) {
    SimConfig sim;
    sim.channel = parse_channel(config);
    if (!config.contains("classes") || config.at("classes").empty())
        throw ConfigError("missing or empty 'classes'");
    for (const json& entry : config.at("classes")) {
        SimClass cls;
        cls.label = entry.value("label", "class" + std::to_string(sim.classes.size()));
        cls.mean_size = quantity(entry.at("mean_size"), "mean_size");
        cls.channel_rate = entry.contains("channel_rate")
                               ? quantity(entry.at("channel_rate"), "channel_rate")
                               : sim.channel.capacity_C;
        cls.population = entry.value("population", 1000);
        if (entry.contains("think_rate")) {
            cls.think_rate = entry.at("think_rate").get<double>();
        } else if (entry.contains("lambda")) {
            // large-population approximation of a Poisson stream at lambda
            cls.think_rate = entry.at("lambda").get<double>() / cls.population;
        } else {
            throw ConfigError("class needs either 'think_rate' or 'lambda'");
        }
        sim.classes.push_back(cls);
    }
    sim.service = parse_distribution(config);
    sim.horizon = config.at("horizon").get<double>();
    sim.warmup = config.value("warmup", 0.1 * sim.horizon);
    sim.seed = config.value("seed", 1ULL);
    return sim;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << content;
}

void write_manifest(const fs::path& out_dir, const std::string& command, const json& config,
                    const std::map<std::string, std::string>& inputs,
                    const std::vector<std::string>& outputs) {
    json manifest;
    manifest["command"] = command;
    manifest["version"] = SHARECAP_VERSION;
    manifest["config"] = config;
    manifest["inputs"] = json::object();
    for (const auto& [path, digest] : inputs) manifest["inputs"][path] = digest;
    manifest["outputs"] = json::object();
    for (const auto& name : outputs) manifest["outputs"][name] = digest_file((out_dir / name).string());
    write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

std::string parse_format(const json& config) {
    const std::string format = config.value("format", "csv");
    if (format != "csv" && format != "json")
        throw ConfigError("unknown format '" + format + "', expected csv or json");
    return format;
}

// cells that survive a numeric round trip are emitted as JSON numbers
json cell_value(const std::string& text) {
    if (!text.empty()) {
        char* end = nullptr;
        const double value = std::strtod(text.c_str(), &end);
        if (end && *end == '\0' && format_number(value) == text) return value;
    }
    return text;
}

json table_to_json(const Table& table) {
    json rows = json::array();
    for (size_t r = 0; r < table.rows.size(); ++r) {
        json row = json::object();
        for (size_t c = 0; c < table.columns.size(); ++c)
            row[table.columns[c]] = cell_value(table.rows[r][c]);
        rows.push_back(row);
    }
    return rows;
}

// writes table.csv or table.json depending on the requested format and
// returns the file name actually written
std::string write_table(const fs::path& out_dir, const std::string& stem, const Table& table,
                        const std::string& format) {
    if (format == "json") {
        write_file(out_dir / (stem + ".json"), table_to_json(table).dump(2) + "\n");
        return stem + ".json";
    }
    std::ostringstream csv;
    write_csv(csv, table);
    write_file(out_dir / (stem + ".csv"), csv.str());
    return stem + ".csv";
}

std::string sanitize(std::string text) {
    for (char& c : text)
        if (c == ',' || c == '\n') c = ';';
    return text;
}

json stats_to_json(const SimStats& stats) {
    json out;
    out["busy_fraction"] = stats.busy_fraction;
    out["measured_span"] = stats.measured_span;
    out["total_completed"] = stats.total_completed;
    out["occupancy_seconds"] = stats.occupancy_time;
    if (!stats.occupancy_time.empty()) out["occupancy_probability"] = occupancy_histogram(stats);
    out["per_class"] = json::array();
    for (const auto& cls : stats.per_class) {
        out["per_class"].push_back({{"label", cls.label},
                                    {"completed", cls.completed},
                                    {"mean_transfer_time", cls.mean_transfer_time},
                                    {"mean_throughput", cls.mean_throughput},
                                    {"transfer_time_halfwidth", cls.transfer_time_halfwidth}});
    }
    return out;
}

} // namespace

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    json parsed;
    try {
        in >> parsed;
    } catch (const json::parse_error& error) {
        throw ConfigError("bad JSON in '" + path + "': " + error.what());
    }
    return parsed;
}

int cmd_predict(const json& config, const std::string& out_dir, std::ostream& diag) {
    fs::create_directories(out_dir);
    const ClassMix mix = parse_mix(config);
    const LoadPoint load = utilization(mix);
    const bool pf = mix.channel.discipline == Discipline::proportional_fair;
    const double lambda = mix.total_arrival_rate();

    Table table;
    table.columns = {"label", "lambda", "mean_size_bits", "channel_rate_bps",
                     "rho_i", "D_i_s", "v_i_bps"};
    double mean_time = 0.0;
    for (size_t i = 0; i < mix.classes.size(); ++i) {
        const auto& cls = mix.classes[i];
        const double rate = pf ? cls.channel_rate : mix.channel.capacity_C;
        const double d_i = mean_transfer_time(cls.mean_size, rate, load);
        const double v_i = per_user_throughput(pf ? cls.channel_rate : mix.channel.capacity_C, load);
        if (lambda > 0.0) mean_time += cls.arrival_rate / lambda * d_i;
        table.rows.push_back({cls.label, format_number(cls.arrival_rate),
                              format_number(cls.mean_size), format_number(cls.channel_rate),
                              format_number(load.per_class_rho[i]), format_number(d_i),
                              format_number(v_i)});
    }
    table.rows.push_back({"_total", format_number(lambda), "", "",
                          format_number(load.rho), format_number(mean_time), ""});

    const std::string written = write_table(out_dir, "predictions", table, parse_format(config));
    write_manifest(out_dir, "predict", config, {}, {written});
    diag << "rho = " << format_number(load.rho) << ", " << mix.classes.size() << " class(es)\n";
    return kExitOk;
}

int cmd_simulate(const json& config, const std::string& out_dir, std::ostream& diag) {
    fs::create_directories(out_dir);
    const SimConfig sim = parse_sim_config(config);
    const SimStats stats = run_simulation(sim);
    write_file(fs::path(out_dir) / "stats.json", stats_to_json(stats).dump(2) + "\n");
    write_manifest(out_dir, "simulate", config, {}, {"stats.json"});
    diag << "completed " << stats.total_completed << " flows, busy fraction "
         << format_number(stats.busy_fraction) << "\n";
    return kExitOk;
}

int cmd_validate(const json& sweep, const std::string& out_dir, std::ostream& diag) {
    fs::create_directories(out_dir);
    if (!sweep.contains("grid") || !sweep.at("grid").is_array() || sweep.at("grid").empty())
        throw ConfigError("sweep needs a nonempty 'grid'");
    std::vector<double> grid = sweep.at("grid").get<std::vector<double>>();
    for (size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < 0.0 || grid[i] >= 1.0) throw ConfigError("grid values must be in [0,1)");
        if (i > 0 && grid[i] <= grid[i - 1]) throw ConfigError("grid must be strictly increasing");
    }

    const double capacity = quantity(sweep.at("capacity"), "capacity");
    const Discipline discipline = parse_discipline(sweep.value("discipline", "proportional_fair"));
    const json& background = sweep.at("background");
    const double mean_size = quantity(background.at("mean_size"), "background.mean_size");
    // a large pool keeps the closed-loop source close to a Poisson stream;
    // small pools throttle arrivals while a probe holds the channel, which
    // biases measured speeds upward at high load
    const int population = background.value("population", 2000);
    const json& probe_cfg = sweep.at("probe");
    const double probe_rate = quantity(probe_cfg.at("channel_rate"), "probe.channel_rate");
    const double probe_size = probe_cfg.contains("size")
                                  ? quantity(probe_cfg.at("size"), "probe.size")
                                  : probe_cfg.value("size_factor", 100.0) * mean_size;
    const int probes_per_point = probe_cfg.value("count", 500);
    const double probe_utilization = probe_cfg.value("utilization", 0.01);
    if (probe_utilization <= 0.0 || probe_utilization >= 0.5)
        throw ConfigError("probe.utilization must be in (0, 0.5)");
    const double warmup_exclusion = probe_cfg.value("warmup_exclusion", 0.0);
    const std::uint64_t seed = sweep.value("seed", 1ULL);
    parse_format(sweep); // fail before the sweep runs, not after

    Table curve;
    curve.columns = {"rho", "predicted_v_bps", "measured_mean_v_bps", "halfwidth_bps",
                     "probes", "status"};
    Table scatter;
    scatter.columns = {"nominal_rho", "background_rho", "predicted_v_bps", "measured_v_bps",
                       "channel_rate_bps"};

    for (size_t point = 0; point < grid.size(); ++point) {
        const double rho = grid[point];
        const double predicted = (1.0 - rho) * probe_rate;
        try {
            SimConfig sim;
            sim.channel = {capacity, discipline};
            SimClass cls;
            cls.label = "background";
            cls.channel_rate = capacity;
            cls.mean_size = mean_size;
            cls.population = population;
            // probes are spaced far apart and never share with one another, so
            // a probe's slowdown comes from the background load alone; the
            // background offers the full nominal rho and the probe stream's
            // own utilization stays a second-order perturbation
            if (rho > 0.0) {
                const double lambda = rho * capacity / mean_size;
                // compensate the finite population for its own backlog so the
                // effective arrival rate lands on the target
                const double backlog = rho / (1.0 - rho);
                cls.think_rate = lambda / (population - backlog);
            } else {
                cls.think_rate = 0.0;
            }
            sim.classes.push_back(cls);
            sim.seed = seed + point;

            const double probe_duration = probe_size / (probe_rate * (1.0 - rho));
            ProbeSpec probe;
            probe.size = probe_size;
            probe.channel_rate = probe_rate;
            probe.count = probes_per_point;
            probe.interval = probe_size / (probe_rate * probe_utilization);
            probe.warmup_exclusion = warmup_exclusion;

            sim.warmup = 20.0 * mean_size / (capacity * (1.0 - rho));
            probe.first_time = sim.warmup;
            sim.horizon = probe.first_time + probe.interval * probes_per_point + 30.0 * probe_duration;

            const auto samples = run_speed_test(sim, probe);
            const double timed_bits = probe_size - warmup_exclusion;
            double sum_time = 0.0, sum_time_sq = 0.0;
            for (const auto& sample : samples) {
                const double timed_seconds = timed_bits / sample.measured_speed;
                sum_time += timed_seconds;
                sum_time_sq += timed_seconds * timed_seconds;
                scatter.rows.push_back({format_number(rho), format_number(sample.background_rho),
                                        format_number(sample.model_predicted_speed),
                                        format_number(sample.measured_speed),
                                        format_number(sample.channel_rate)});
            }
            const double n = static_cast<double>(samples.size());
            const double mean_time = sum_time / n;
            // ratio estimate: bits over mean timed transfer, which is what the
            // tagged-job transfer time predicts; a plain mean of speeds would
            // be biased upward at high load
            const double mean_speed = timed_bits / mean_time;
            const double time_variance =
                std::max(0.0, sum_time_sq / n - mean_time * mean_time);
            const double halfwidth =
                1.96 * mean_speed * std::sqrt(time_variance / n) / mean_time;
            curve.rows.push_back({format_number(rho), format_number(predicted),
                                  format_number(mean_speed), format_number(halfwidth),
                                  format_number(n), "ok"});
        } catch (const Error& error) {
            curve.rows.push_back({format_number(rho), format_number(predicted), "", "", "0",
                                  sanitize(error.what())});
            diag << "point rho=" << rho << " failed: " << error.what() << "\n";
        }
    }

    const std::string format = parse_format(sweep);
    const std::string curve_file = write_table(out_dir, "curve", curve, format);
    const std::string scatter_file = write_table(out_dir, "scatter", scatter, format);
    write_manifest(out_dir, "validate", sweep, {}, {curve_file, scatter_file});
    diag << grid.size() << " sweep point(s) done\n";
    return kExitOk;
}

namespace {

std::optional<double> optional_cell(const Table& table, size_t row, const std::string& name,
                                    bool is_quantity) {
    const std::string text = table.cell(row, name);
    if (text.empty()) return std::nullopt;
    if (is_quantity) return parse_bits(text);
    return std::stod(text);
}

DirectionDemand parse_direction(const Table& table, size_t row, const std::string& prefix) {
    DirectionDemand demand;
    if (auto rate = optional_cell(table, row, prefix + "_rate", true)) demand.channel_rate = *rate;
    demand.rho = optional_cell(table, row, prefix + "_rho", false);
    demand.users = optional_cell(table, row, prefix + "_users", false);
    demand.per_user_lambda = optional_cell(table, row, prefix + "_user_lambda", false);
    demand.mean_size = optional_cell(table, row, prefix + "_mean_size", true);
    return demand;
}

std::vector<TargetThreshold> parse_thresholds(const json& options) {
    std::vector<TargetThreshold> thresholds;
    if (options.contains("thresholds")) {
        for (const json& entry : options.at("thresholds")) {
            thresholds.push_back({entry.at("name").get<std::string>(),
                                  quantity(entry.at("download_floor"), "download_floor"),
                                  quantity(entry.at("upload_floor"), "upload_floor")});
        }
    }
    if (thresholds.empty()) {
        // the two VHCN plan targets
        thresholds.push_back({"gigabit", 1e9, 200e6});
        thresholds.push_back({"wireless", 150e6, 30e6});
    }
    return thresholds;
}

} // namespace

int cmd_plan(const std::string& areas_path, const json& options, const std::string& out_dir,
             std::ostream& diag) {
    fs::create_directories(out_dir);
    const Table areas = read_csv_file(areas_path);
    const auto thresholds = parse_thresholds(options);
    GrowthModel growth;
    growth.annual_growth = options.value("growth", 0.0);
    growth.horizon_years = options.value("years", 0);

    std::vector<std::pair<std::size_t, AreaRecord>> records;
    std::vector<BatchIssue> parse_issues;
    for (size_t row = 0; row < areas.rows.size(); ++row) {
        const size_t line = row + 2; // header is line 1
        try {
            AreaRecord record;
            record.area_id = areas.cell(row, "area_id");
            record.download = parse_direction(areas, row, "down");
            record.upload = parse_direction(areas, row, "up");
            records.push_back({line, std::move(record)});
        } catch (const std::exception& error) {
            parse_issues.push_back({line, error.what()});
        }
    }

    BatchResult result = evaluate_batch(records, thresholds, growth);
    result.issues.insert(result.issues.begin(), parse_issues.begin(), parse_issues.end());
    std::sort(result.issues.begin(), result.issues.end(),
              [](const BatchIssue& a, const BatchIssue& b) { return a.line < b.line; });

    Table verdicts;
    verdicts.columns = {"area_id", "threshold", "year", "download_v_mbps", "upload_v_mbps",
                        "classification", "binding_year"};
    for (const auto& verdict : result.verdicts) {
        for (const auto& year : verdict.years) {
            for (const auto& threshold : thresholds) {
                const auto binding = verdict.binding_year.at(threshold.name);
                verdicts.rows.push_back({verdict.area_id, threshold.name, std::to_string(year.year),
                                         format_mbps(year.download_v), format_mbps(year.upload_v),
                                         to_string(year.per_threshold.at(threshold.name)),
                                         binding ? std::to_string(*binding) : ""});
            }
        }
    }

    json summary;
    summary["areas_evaluated"] = result.verdicts.size();
    summary["issues"] = json::array();
    for (const auto& issue : result.issues) {
        summary["issues"].push_back({{"line", issue.line}, {"message", issue.message}});
        diag << "line " << issue.line << ": " << issue.message << "\n";
    }
    summary["counts"] = json::object();
    for (const auto& [name, by_year] : result.summary) {
        for (const auto& [year, counts] : by_year) {
            json entry = {{"meets", 0}, {"fails", 0}, {"saturated", 0}};
            for (const auto& [cls, count] : counts) entry[to_string(cls)] = count;
            summary["counts"][name][std::to_string(year)] = entry;
        }
    }

    const std::string written = write_table(out_dir, "verdicts", verdicts, parse_format(options));
    write_file(fs::path(out_dir) / "summary.json", summary.dump(2) + "\n");

    json config = options;
    config["areas_file"] = areas_path;
    write_manifest(out_dir, "plan", config, {{areas_path, digest_file(areas_path)}},
                   {written, "summary.json"});
    return kExitOk;
}

int cmd_infer_rho(const std::string& samples_path, const json& options, const std::string& out_dir,
                  std::ostream& diag) {
    fs::create_directories(out_dir);
    const Table table = read_csv_file(samples_path);
    RateTable rate_table;
    if (options.contains("rate_table"))
        for (const auto& [key, value] : options.at("rate_table").items())
            rate_table[std::stoi(key)] = quantity(value, "rate table entry");
    const double max_bad_fraction = options.value("max_bad_fraction", 0.1);

    std::vector<SpeedTestSample> samples;
    json per_sample = json::array();
    size_t malformed = 0;
    for (size_t row = 0; row < table.rows.size(); ++row) {
        const size_t line = row + 2;
        try {
            SpeedTestSample sample;
            const std::string speed = table.cell(row, "measured_v_bps").empty()
                                          ? table.cell(row, "measured_speed")
                                          : table.cell(row, "measured_v_bps");
            if (speed.empty()) throw ConfigError("missing measured speed");
            sample.measured_speed = parse_bits(speed);
            const std::string rate = table.cell(row, "channel_rate_bps").empty()
                                         ? table.cell(row, "channel_rate")
                                         : table.cell(row, "channel_rate_bps");
            if (!rate.empty()) {
                sample.channel_rate = parse_bits(rate);
            } else {
                const std::string mcs = table.cell(row, "mcs");
                if (mcs.empty()) throw ConfigError("missing channel rate and MCS");
                sample.channel_rate = map_mcs_to_rate(std::stoi(mcs), rate_table);
            }
            samples.push_back(sample);
        } catch (const std::exception& error) {
            ++malformed;
            diag << "line " << line << ": " << error.what() << "\n";
        }
    }

    if (table.rows.empty()) throw ConfigError("no sample rows in '" + samples_path + "'");
    if (static_cast<double>(malformed) >
        max_bad_fraction * static_cast<double>(table.rows.size()))
        throw ConfigError("too many malformed rows: " + std::to_string(malformed) + " of " +
                          std::to_string(table.rows.size()));

    const LoadInference inference = infer_load_from_samples(samples);
    for (const auto& sample : samples) {
        const bool inconsistent = sample.measured_speed > sample.channel_rate;
        per_sample.push_back(
            {{"measured_speed", sample.measured_speed},
             {"channel_rate", sample.channel_rate},
             {"rho", inconsistent ? json() : json(1.0 - sample.measured_speed / sample.channel_rate)},
             {"inconsistent", inconsistent}});
    }

    json report;
    report["rho_hat"] = inference.rho;
    report["samples_used"] = inference.samples_used;
    report["inconsistent"] = inference.inconsistent;
    report["malformed_rows"] = malformed;
    report["per_sample"] = per_sample;
    write_file(fs::path(out_dir) / "inference.json", report.dump(2) + "\n");

    json config = options;
    config["samples_file"] = samples_path;
    write_manifest(out_dir, "infer-rho", config, {{samples_path, digest_file(samples_path)}},
                   {"inference.json"});
    diag << "rho_hat = " << format_number(inference.rho) << " from " << inference.samples_used
         << " sample(s), " << inference.inconsistent << " inconsistent\n";
    return kExitOk;
}

int cmd_replay(const std::string& manifest_path, const std::string& out_dir, std::ostream& diag) {
    const json manifest = load_json_file(manifest_path);
    const std::string command = manifest.at("command").get<std::string>();
    const json& config = manifest.at("config");
    if (command == "predict") return cmd_predict(config, out_dir, diag);
    if (command == "simulate") return cmd_simulate(config, out_dir, diag);
    if (command == "validate") return cmd_validate(config, out_dir, diag);
    if (command == "plan")
        return cmd_plan(config.at("areas_file").get<std::string>(), config, out_dir, diag);
    if (command == "infer-rho")
        return cmd_infer_rho(config.at("samples_file").get<std::string>(), config, out_dir, diag);
    throw ConfigError("unknown command '" + command + "' in manifest");
}

int guarded(const std::function<int()>& body, std::ostream& diag) {
    try {
        return body();
    } catch (const UnstableLoad& error) {
        diag << "error: " << error.what() << "\n";
        return kExitUnstable;
    } catch (const ProbeStarved& error) {
        diag << "simulation error: " << error.what() << "\n";
        return kExitSimFailure;
    } catch (const Error& error) {
        diag << "error: " << error.what() << "\n";
        return kExitInput;
    } catch (const nlohmann::json::exception& error) {
        diag << "config error: " << error.what() << "\n";
        return kExitInput;
    } catch (const std::exception& error) {
        diag << "error: " << error.what() << "\n";
        return kExitInput;
    }
}

} // namespace sharecap::cli
