#include "ctlab/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "ctlab/channel.hpp"
#include "ctlab/errors.hpp"
#include "ctlab/flood.hpp"
#include "ctlab/link.hpp"
#include "ctlab/metrics.hpp"
#include "ctlab/rng.hpp"

namespace ctlab {

namespace {

using nlohmann::json;

json load_spec(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open spec file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("spec parse error in " + path + ": " + e.what());
    }
    if (!j.is_object())
        throw ConfigError("spec root must be a JSON object");
    return j;
}

// Unknown fields are config errors, never silent defaults.
void reject_unknown(const json& j, std::initializer_list<const char*> allowed,
                    const std::string& where)
{
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (item.key() == a) {
                known = true;
                break;
            }
        if (!known)
            throw ConfigError("unknown field '" + item.key() + "' in " + where);
    }
}

template <typename T>
T require(const json& j, const char* key, const std::string& where)
{
    if (!j.contains(key))
        throw ConfigError("missing field '" + std::string(key) + "' in " + where);
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("field '" + std::string(key) + "' in " + where + " has the wrong type");
    }
}

template <typename T>
T optional_or(const json& j, const char* key, T fallback, const std::string& where)
{
    if (!j.contains(key))
        return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("field '" + std::string(key) + "' in " + where + " has the wrong type");
    }
}

PhyMode parse_mode(const std::string& name, const std::string& where)
{
    PhyMode mode;
    if (!phy_mode_from_name(name, &mode))
        throw ConfigError("unknown phy '" + name + "' in " + where);
    return mode;
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot open " + path + " for writing");
    return out;
}

std::string fmt(double v, int digits = 6)
{
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return buf;
}

// Scenario snr_db is defined with the noise in the symbol bandwidth (the
// receiver's decision bandwidth); the channel itself spreads noise over the
// full simulation bandwidth, hence the samples-per-symbol conversion.
double sample_snr_db(double symbol_snr_db, const PhyConfig& phy)
{
    return symbol_snr_db - 10.0 * std::log10(static_cast<double>(phy.samples_per_symbol));
}

// CT scenario for a sweep grid point: transmitter 1 at cfo 0 (optionally
// heated), the others offset by multiples of the pair RFO at the configured
// power delta below it.
ChannelScenario sweep_scenario(size_t n_tx, double rfo_hz, double delta_p_db, double snr_db,
                               double temp_c, double slope_ppm)
{
    ChannelScenario sc;
    sc.snr_db = snr_db;
    sc.enforce_cfo_limit = false;  // sweep axes may probe beyond the standard bound
    for (size_t i = 0; i < n_tx; ++i) {
        TransmitterProfile tx;
        tx.cfo_hz = static_cast<double>(i) * rfo_hz;
        tx.amplitude = (i == 0) ? 1.0 : std::pow(10.0, -delta_p_db / 20.0);
        tx.temp_slope_ppm_per_c = slope_ppm;
        if (i == 0)
            tx.temperature_c = temp_c;
        sc.transmitters.push_back(tx);
    }
    return sc;
}

}  // namespace

void cmd_sweep(const std::string& spec_path, const std::string& out_path,
               const RunOptions& options)
{
    const json j = load_spec(spec_path);
    const std::string where = "sweep spec";
    reject_unknown(j,
                   {"phy", "n_tx", "rfo_hz", "delta_p_db", "snr_db", "temp_c", "payload_bytes",
                    "packets_per_point", "base_seed", "temp_slope_ppm_per_c"},
                   where);

    const auto phy_names = require<std::vector<std::string>>(j, "phy", where);
    const auto snrs = require<std::vector<double>>(j, "snr_db", where);
    const auto n_txs = optional_or<std::vector<size_t>>(j, "n_tx", {2}, where);
    const auto rfos = optional_or<std::vector<double>>(j, "rfo_hz", {1000.0}, where);
    const auto dps = optional_or<std::vector<double>>(j, "delta_p_db", {0.0}, where);
    const auto temps = optional_or<std::vector<double>>(j, "temp_c", {25.0}, where);
    const auto payloads = optional_or<std::vector<size_t>>(j, "payload_bytes", {30}, where);
    const size_t packets = optional_or<size_t>(j, "packets_per_point", 1000, where);
    const double slope = optional_or<double>(j, "temp_slope_ppm_per_c", -0.2, where);
    uint64_t base_seed = optional_or<uint64_t>(j, "base_seed", 1, where);
    if (options.seed_override)
        base_seed = *options.seed_override;

    if (phy_names.empty() || snrs.empty() || n_txs.empty() || rfos.empty() || dps.empty() ||
        temps.empty() || payloads.empty())
        throw ConfigError("sweep axes must be non-empty");
    if (packets < 100)
        throw ConfigError("packets_per_point must be at least 100");

    struct Point {
        PhyMode mode;
        size_t n_tx, payload;
        double rfo, dp, snr, temp;
    };
    std::vector<Point> grid;
    for (const auto& name : phy_names) {
        const PhyMode mode = parse_mode(name, where);
        for (size_t n_tx : n_txs)
            for (double rfo : rfos)
                for (double dp : dps)
                    for (double snr : snrs)
                        for (double temp : temps)
                            for (size_t payload : payloads)
                                grid.push_back({mode, n_tx, payload, rfo, dp, snr, temp});
    }

    std::vector<BatchMetrics> results(grid.size());
    std::atomic<size_t> done{0};
    parallel_for(grid.size(), options.threads, [&](size_t i) {
        const auto& p = grid[i];
        const PhyConfig phy = phy_config(p.mode);
        const auto scenario =
            sweep_scenario(p.n_tx, p.rfo, p.dp, sample_snr_db(p.snr, phy), p.temp, slope);
        const auto counters = run_batch(phy, scenario, p.payload, packets,
                                        derive_seed(base_seed, i));
        results[i] = classify(counters);
        const size_t d = ++done;
        if (options.progress)
            options.progress(d, grid.size());
    });

    auto out = open_out(out_path);
    out << "phy,n_tx,rfo_hz,delta_p_db,snr_db,temp_c,payload_bytes,n_packets,prr,per,plr,ber\n";
    for (size_t i = 0; i < grid.size(); ++i) {
        const auto& p = grid[i];
        const auto& m = results[i];
        out << phy_mode_name(p.mode) << "," << p.n_tx << "," << fmt(p.rfo) << "," << fmt(p.dp)
            << "," << fmt(p.snr) << "," << fmt(p.temp) << "," << p.payload << "," << m.n_packets
            << "," << fmt(m.prr) << "," << fmt(m.per) << "," << fmt(m.plr) << "," << fmt(m.ber)
            << "\n";
    }
}

void cmd_histogram(const std::string& spec_path, const std::string& out_prefix,
                   const RunOptions& options)
{
    const json j = load_spec(spec_path);
    const std::string where = "histogram spec";
    reject_unknown(j,
                   {"phy", "payload_bytes", "n_packets", "snr_db", "transmitters", "seed",
                    "min_errored_packets", "min_received_packets"},
                   where);

    const PhyMode mode = parse_mode(require<std::string>(j, "phy", where), where);
    const size_t payload = require<size_t>(j, "payload_bytes", where);
    const size_t n_packets = require<size_t>(j, "n_packets", where);
    const double snr = require<double>(j, "snr_db", where);
    uint64_t seed = optional_or<uint64_t>(j, "seed", 1, where);
    if (options.seed_override)
        seed = *options.seed_override;
    const uint64_t min_errored = optional_or<uint64_t>(j, "min_errored_packets", 1, where);
    const uint64_t min_received = optional_or<uint64_t>(j, "min_received_packets", 100, where);

    const PhyConfig phy = phy_config(mode);
    ChannelScenario sc;
    sc.snr_db = sample_snr_db(snr, phy);
    sc.enforce_cfo_limit = false;
    if (!j.contains("transmitters") || !j.at("transmitters").is_array() ||
        j.at("transmitters").empty())
        throw ConfigError("histogram spec needs a non-empty 'transmitters' array");
    for (const auto& t : j.at("transmitters")) {
        reject_unknown(t,
                       {"cfo_hz", "amplitude", "timing_offset_s", "temperature_c", "temp_ref_c",
                        "temp_slope_ppm_per_c"},
                       "transmitter entry");
        TransmitterProfile tx;
        tx.cfo_hz = optional_or<double>(t, "cfo_hz", 0.0, where);
        tx.amplitude = optional_or<double>(t, "amplitude", 1.0, where);
        tx.timing_offset_s = optional_or<double>(t, "timing_offset_s", 0.0, where);
        tx.temperature_c = optional_or<double>(t, "temperature_c", 25.0, where);
        tx.temp_ref_c = optional_or<double>(t, "temp_ref_c", 25.0, where);
        tx.temp_slope_ppm_per_c = optional_or<double>(t, "temp_slope_ppm_per_c", -0.2, where);
        sc.transmitters.push_back(tx);
    }

    const auto counters = run_batch(phy, sc, payload, n_packets, seed, {}, options.threads);
    if (options.progress)
        options.progress(1, 1);

    if (counters.received_errors < min_errored ||
        counters.received_ok + counters.received_errors < min_received)
        throw InsufficientDataError("not enough errored packets for a beating histogram (" +
                                    std::to_string(counters.received_errors) + " errored, " +
                                    std::to_string(counters.received_ok +
                                                   counters.received_errors) +
                                    " received)");

    const auto hist = histogram_from_counters(counters, phy.data_rate_bps);
    write_histogram_csv(out_prefix + ".histogram.csv", hist);

    RfoEstimatorConfig est_cfg;
    est_cfg.min_packets = min_received;
    const auto est = estimate_rfo(hist, est_cfg);
    write_rfo_json(out_prefix + ".rfo.json", est);
}

void cmd_tempsweep(const std::string& spec_path, const std::string& out_path,
                   const RunOptions& options)
{
    const json j = load_spec(spec_path);
    const std::string where = "tempsweep spec";
    reject_unknown(j,
                   {"phy", "payload_bytes", "packets_per_step", "snr_db", "temp_start_c",
                    "temp_stop_c", "temp_step_c", "heated_cfo_hz", "fixed_cfo_hz",
                    "temp_slope_ppm_per_c", "delta_p_db", "seed"},
                   where);

    const PhyMode mode = parse_mode(require<std::string>(j, "phy", where), where);
    const size_t payload = optional_or<size_t>(j, "payload_bytes", 250, where);
    const size_t packets = optional_or<size_t>(j, "packets_per_step", 400, where);
    const double snr = optional_or<double>(j, "snr_db", 14.0, where);
    const double t_start = optional_or<double>(j, "temp_start_c", 30.0, where);
    const double t_stop = optional_or<double>(j, "temp_stop_c", 75.0, where);
    const double t_step = optional_or<double>(j, "temp_step_c", 1.0, where);
    const double heated_cfo = optional_or<double>(j, "heated_cfo_hz", 10000.0, where);
    const double fixed_cfo = optional_or<double>(j, "fixed_cfo_hz", 0.0, where);
    const double slope = optional_or<double>(j, "temp_slope_ppm_per_c", -0.2, where);
    const double dp = optional_or<double>(j, "delta_p_db", 1.0, where);
    uint64_t seed = optional_or<uint64_t>(j, "seed", 1, where);
    if (options.seed_override)
        seed = *options.seed_override;
    if (t_step <= 0.0 || t_stop < t_start)
        throw ConfigError("temperature range is empty");

    const PhyConfig phy = phy_config(mode);
    std::vector<double> temps;
    for (double t = t_start; t <= t_stop + 1e-9; t += t_step)
        temps.push_back(t);

    struct Row {
        double temp, est_rfo, per;
    };
    std::vector<Row> rows(temps.size());
    std::atomic<size_t> done{0};
    parallel_for(temps.size(), options.threads, [&](size_t i) {
        ChannelScenario sc;
        sc.snr_db = sample_snr_db(snr, phy);
        sc.enforce_cfo_limit = false;
        TransmitterProfile heated;
        heated.cfo_hz = heated_cfo;
        heated.temperature_c = temps[i];
        heated.temp_ref_c = t_start;
        heated.temp_slope_ppm_per_c = slope;
        TransmitterProfile fixed;
        fixed.cfo_hz = fixed_cfo;
        fixed.amplitude = std::pow(10.0, -dp / 20.0);
        sc.transmitters = {heated, fixed};

        const auto counters = run_batch(phy, sc, payload, packets, derive_seed(seed, i));
        const auto metrics = classify(counters);
        double est_rfo = 0.0;
        try {
            const auto est = estimate_rfo(histogram_from_counters(counters, phy.data_rate_bps));
            if (!est.peaks.empty())
                est_rfo = est.peaks[0].freq_hz;
        } catch (const InsufficientDataError&) {
            // below the estimator floor: report 0 (no beating resolved)
        }
        rows[i] = {temps[i], est_rfo, metrics.per};
        const size_t d = ++done;
        if (options.progress)
            options.progress(d, temps.size());
    });

    auto out = open_out(out_path);
    out << "temp_c,est_rfo_hz,per\n";
    for (const auto& r : rows)
        out << fmt(r.temp) << "," << fmt(r.est_rfo) << "," << fmt(r.per) << "\n";
}

namespace {

Topology parse_topology(const json& jt, const std::string& where)
{
    reject_unknown(jt,
                   {"kind", "rows", "cols", "spacing_loss_db", "shadowing_db", "topo_seed",
                    "n_nodes", "links", "initiator", "sources", "destinations"},
                   where);
    Topology topo;
    const std::string kind = optional_or<std::string>(jt, "kind", "grid", where);
    if (kind == "grid") {
        const size_t rows = optional_or<size_t>(jt, "rows", 3, where);
        const size_t cols = optional_or<size_t>(jt, "cols", 4, where);
        topo = make_grid_topology(rows, cols,
                                  optional_or<double>(jt, "spacing_loss_db", 60.0, where),
                                  optional_or<double>(jt, "shadowing_db", 3.0, where),
                                  optional_or<uint64_t>(jt, "topo_seed", 7, where));
    } else if (kind == "explicit") {
        topo.n_nodes = require<size_t>(jt, "n_nodes", where);
        for (const auto& l : require<std::vector<json>>(jt, "links", where)) {
            if (!l.is_array() || l.size() != 3)
                throw ConfigError("each link must be [a, b, gain_db]");
            topo.set_gain(l[0].get<size_t>(), l[1].get<size_t>(), l[2].get<double>());
        }
    } else {
        throw ConfigError("topology kind must be 'grid' or 'explicit'");
    }
    topo.initiator = optional_or<size_t>(jt, "initiator", 0, where);
    if (topo.initiator >= topo.n_nodes)
        throw ConfigError("initiator is not a node");
    const std::vector<size_t> all_others = [&] {
        std::vector<size_t> v;
        for (size_t i = 0; i < topo.n_nodes; ++i)
            if (i != topo.initiator)
                v.push_back(i);
        return v;
    }();
    topo.destinations =
        optional_or<std::vector<size_t>>(jt, "destinations", all_others, where);
    topo.sources = optional_or<std::vector<size_t>>(jt, "sources", all_others, where);
    for (size_t d : topo.destinations)
        if (d >= topo.n_nodes)
            throw ConfigError("destination is not a node");
    for (size_t s : topo.sources)
        if (s >= topo.n_nodes)
            throw ConfigError("source is not a node");
    return topo;
}

}  // namespace

void cmd_flood(const std::string& spec_path, const std::string& out_path,
               const RunOptions& options)
{
    const json j = load_spec(spec_path);
    const std::string where = "flood spec";
    reject_unknown(j,
                   {"phy", "protocols", "jamming", "payload_bytes", "n_rounds", "seed",
                    "topology", "tx_n", "per_table_packets", "jam_coupling_db"},
                   where);

    const PhyMode mode = parse_mode(optional_or<std::string>(j, "phy", "BLE_1M", where), where);
    const auto protocol_names = require<std::vector<std::string>>(j, "protocols", where);
    const auto jamming_names =
        optional_or<std::vector<std::string>>(j, "jamming", {"none"}, where);
    const auto payloads = optional_or<std::vector<size_t>>(j, "payload_bytes", {8}, where);
    const size_t n_rounds = optional_or<size_t>(j, "n_rounds", 100, where);
    uint64_t seed = optional_or<uint64_t>(j, "seed", 1, where);
    if (options.seed_override)
        seed = *options.seed_override;
    if (!j.contains("topology"))
        throw ConfigError("missing field 'topology' in " + where);
    const Topology topo = parse_topology(j.at("topology"), "flood topology");
    const int tx_n = optional_or<int>(j, "tx_n", 6, where);
    const double jam_coupling = optional_or<double>(j, "jam_coupling_db", -85.0, where);

    PerTableSpec table_spec;
    table_spec.mode = mode;
    table_spec.payload_bytes = payloads;
    table_spec.packets_per_cell = optional_or<size_t>(j, "per_table_packets", 200, where);
    const PerTable table = load_or_build_per_table(table_spec, options.threads,
                                                   options.cache_dir);

    const PhyConfig phy = phy_config(mode);
    auto out = open_out(out_path);
    out << "protocol,phy,jamming,payload_bytes,reliability,latency_ms,energy_mj\n";
    size_t done = 0;
    const size_t total = protocol_names.size() * jamming_names.size() * payloads.size();
    for (const auto& pname : protocol_names) {
        ProtocolKind kind;
        if (!protocol_from_name(pname, &kind))
            throw ConfigError("unknown protocol '" + pname + "' in " + where);
        for (const auto& jname : jamming_names) {
            JammingLevel level;
            if (!jamming_from_name(jname, &level))
                throw ConfigError("unknown jamming level '" + jname + "' in " + where);
            for (size_t payload : payloads) {
                ProtocolConfig pc = ProtocolConfig::defaults(kind, mode);
                pc.tx_n = tx_n;
                JammingProfile jam = JammingProfile::preset(level);
                jam.coupling_db = jam_coupling;
                const auto report = simulate_flood(pc, topo, jam, phy, payload, n_rounds,
                                                   derive_seed(seed, done), table);
                out << pname << "," << phy_mode_name(mode) << "," << jname << "," << payload
                    << "," << fmt(report.reliability) << ","
                    << (report.latency_ms ? fmt(*report.latency_ms) : std::string())
                    << "," << fmt(report.energy_mj_per_node) << "\n";
                ++done;
                if (options.progress)
                    options.progress(done, total);
            }
        }
    }
}

}  // namespace ctlab
