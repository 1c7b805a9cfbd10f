#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ctlab/per_table.hpp"
#include "ctlab/phy.hpp"

namespace ctlab {

struct Topology {
    size_t n_nodes = 0;
    // Path gain in dB, symmetric; below-sensitivity entries may stay absent.
    std::map<std::pair<size_t, size_t>, double> link_gain_db;
    size_t initiator = 0;                // dissemination source / collection sink
    std::vector<size_t> sources;         // collection traffic sources
    std::vector<size_t> destinations;    // dissemination receivers

    void set_gain(size_t a, size_t b, double gain_db);
    std::optional<double> gain(size_t from, size_t to) const;
};

// Grid topology with log-distance path loss and seeded per-link shadowing.
Topology make_grid_topology(size_t rows, size_t cols, double spacing_loss_db,
                            double shadowing_db, uint64_t seed);

enum class ProtocolKind {
    Glossy,
    RoF,
    RoF_SC,
    Crystal,
    Crystal_CH,
    Crystal_CH_ND,
};

const char* protocol_name(ProtocolKind kind);
bool protocol_from_name(const std::string& name, ProtocolKind* out);
bool protocol_is_collection(ProtocolKind kind);

enum class TriggerMode { RxTx, RxTxTx };

struct ProtocolConfig {
    ProtocolKind kind = ProtocolKind::Glossy;
    int tx_n = 6;
    double flood_duration_ms = 100.0;
    double period_ms = 200.0;
    // Crystal sync / transmit / acknowledge phases.
    double crystal_duration_ms[3] = {20.0, 45.0, 15.0};
    double crystal_period_ms[3] = {30.0, 57.0, 27.0};
    double epoch_ms = 1000.0;
    int max_ta_pairs = 12;
    int max_silent_t = 2;
    std::vector<double> channels_ghz;  // filled from kind when empty
    TriggerMode trigger = TriggerMode::RxTx;
    double nd_threshold_dbm = -70.0;
    double capture_threshold_db = 3.0;   // 6 dB for BLE 2M
    double turnaround_us = 150.0;

    static ProtocolConfig defaults(ProtocolKind kind, PhyMode mode = PhyMode::BLE_1M);
};

enum class JammingLevel { None, Mild, Strong };

const char* jamming_name(JammingLevel level);
bool jamming_from_name(const std::string& name, JammingLevel* out);

struct JammingProfile {
    JammingLevel level = JammingLevel::None;
    double power_mw = 0.0;
    double burst_ms = 0.0;
    double period_ms = 13.0;
    double jitter_ms = 1.5;         // per-burst start jitter ("approximately" periodic)
    // A burst is a train of emulated Wi-Fi frames with short idle gaps, so
    // sufficiently short packets can slip between frames.
    double frame_ms = 1.2;
    double gap_ms = 0.5;
    bool all_channels = false;      // independent burst phase per channel when set
    double coupling_db = -85.0;     // jammer power to received interference
    // The jammers around a node occupy specific Wi-Fi channels, so a given
    // protocol channel is either inside a local jammer's transmit mask
    // (full coupling, probability cover_prob) or only hit by the mask
    // skirt (mask_db below full coupling). Drawn per (node, channel).
    double cover_prob = 0.7;
    double mask_db = 12.0;

    static JammingProfile preset(JammingLevel level);
};

struct RadioPowerModel {
    double tx_mw = 15.0;   // placeholder state powers, documented in README
    double rx_mw = 14.0;
    double idle_mw = 0.01;
};

struct FloodRuntimeConfig {
    double tx_power_dbm = 0.0;
    double noise_floor_dbm = -90.0;
    double sensitivity_dbm = -95.0;
    double sync_jitter_us = 0.2;     // per-transmission start jitter
    RadioPowerModel power;
};

struct FloodReport {
    double reliability = 0.0;
    std::optional<double> latency_ms;  // over delivered messages only
    double energy_mj_per_node = 0.0;
    uint64_t generated = 0;
    uint64_t delivered = 0;
    uint64_t lost = 0;
};

// Discrete-slot simulation of one protocol over n_rounds flooding rounds
// (dissemination) or epochs (collection). Deterministic in all inputs.
FloodReport simulate_flood(const ProtocolConfig& protocol, const Topology& topo,
                           const JammingProfile& jamming, const PhyConfig& phy,
                           size_t payload_bytes, size_t n_rounds, uint64_t seed,
                           const PerTable& table, const FloodRuntimeConfig& runtime = {});

}  // namespace ctlab
