#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "ctlab/errors.hpp"
#include "ctlab/flood.hpp"
#include "ctlab/link.hpp"
#include "ctlab/per_table.hpp"

using namespace ctlab;

namespace {

// Small shared PER grid so the protocol tests stay fast.
const PerTable& test_table()
{
    static const PerTable table = [] {
        PerTableSpec spec;
        spec.payload_bytes = {8, 64};
        spec.snr_db = {-10, 0, 5, 10, 15, 20, 25, 30};
        spec.delta_p_db = {0, 1, 3, 6, 10};
        spec.rfo_hz = {1e3, 5e3, 20e3, 60e3, 150e3};
        spec.packets_per_cell = 80;
        return derive_per_table(spec);
    }();
    return table;
}

Topology two_node_topology()
{
    Topology topo;
    topo.n_nodes = 2;
    topo.set_gain(0, 1, -40.0);
    topo.initiator = 0;
    topo.destinations = {1};
    topo.sources = {1};
    return topo;
}

Topology grid_topology()
{
    Topology topo = make_grid_topology(3, 4, 60.0, 3.0, 7);
    topo.initiator = 0;
    topo.destinations.clear();
    for (size_t i = 1; i < topo.n_nodes; ++i)
        topo.destinations.push_back(i);
    topo.sources = {3, 5, 7, 9, 11};
    return topo;
}

}  // namespace

TEST_CASE("PER table behaves like the link model")
{
    const auto& t = test_table();
    // Clean single transmitter at high SNR never loses packets.
    CHECK(t.single_tx_loss(8, 25.0) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(t.single_tx_loss(64, 25.0) == doctest::Approx(0.0).epsilon(1e-9));
    // Strong beating at narrow RFO is fatal for the uncoded PHY, and a large
    // power delta restores the single-transmitter behaviour.
    CHECK(t.ct_loss(8, 30.0, 0.0, 60e3) > 0.9);
    CHECK(t.ct_loss(8, 30.0, 10.0, 60e3) < t.single_tx_loss(8, 30.0) + 0.05);
    // Loss grows as SNR falls.
    CHECK(t.single_tx_loss(8, 0.0) > 0.5);
    // Negative delta-p clamps onto the 0 dB row.
    CHECK(t.ct_loss(8, 30.0, -4.0, 60e3) == doctest::Approx(t.ct_loss(8, 30.0, 0.0, 60e3)));
}

TEST_CASE("PER table round-trips through its serialization and cache")
{
    namespace fs = std::filesystem;
    const auto dir = (fs::temp_directory_path() / "ctlab_per_cache_test").string();
    fs::remove_all(dir);

    PerTableSpec spec;
    spec.payload_bytes = {8};
    spec.snr_db = {0, 15, 30};
    spec.delta_p_db = {0, 6};
    spec.rfo_hz = {5e3};
    spec.packets_per_cell = 40;

    const PerTable built = load_or_build_per_table(spec, 1, dir);
    PerTable parsed;
    REQUIRE(PerTable::deserialize(built.serialize(), &parsed));
    CHECK(parsed.single_tx_loss(8, 15.0) == built.single_tx_loss(8, 15.0));
    CHECK(parsed.ct_loss(8, 15.0, 3.0, 5e3) == built.ct_loss(8, 15.0, 3.0, 5e3));

    // Cached load returns the same values.
    const PerTable cached = load_or_build_per_table(spec, 1, dir);
    CHECK(cached.ct_loss(8, 15.0, 0.0, 5e3) == built.ct_loss(8, 15.0, 0.0, 5e3));

    // A corrupt cache entry is recomputed, not trusted.
    for (const auto& entry : fs::directory_iterator(dir))
        std::ofstream(entry.path(), std::ios::trunc) << "{corrupt";
    const PerTable rebuilt = load_or_build_per_table(spec, 1, dir);
    CHECK(rebuilt.ct_loss(8, 15.0, 0.0, 5e3) == built.ct_loss(8, 15.0, 0.0, 5e3));
    fs::remove_all(dir);
}

TEST_CASE("single-hop lossless Glossy delivers everything in one slot")
{
    const PhyConfig phy = phy_config(PhyMode::BLE_1M);
    const auto pc = ProtocolConfig::defaults(ProtocolKind::Glossy);
    const auto report =
        simulate_flood(pc, two_node_topology(), JammingProfile::preset(JammingLevel::None),
                       phy, 8, 25, 3, test_table());
    CHECK(report.reliability == doctest::Approx(1.0));
    REQUIRE(report.latency_ms.has_value());
    const double slot_ms = packet_airtime_s(64, phy) * 1e3 + pc.turnaround_us * 1e-3;
    CHECK(*report.latency_ms == doctest::Approx(slot_ms).epsilon(1e-9));
}

TEST_CASE("flood accounting conserves messages")
{
    const PhyConfig phy = phy_config(PhyMode::BLE_1M);
    for (auto kind : {ProtocolKind::Glossy, ProtocolKind::RoF, ProtocolKind::Crystal_CH}) {
        const auto pc = ProtocolConfig::defaults(kind);
        const Topology topo = grid_topology();
        const auto report = simulate_flood(pc, topo,
                                           JammingProfile::preset(JammingLevel::Strong), phy,
                                           8, 20, 5, test_table());
        CHECK(report.delivered + report.lost == report.generated);
        const size_t per_round =
            protocol_is_collection(kind) ? topo.sources.size() : topo.destinations.size();
        CHECK(report.generated == 20 * per_round);
    }
}

TEST_CASE("flood simulation is deterministic in its seed")
{
    const PhyConfig phy = phy_config(PhyMode::BLE_1M);
    const auto pc = ProtocolConfig::defaults(ProtocolKind::RoF);
    const auto a = simulate_flood(pc, grid_topology(),
                                  JammingProfile::preset(JammingLevel::Mild), phy, 8, 15, 42,
                                  test_table());
    const auto b = simulate_flood(pc, grid_topology(),
                                  JammingProfile::preset(JammingLevel::Mild), phy, 8, 15, 42,
                                  test_table());
    CHECK(a.reliability == b.reliability);
    CHECK(a.latency_ms == b.latency_ms);
    CHECK(a.energy_mj_per_node == b.energy_mj_per_node);
    const auto c = simulate_flood(pc, grid_topology(),
                                  JammingProfile::preset(JammingLevel::Mild), phy, 8, 15, 43,
                                  test_table());
    CHECK(a.reliability + a.energy_mj_per_node != c.reliability + c.energy_mj_per_node);
}

TEST_CASE("jamming costs energy and latency")
{
    const PhyConfig phy = phy_config(PhyMode::BLE_1M);
    const auto pc = ProtocolConfig::defaults(ProtocolKind::Glossy);
    const auto clean = simulate_flood(pc, grid_topology(),
                                      JammingProfile::preset(JammingLevel::None), phy, 8, 40,
                                      9, test_table());
    const auto jammed = simulate_flood(pc, grid_topology(),
                                       JammingProfile::preset(JammingLevel::Strong), phy, 8,
                                       40, 9, test_table());
    // Radio-on time grows under interference: nodes listen longer for the
    // receptions that arm their transmissions.
    CHECK(jammed.energy_mj_per_node > clean.energy_mj_per_node);
    REQUIRE(clean.latency_ms.has_value());
    REQUIRE(jammed.latency_ms.has_value());
    CHECK(*jammed.latency_ms > *clean.latency_ms);
    CHECK(jammed.reliability < clean.reliability);
}

TEST_CASE("an Rx-Tx-Tx trigger unit costs at least as much as an Rx-Tx unit")
{
    // Per trigger unit: Glossy spends one listen slot and one transmission,
    // the robust-flooding variant one listen slot and two transmissions.
    const PhyConfig phy = phy_config(PhyMode::BLE_1M);
    const RadioPowerModel power;
    const double airtime_ms = packet_airtime_s(64, phy) * 1e3;
    const double slot_ms = airtime_ms + 0.15;
    const double glossy_unit = slot_ms * power.rx_mw + airtime_ms * power.tx_mw;
    const double rof_unit = slot_ms * power.rx_mw + 2.0 * airtime_ms * power.tx_mw;
    CHECK(rof_unit >= glossy_unit);
}

TEST_CASE("no latency is reported when nothing is delivered")
{
    const PhyConfig phy = phy_config(PhyMode::BLE_1M);
    const auto pc = ProtocolConfig::defaults(ProtocolKind::Glossy);
    JammingProfile jam = JammingProfile::preset(JammingLevel::Strong);
    jam.burst_ms = 13.0;  // continuous
    jam.frame_ms = 13.0;
    jam.gap_ms = 0.0;
    jam.jitter_ms = 0.0;
    jam.coupling_db = -20.0;  // overwhelming
    jam.cover_prob = 1.0;
    const auto report =
        simulate_flood(pc, grid_topology(), jam, phy, 8, 5, 1, test_table());
    CHECK(report.reliability == doctest::Approx(0.0));
    CHECK_FALSE(report.latency_ms.has_value());
    CHECK(report.lost == report.generated);
}

TEST_CASE("all six protocols are reliable on a dense lossless topology")
{
    // Dense but with a realistic received-power spread; near-equal powers
    // from different-data transmitters are a genuine capture deadlock.
    Topology topo;
    topo.n_nodes = 4;
    for (size_t a = 0; a < 4; ++a)
        for (size_t b = a + 1; b < 4; ++b)
            topo.set_gain(a, b, -45.0 - 6.0 * static_cast<double>(b - a));
    topo.initiator = 0;
    topo.destinations = {1, 2, 3};
    topo.sources = {1, 2, 3};

    const PhyConfig phy = phy_config(PhyMode::BLE_1M);
    for (auto kind : {ProtocolKind::Glossy, ProtocolKind::RoF, ProtocolKind::RoF_SC,
                      ProtocolKind::Crystal, ProtocolKind::Crystal_CH,
                      ProtocolKind::Crystal_CH_ND}) {
        const auto pc = ProtocolConfig::defaults(kind);
        const auto report = simulate_flood(pc, topo, JammingProfile::preset(JammingLevel::None),
                                           phy, 8, 30, 11, test_table());
        CHECK(report.reliability >= 0.99);
    }
}

TEST_CASE("capture requires arrival alignment within half a symbol")
{
    // Collection with contending sources: blowing the synchronization budget
    // makes different-data capture impossible and reliability collapses.
    Topology topo;
    topo.n_nodes = 4;
    for (size_t a = 0; a < 4; ++a)
        for (size_t b = a + 1; b < 4; ++b)
            topo.set_gain(a, b, -45.0 - 6.0 * static_cast<double>(b - a));
    topo.initiator = 0;
    topo.sources = {1, 2, 3};
    topo.destinations = {1};

    const PhyConfig phy = phy_config(PhyMode::BLE_1M);
    const auto pc = ProtocolConfig::defaults(ProtocolKind::Crystal);
    FloodRuntimeConfig tight, loose;
    loose.sync_jitter_us = 5.0;  // far beyond half a symbol at 1 MHz
    const auto good = simulate_flood(pc, topo, JammingProfile::preset(JammingLevel::None),
                                     phy, 8, 25, 3, test_table(), tight);
    const auto bad = simulate_flood(pc, topo, JammingProfile::preset(JammingLevel::None), phy,
                                    8, 25, 3, test_table(), loose);
    CHECK(good.reliability > 0.95);
    CHECK(bad.reliability < good.reliability - 0.2);
}

TEST_CASE("disconnected topologies are rejected")
{
    Topology topo;
    topo.n_nodes = 3;
    topo.set_gain(0, 1, -50.0);  // node 2 unreachable
    topo.initiator = 0;
    topo.destinations = {1, 2};
    const PhyConfig phy = phy_config(PhyMode::BLE_1M);
    const auto pc = ProtocolConfig::defaults(ProtocolKind::Glossy);
    CHECK_THROWS_AS(simulate_flood(pc, topo, JammingProfile::preset(JammingLevel::None), phy,
                                   8, 5, 1, test_table()),
                    ConfigError);
}

TEST_CASE("protocol defaults follow the published parameterization")
{
    const auto glossy = ProtocolConfig::defaults(ProtocolKind::Glossy);
    CHECK(glossy.tx_n == 6);
    CHECK(glossy.flood_duration_ms == 100.0);
    CHECK(glossy.period_ms == 200.0);
    CHECK(glossy.channels_ghz == std::vector<double>{2.480});
    CHECK(glossy.trigger == TriggerMode::RxTx);

    const auto rof = ProtocolConfig::defaults(ProtocolKind::RoF);
    CHECK(rof.channels_ghz == std::vector<double>{2.402, 2.426, 2.480});
    CHECK(rof.trigger == TriggerMode::RxTxTx);

    const auto crystal = ProtocolConfig::defaults(ProtocolKind::Crystal_CH_ND);
    CHECK(crystal.crystal_duration_ms[0] == 20.0);
    CHECK(crystal.crystal_duration_ms[1] == 45.0);
    CHECK(crystal.crystal_duration_ms[2] == 15.0);
    CHECK(crystal.epoch_ms == 1000.0);
    CHECK(crystal.nd_threshold_dbm == -70.0);
    CHECK(crystal.max_silent_t == 2);

    const auto mild = JammingProfile::preset(JammingLevel::Mild);
    CHECK(mild.power_mw == 30.0);
    CHECK(mild.burst_ms == 5.0);
    CHECK(mild.period_ms == 13.0);
    CHECK_FALSE(mild.all_channels);
    const auto strong = JammingProfile::preset(JammingLevel::Strong);
    CHECK(strong.power_mw == 200.0);
    CHECK(strong.burst_ms == 8.0);
    CHECK(strong.all_channels);
}
