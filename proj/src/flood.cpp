#include "ctlab/flood.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "ctlab/channel.hpp"
#include "ctlab/errors.hpp"
#include "ctlab/rng.hpp"

namespace ctlab {

namespace {

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

constexpr uint32_t kNoMessage = UINT32_MAX;

}  // namespace

void Topology::set_gain(size_t a, size_t b, double gain_db)
{
    if (a == b)
        return;
    link_gain_db[{std::min(a, b), std::max(a, b)}] = gain_db;
}

std::optional<double> Topology::gain(size_t from, size_t to) const
{
    const auto it = link_gain_db.find({std::min(from, to), std::max(from, to)});
    if (it == link_gain_db.end())
        return std::nullopt;
    return it->second;
}

Topology make_grid_topology(size_t rows, size_t cols, double spacing_loss_db,
                            double shadowing_db, uint64_t seed)
{
    Topology topo;
    topo.n_nodes = rows * cols;
    Rng rng(seed);
    for (size_t a = 0; a < topo.n_nodes; ++a) {
        const double ax = static_cast<double>(a % cols), ay = static_cast<double>(a / cols);
        for (size_t b = a + 1; b < topo.n_nodes; ++b) {
            const double bx = static_cast<double>(b % cols), by = static_cast<double>(b / cols);
            const double d = std::hypot(ax - bx, ay - by);
            // Log-distance path loss; the exponent makes links beyond ~2 grid
            // units marginal so floods span several hops.
            const double gain =
                -spacing_loss_db - 66.0 * std::log10(std::max(1.0, d)) +
                rng.uniform(-shadowing_db, shadowing_db);
            topo.set_gain(a, b, gain);
        }
    }
    return topo;
}

const char* protocol_name(ProtocolKind kind)
{
    switch (kind) {
    case ProtocolKind::Glossy: return "Glossy";
    case ProtocolKind::RoF: return "RoF";
    case ProtocolKind::RoF_SC: return "RoF_SC";
    case ProtocolKind::Crystal: return "Crystal";
    case ProtocolKind::Crystal_CH: return "Crystal_CH";
    case ProtocolKind::Crystal_CH_ND: return "Crystal_CH_ND";
    }
    return "?";
}

bool protocol_from_name(const std::string& name, ProtocolKind* out)
{
    for (ProtocolKind k :
         {ProtocolKind::Glossy, ProtocolKind::RoF, ProtocolKind::RoF_SC, ProtocolKind::Crystal,
          ProtocolKind::Crystal_CH, ProtocolKind::Crystal_CH_ND}) {
        if (name == protocol_name(k)) {
            *out = k;
            return true;
        }
    }
    return false;
}

bool protocol_is_collection(ProtocolKind kind)
{
    return kind == ProtocolKind::Crystal || kind == ProtocolKind::Crystal_CH ||
           kind == ProtocolKind::Crystal_CH_ND;
}

ProtocolConfig ProtocolConfig::defaults(ProtocolKind kind, PhyMode mode)
{
    ProtocolConfig c;
    c.kind = kind;
    const std::vector<double> hop = {2.402, 2.426, 2.480};
    const std::vector<double> single = {2.480};
    switch (kind) {
    case ProtocolKind::Glossy:
        c.trigger = TriggerMode::RxTx;
        c.channels_ghz = single;
        break;
    case ProtocolKind::RoF_SC:
        c.trigger = TriggerMode::RxTxTx;
        c.channels_ghz = single;
        break;
    case ProtocolKind::RoF:
        c.trigger = TriggerMode::RxTxTx;
        c.channels_ghz = hop;
        break;
    case ProtocolKind::Crystal:
        c.trigger = TriggerMode::RxTx;
        c.channels_ghz = single;
        break;
    case ProtocolKind::Crystal_CH:
    case ProtocolKind::Crystal_CH_ND:
        c.trigger = TriggerMode::RxTx;
        c.channels_ghz = hop;
        break;
    }
    if (mode == PhyMode::BLE_2M)
        c.capture_threshold_db = 6.0;  // 2M needs a larger power margin to capture
    return c;
}

const char* jamming_name(JammingLevel level)
{
    switch (level) {
    case JammingLevel::None: return "none";
    case JammingLevel::Mild: return "mild";
    case JammingLevel::Strong: return "strong";
    }
    return "?";
}

bool jamming_from_name(const std::string& name, JammingLevel* out)
{
    for (JammingLevel l : {JammingLevel::None, JammingLevel::Mild, JammingLevel::Strong}) {
        if (name == jamming_name(l)) {
            *out = l;
            return true;
        }
    }
    return false;
}

JammingProfile JammingProfile::preset(JammingLevel level)
{
    JammingProfile p;
    p.level = level;
    switch (level) {
    case JammingLevel::None:
        break;
    case JammingLevel::Mild:
        p.power_mw = 30.0;
        p.burst_ms = 5.0;
        p.all_channels = false;  // single channel at 2.480 GHz
        break;
    case JammingLevel::Strong:
        p.power_mw = 200.0;
        p.burst_ms = 8.0;
        p.all_channels = true;
        p.coupling_db = -80.0;  // the emulated Wi-Fi population sits closer
        break;
    }
    return p;
}

namespace {

// ---- slot-level channel model ------------------------------------------

// The interferers are independent co-located jammers: every (node, channel)
// pair sees its own only-approximately-periodic burst train and its own
// coupling, reflecting which Wi-Fi channels the jammers around that node
// occupy.
struct JammerState {
    const JammingProfile* profile = nullptr;
    std::vector<double> channels_ghz;
    std::vector<double> phase_ms;       // [node * n_channels + ch]
    std::vector<uint64_t> jitter_seed;  // [node * n_channels + ch]
    std::vector<uint64_t> factor_seed;  // [node * n_channels + ch]

    void init(const JammingProfile& p, const std::vector<double>& protocol_channels,
              size_t n_nodes, uint64_t seed)
    {
        profile = &p;
        channels_ghz.clear();
        phase_ms.clear();
        jitter_seed.clear();
        factor_seed.clear();
        if (p.level == JammingLevel::None)
            return;
        if (p.all_channels)
            channels_ghz = protocol_channels;
        else
            channels_ghz = {2.480};
        Rng rng(seed);
        const size_t n = n_nodes * channels_ghz.size();
        phase_ms.resize(n);
        jitter_seed.resize(n);
        factor_seed.resize(n);
        for (size_t i = 0; i < n; ++i) {
            phase_ms[i] = rng.uniform() * p.period_ms;
            jitter_seed[i] = rng.next_u64();
            factor_seed[i] = rng.next_u64();
        }
    }

    // Coupling factor at one node/channel: inside the local jammer's mask
    // or only reached by its skirt.
    double local_factor(size_t idx) const
    {
        const double u =
            static_cast<double>(factor_seed[idx] >> 11) * 0x1.0p-53;
        return u < profile->cover_prob ? 1.0
                                       : std::pow(10.0, -profile->mask_db / 10.0);
    }

    double burst_start(size_t idx, long k) const
    {
        const uint64_t word =
            derive_seed(jitter_seed[idx], static_cast<uint64_t>(k + (1L << 30)));
        const double u = static_cast<double>(word >> 11) * 0x1.0p-53;
        return phase_ms[idx] + static_cast<double>(k) * profile->period_ms +
               (2.0 * u - 1.0) * profile->jitter_ms;
    }

    // Fraction of [t_ms, t_ms + len_ms) covered by emulated frames at one
    // node. Bursts are frame trains, not solid blocks: the inter-frame gaps
    // are what let short packets through.
    double overlap(size_t idx, double t_ms, double len_ms) const
    {
        const double period = profile->period_ms;
        const double burst = profile->burst_ms;
        const double stride = profile->frame_ms + profile->gap_ms;
        double covered = 0.0;
        const long k_first = static_cast<long>(
            std::floor((t_ms - phase_ms[idx] - profile->jitter_ms - burst) / period));
        const long k_last = static_cast<long>(
            std::ceil((t_ms + len_ms - phase_ms[idx] + profile->jitter_ms) / period));
        for (long k = k_first; k <= k_last; ++k) {
            const double b = burst_start(idx, k);
            for (double f = b; f < b + burst; f += stride) {
                const double lo = std::max({f, b, t_ms});
                const double hi =
                    std::min({f + profile->frame_ms, b + burst, t_ms + len_ms});
                if (hi > lo)
                    covered += hi - lo;
            }
        }
        return std::min(1.0, covered / len_ms);
    }

    // Average interference power received by `node` during the window, mW.
    double interference_mw(size_t node, double channel_ghz, double t_ms, double len_ms) const
    {
        if (!profile || profile->level == JammingLevel::None || len_ms <= 0.0)
            return 0.0;
        for (size_t c = 0; c < channels_ghz.size(); ++c) {
            if (std::abs(channels_ghz[c] - channel_ghz) > 1e-9)
                continue;
            const size_t idx = node * channels_ghz.size() + c;
            const double frac = overlap(idx, t_ms, len_ms);
            if (frac <= 0.0)
                return 0.0;
            return frac * profile->power_mw * dbm_to_mw(profile->coupling_db) *
                   local_factor(idx);
        }
        return 0.0;
    }
};

struct NodeRadio {
    bool has_message = false;
    uint32_t message = kNoMessage;
    int tx_done = 0;
    int tx_pending = 0;      // transmissions armed by a reception (RxTx)
    long join_slot = -1;     // slot of first reception (RxTxTx pattern base)
    bool sleeping = false;
    double tx_ms = 0.0;      // accumulated radio-on time
    double listen_ms = 0.0;
};

struct SlotContext {
    const Topology* topo;
    const PerTable* table;
    const FloodRuntimeConfig* runtime;
    const ProtocolConfig* protocol;
    std::vector<double> node_cfo_hz;  // drawn once per simulation
    JammerState jammer;
    uint64_t jitter_seed = 0;
    double slot_ms = 0.0;
    double airtime_ms = 0.0;
    double half_symbol_us = 0.5;
    size_t payload_bytes = 0;

    // Per-transmission start jitter, stateless in (node, slot time).
    double tx_jitter_us(size_t node, double t_ms) const
    {
        const uint64_t word = derive_seed(
            jitter_seed, node, static_cast<uint64_t>(std::llround(t_ms * 1e3)));
        const double u = static_cast<double>(word >> 11) * 0x1.0p-53;
        return (2.0 * u - 1.0) * runtime->sync_jitter_us;
    }
};

// Resolve one slot: who decodes what. `transmitters` maps node -> message id.
// Returns per-listener received message (kNoMessage if none).
void resolve_slot(const SlotContext& ctx, double t_ms, double channel_ghz,
                  const std::vector<std::pair<size_t, uint32_t>>& transmitters,
                  const std::vector<size_t>& listeners, Rng& rng,
                  std::vector<uint32_t>& out)
{
    out.assign(ctx.topo->n_nodes, kNoMessage);
    if (transmitters.empty())
        return;

    for (size_t listener : listeners) {
        const double floor_mw =
            dbm_to_mw(ctx.runtime->noise_floor_dbm) +
            ctx.jammer.interference_mw(listener, channel_ghz, t_ms, ctx.airtime_ms);
        // Received power per transmitter.
        double strongest_mw = 0.0;
        size_t strongest_tx = SIZE_MAX;
        double total_mw = 0.0;
        for (const auto& [tx, msg] : transmitters) {
            (void)msg;
            const auto g = ctx.topo->gain(tx, listener);
            if (!g)
                continue;
            const double p = dbm_to_mw(ctx.runtime->tx_power_dbm + *g);
            total_mw += p;
            if (p > strongest_mw) {
                strongest_mw = p;
                strongest_tx = tx;
            }
        }
        if (strongest_tx == SIZE_MAX ||
            mw_to_dbm(strongest_mw) < ctx.runtime->sensitivity_dbm)
            continue;

        uint32_t strongest_msg = kNoMessage;
        for (const auto& [tx, msg] : transmitters)
            if (tx == strongest_tx)
                strongest_msg = msg;

        // Same-data group of the strongest transmitter vs everything else.
        double group_mw = 0.0, group_second_mw = 0.0;
        size_t group_second_tx = SIZE_MAX;
        double other_mw = 0.0;
        for (const auto& [tx, msg] : transmitters) {
            const auto g = ctx.topo->gain(tx, listener);
            if (!g)
                continue;
            const double p = dbm_to_mw(ctx.runtime->tx_power_dbm + *g);
            if (msg == strongest_msg) {
                group_mw += p;
                if (tx != strongest_tx && p > group_second_mw) {
                    group_second_mw = p;
                    group_second_tx = tx;
                }
            } else {
                other_mw += p;
            }
        }

        double noise_mw = floor_mw;
        if (other_mw > 0.0) {
            // Different data: capture of the strongest group needs both the
            // power margin and arrival alignment within half a symbol.
            const double margin_db = mw_to_dbm(strongest_mw) - mw_to_dbm(other_mw);
            if (margin_db < ctx.protocol->capture_threshold_db)
                continue;  // collision loss
            bool aligned = true;
            const double j_strong = ctx.tx_jitter_us(strongest_tx, t_ms);
            for (const auto& [tx, msg] : transmitters)
                if (msg != strongest_msg &&
                    std::abs(ctx.tx_jitter_us(tx, t_ms) - j_strong) > ctx.half_symbol_us)
                    aligned = false;
            if (!aligned)
                continue;
            noise_mw += other_mw;
        }

        const double snr_db = mw_to_dbm(strongest_mw) - mw_to_dbm(noise_mw);
        double loss;
        if (group_second_tx == SIZE_MAX) {
            loss = ctx.table->single_tx_loss(ctx.payload_bytes, snr_db);
        } else {
            const double delta_p_db =
                mw_to_dbm(strongest_mw) - mw_to_dbm(group_mw - strongest_mw);
            const double rfo = std::abs(ctx.node_cfo_hz[strongest_tx] -
                                        ctx.node_cfo_hz[group_second_tx]);
            loss = ctx.table->ct_loss(ctx.payload_bytes, snr_db, delta_p_db, rfo);
        }
        if (rng.uniform() >= loss)
            out[listener] = strongest_msg;
    }
}

// ---- flood window (the Glossy/RoF primitive) -----------------------------

struct FloodWindowResult {
    std::vector<uint32_t> received_msg;   // per node
    std::vector<double> received_at_ms;   // absolute time, -1 when not received
};

// Runs one flooding window. `initial` maps node -> message id for nodes that
// start with data (flood initiators). Channel hopping is per slot when
// `hop_per_slot`, otherwise `fixed_channel` is used throughout.
FloodWindowResult run_flood_window(SlotContext& ctx, std::vector<NodeRadio>& radio,
                                   const std::vector<std::pair<size_t, uint32_t>>& initial,
                                   double window_start_ms, double window_ms,
                                   bool hop_per_slot, double fixed_channel, Rng& rng)
{
    const size_t n = ctx.topo->n_nodes;
    FloodWindowResult result;
    result.received_msg.assign(n, kNoMessage);
    result.received_at_ms.assign(n, -1.0);

    for (size_t i = 0; i < n; ++i) {
        radio[i].has_message = false;
        radio[i].message = kNoMessage;
        radio[i].tx_done = 0;
        radio[i].tx_pending = 0;
        radio[i].join_slot = -1;
    }
    for (const auto& [node, msg] : initial) {
        radio[node].has_message = true;
        radio[node].message = msg;
        radio[node].tx_pending = 1;
        radio[node].join_slot = -1;  // pattern starts at slot 0
        result.received_msg[node] = msg;
        result.received_at_ms[node] = window_start_ms;
    }

    const bool time_triggered = ctx.protocol->trigger == TriggerMode::RxTxTx;
    const size_t n_slots = static_cast<size_t>(window_ms / ctx.slot_ms);
    std::vector<uint32_t> slot_rx;
    std::vector<std::pair<size_t, uint32_t>> transmitters;
    std::vector<size_t> listeners;

    for (size_t slot = 0; slot < n_slots; ++slot) {
        const double t_ms = window_start_ms + static_cast<double>(slot) * ctx.slot_ms;
        const double channel =
            hop_per_slot
                ? ctx.protocol->channels_ghz[slot % ctx.protocol->channels_ghz.size()]
                : fixed_channel;

        transmitters.clear();
        listeners.clear();
        for (size_t i = 0; i < n; ++i) {
            auto& r = radio[i];
            if (r.sleeping || r.tx_done >= ctx.protocol->tx_n)
                continue;  // budget exhausted: radio off for the rest of the flood

            bool transmit;
            if (time_triggered) {
                // Rx-Tx-Tx: once started (first reception, or slot 0 for
                // initiators), the schedule is fixed — two transmissions,
                // one resync listen, repeating. Listen outcomes do not gate
                // the transmissions.
                transmit = r.has_message &&
                           (static_cast<long>(slot) - r.join_slot - 1) % 3 != 2;
            } else {
                // Rx-Tx: every transmission, the initiator's included, must
                // be armed by a reception; interference that breaks the
                // echo chain stalls the flood.
                transmit = r.has_message && r.tx_pending > 0;
            }

            if (transmit) {
                transmitters.push_back({i, r.message});
                r.tx_done++;
                if (r.tx_pending > 0)
                    r.tx_pending--;
                r.tx_ms += ctx.airtime_ms;
            } else {
                listeners.push_back(i);
                r.listen_ms += ctx.slot_ms;
            }
        }

        if (!transmitters.empty()) {
            resolve_slot(ctx, t_ms, channel, transmitters, listeners, rng, slot_rx);
            for (size_t i : listeners) {
                if (slot_rx[i] == kNoMessage)
                    continue;
                auto& r = radio[i];
                if (!r.has_message) {
                    r.has_message = true;
                    r.message = slot_rx[i];
                    r.join_slot = static_cast<long>(slot);
                    result.received_msg[i] = slot_rx[i];
                    result.received_at_ms[i] = t_ms + ctx.slot_ms;
                }
                if (!time_triggered)
                    r.tx_pending = 1;
            }
        }
    }
    return result;
}

void check_connected(const Topology& topo, const FloodRuntimeConfig& runtime)
{
    if (topo.n_nodes == 0)
        throw ConfigError("topology has no nodes");
    std::vector<char> seen(topo.n_nodes, 0);
    std::queue<size_t> q;
    q.push(topo.initiator);
    seen[topo.initiator] = 1;
    size_t count = 0;
    while (!q.empty()) {
        const size_t a = q.front();
        q.pop();
        ++count;
        for (size_t b = 0; b < topo.n_nodes; ++b) {
            if (seen[b] || b == a)
                continue;
            const auto g = topo.gain(a, b);
            if (g && runtime.tx_power_dbm + *g >= runtime.sensitivity_dbm) {
                seen[b] = 1;
                q.push(b);
            }
        }
    }
    if (count != topo.n_nodes)
        throw ConfigError("topology is disconnected at the reception threshold");
}

}  // namespace

FloodReport simulate_flood(const ProtocolConfig& protocol, const Topology& topo,
                           const JammingProfile& jamming, const PhyConfig& phy,
                           size_t payload_bytes, size_t n_rounds, uint64_t seed,
                           const PerTable& table, const FloodRuntimeConfig& runtime)
{
    check_connected(topo, runtime);
    if (protocol.channels_ghz.empty())
        throw ConfigError("protocol channel list is empty");

    SlotContext ctx;
    ctx.topo = &topo;
    ctx.table = &table;
    ctx.runtime = &runtime;
    ctx.protocol = &protocol;
    ctx.jammer.init(jamming, protocol.channels_ghz, topo.n_nodes,
                    derive_seed(seed, 0xbadf00d));
    ctx.jitter_seed = derive_seed(seed, 0x717e);
    ctx.half_symbol_us = 0.5e6 / phy.symbol_rate_hz;
    const auto use_payload = [&](size_t bytes) {
        ctx.payload_bytes = bytes;
        ctx.airtime_ms = packet_airtime_s(bytes * 8, phy) * 1e3;
        ctx.slot_ms = ctx.airtime_ms + protocol.turnaround_us * 1e-3;
    };
    use_payload(payload_bytes);
    // Crystal sync/ack floods carry short control packets, not the data
    // payload.
    constexpr size_t kControlBytes = 8;

    // Per-node CFOs, fixed for the whole simulation ("practically
    // unpredictable", so uniform over the standard limit).
    const double cfo_limit =
        phy.mode == PhyMode::IEEE_802_15_4 ? kIeee802154CfoLimitHz : kBleCfoLimitHz;
    Rng cfo_rng(derive_seed(seed, 0xcf0));
    ctx.node_cfo_hz.resize(topo.n_nodes);
    for (auto& c : ctx.node_cfo_hz)
        c = cfo_rng.uniform(-cfo_limit, cfo_limit);

    std::vector<NodeRadio> radio(topo.n_nodes);
    FloodReport report;
    double latency_sum = 0.0;

    Rng rng(derive_seed(seed, 1));

    if (!protocol_is_collection(protocol.kind)) {
        // --- data dissemination: one flood per round -----------------------
        const auto& dests = topo.destinations;
        if (dests.empty())
            throw ConfigError("dissemination needs at least one destination");
        const bool hop = protocol.channels_ghz.size() > 1;
        for (size_t round = 0; round < n_rounds; ++round) {
            const double t0 = static_cast<double>(round) * protocol.period_ms;
            for (auto& r : radio)
                r.sleeping = false;
            const auto res = run_flood_window(ctx, radio,
                                              {{topo.initiator, static_cast<uint32_t>(round)}},
                                              t0, protocol.flood_duration_ms, hop,
                                              protocol.channels_ghz[0], rng);
            for (size_t d : dests) {
                report.generated++;
                if (res.received_msg[d] == static_cast<uint32_t>(round)) {
                    report.delivered++;
                    latency_sum += res.received_at_ms[d] - t0;
                } else {
                    report.lost++;
                }
            }
        }
    } else {
        // --- data collection (Crystal family) ------------------------------
        if (topo.sources.empty())
            throw ConfigError("collection needs at least one source");
        const bool multi_channel = protocol.channels_ghz.size() > 1;
        const bool noise_detect = protocol.kind == ProtocolKind::Crystal_CH_ND;

        // Aperiodic traffic: each source generates one message per epoch at
        // a jittered offset early enough to be collectable within the epoch;
        // an undelivered message is overwritten by the next one.
        struct Message {
            size_t source;
            double generated_ms;
            bool delivered = false;
        };
        std::vector<Message> messages;
        Rng traffic_rng(derive_seed(seed, 0x7afc));
        for (size_t epoch = 0; epoch < n_rounds; ++epoch)
            for (size_t s = 0; s < topo.sources.size(); ++s)
                messages.push_back({topo.sources[s],
                                    (static_cast<double>(epoch) +
                                     0.35 * traffic_rng.uniform()) *
                                        protocol.epoch_ms,
                                    false});
        std::sort(messages.begin(), messages.end(),
                  [](const Message& a, const Message& b) {
                      return a.generated_ms < b.generated_ms;
                  });
        report.generated += messages.size();

        // Two traffic-free drain epochs so late-generated messages still get
        // their collection chance before the run ends.
        const size_t kDrainEpochs = 2;
        for (size_t epoch = 0; epoch < n_rounds + kDrainEpochs; ++epoch) {
            const double t0 = static_cast<double>(epoch) * protocol.epoch_ms;

            size_t phase_counter = 0;
            auto next_channel = [&]() {
                const double ch =
                    protocol.channels_ghz[phase_counter % protocol.channels_ghz.size()];
                phase_counter++;
                return multi_channel ? ch : protocol.channels_ghz[0];
            };

            for (auto& r : radio)
                r.sleeping = false;

            // S phase: sink-initiated synchronization flood.
            double t = t0;
            const double s_channel = next_channel();
            use_payload(kControlBytes);
            const auto sync = run_flood_window(ctx, radio, {{topo.initiator, 0}}, t,
                                               protocol.crystal_duration_ms[0], false,
                                               s_channel, rng);
            t += protocol.crystal_period_ms[0];
            // Nodes that missed the sync flood sit this epoch out.
            for (size_t i = 0; i < topo.n_nodes; ++i)
                radio[i].sleeping = (sync.received_msg[i] == kNoMessage);

            int silent_t = 0;
            for (int pair = 0; pair < protocol.max_ta_pairs; ++pair) {
                if (t + protocol.crystal_period_ms[1] + protocol.crystal_period_ms[2] >
                    t0 + protocol.epoch_ms)
                    break;
                if (silent_t >= protocol.max_silent_t)
                    break;

                // T phase: sources with a generated, undelivered message
                // flood their oldest one.
                const double t_channel = next_channel();
                std::vector<std::pair<size_t, uint32_t>> pending;
                std::vector<char> source_busy(topo.n_nodes, 0);
                for (size_t m = 0; m < messages.size(); ++m) {
                    const auto& msg = messages[m];
                    if (msg.delivered || msg.generated_ms > t ||
                        source_busy[msg.source] || radio[msg.source].sleeping)
                        continue;
                    source_busy[msg.source] = 1;
                    pending.push_back({msg.source, static_cast<uint32_t>(m)});
                }

                uint32_t sink_got = kNoMessage;
                double sink_time = -1.0;
                if (!pending.empty()) {
                    use_payload(payload_bytes);
                    const auto res =
                        run_flood_window(ctx, radio, pending, t,
                                         protocol.crystal_duration_ms[1], false, t_channel, rng);
                    sink_got = res.received_msg[topo.initiator];
                    sink_time = res.received_at_ms[topo.initiator];
                } else {
                    // Nothing pending anywhere; awake nodes still listen.
                    for (auto& r : radio)
                        if (!r.sleeping)
                            r.listen_ms += protocol.crystal_duration_ms[1];
                }

                if (sink_got != kNoMessage) {
                    silent_t = 0;
                } else {
                    bool blamed_on_noise = false;
                    if (noise_detect) {
                        const double rss_mw =
                            dbm_to_mw(runtime.noise_floor_dbm) +
                            ctx.jammer.interference_mw(topo.initiator, t_channel, t,
                                                       protocol.crystal_duration_ms[1]);
                        blamed_on_noise = mw_to_dbm(rss_mw) > protocol.nd_threshold_dbm;
                    }
                    if (!blamed_on_noise)
                        silent_t++;
                }
                t += protocol.crystal_period_ms[1];

                // A phase: sink floods the acknowledgment.
                const double a_channel = next_channel();
                if (sink_got != kNoMessage) {
                    use_payload(kControlBytes);
                    const auto ack =
                        run_flood_window(ctx, radio, {{topo.initiator, sink_got}}, t,
                                         protocol.crystal_duration_ms[2], false, a_channel, rng);
                    auto& msg = messages[sink_got];
                    if (!msg.delivered) {
                        msg.delivered = true;
                        report.delivered++;
                        latency_sum += sink_time - msg.generated_ms;
                    }
                    (void)ack;  // ack loss only delays the source's retry stop
                }
                t += protocol.crystal_period_ms[2];
            }
        }
        for (const auto& msg : messages)
            if (!msg.delivered)
                report.lost++;
    }

    // Energy: accumulated radio-on time (everything else idles).
    double total_mj = 0.0;
    const double total_ms = protocol_is_collection(protocol.kind)
                                ? static_cast<double>(n_rounds + 2) * protocol.epoch_ms
                                : static_cast<double>(n_rounds) * protocol.period_ms;
    for (const auto& r : radio) {
        const double on_ms = r.tx_ms + r.listen_ms;
        const double idle_ms = std::max(0.0, total_ms - on_ms);
        total_mj += (r.tx_ms * runtime.power.tx_mw + r.listen_ms * runtime.power.rx_mw +
                     idle_ms * runtime.power.idle_mw) *
                    1e-3;
    }
    report.energy_mj_per_node = total_mj / static_cast<double>(topo.n_nodes);

    report.reliability = report.generated
                             ? static_cast<double>(report.delivered) /
                                   static_cast<double>(report.generated)
                             : 0.0;
    if (report.delivered > 0)
        report.latency_ms = latency_sum / static_cast<double>(report.delivered);
    return report;
}

}  // namespace ctlab
