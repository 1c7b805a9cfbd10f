#include "ctlab/per_table.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ctlab/channel.hpp"
#include "ctlab/errors.hpp"
#include "ctlab/link.hpp"
#include "ctlab/rng.hpp"

#include <json.hpp>

namespace ctlab {

namespace {

uint64_t fnv1a(const std::string& s)
{
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

size_t nearest_index(const std::vector<double>& grid, double v)
{
    size_t best = 0;
    double best_d = std::abs(grid[0] - v);
    for (size_t i = 1; i < grid.size(); ++i) {
        const double d = std::abs(grid[i] - v);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

// Lower bracket index and interpolation weight for a sorted grid, clamped.
std::pair<size_t, double> bracket(const std::vector<double>& grid, double v)
{
    if (v <= grid.front())
        return {0, 0.0};
    if (v >= grid.back())
        return {grid.size() - 2, 1.0};
    size_t i = 0;
    while (i + 2 < grid.size() && grid[i + 1] <= v)
        ++i;
    const double w = (v - grid[i]) / (grid[i + 1] - grid[i]);
    return {i, w};
}

}  // namespace

uint64_t PerTableSpec::content_hash() const
{
    std::ostringstream os;
    os << "v2|" << phy_mode_name(mode) << "|" << packets_per_cell << "|" << seed << "|";
    for (auto p : payload_bytes)
        os << p << ",";
    os << "|";
    for (auto v : snr_db)
        os << v << ",";
    os << "|";
    for (auto v : delta_p_db)
        os << v << ",";
    os << "|";
    for (auto v : rfo_hz)
        os << v << ",";
    return fnv1a(os.str());
}

size_t PerTable::ct_index(size_t p, size_t s, size_t d, size_t r) const
{
    const size_t nr = spec_.rfo_hz.size();
    const size_t nd = spec_.delta_p_db.size();
    const size_t ns = spec_.snr_db.size();
    return ((p * ns + s) * nd + d) * nr + r;
}

double PerTable::ct_loss(size_t payload_bytes, double snr_db, double delta_p_db,
                         double rfo_hz) const
{
    if (empty())
        throw ConfigError("PER table is empty");
    std::vector<double> payloads(spec_.payload_bytes.begin(), spec_.payload_bytes.end());
    const size_t p = nearest_index(payloads, static_cast<double>(payload_bytes));
    const size_t r = nearest_index(spec_.rfo_hz, rfo_hz);
    if (delta_p_db < 0.0)
        delta_p_db = 0.0;  // no dominant transmitter: strong-beating worst case

    const auto [si, sw] = bracket(spec_.snr_db, snr_db);
    const auto [di, dw] = bracket(spec_.delta_p_db, delta_p_db);
    auto at = [&](size_t s, size_t d) { return ct_[ct_index(p, s, d, r)]; };
    const double lo = at(si, di) * (1.0 - dw) + at(si, di + 1) * dw;
    const double hi = at(si + 1, di) * (1.0 - dw) + at(si + 1, di + 1) * dw;
    return lo * (1.0 - sw) + hi * sw;
}

double PerTable::single_tx_loss(size_t payload_bytes, double snr_db) const
{
    if (empty())
        throw ConfigError("PER table is empty");
    std::vector<double> payloads(spec_.payload_bytes.begin(), spec_.payload_bytes.end());
    const size_t p = nearest_index(payloads, static_cast<double>(payload_bytes));
    const auto [si, sw] = bracket(spec_.snr_db, snr_db);
    const size_t ns = spec_.snr_db.size();
    return single_[p * ns + si] * (1.0 - sw) + single_[p * ns + si + 1] * sw;
}

PerTable derive_per_table(const PerTableSpec& spec, int n_threads)
{
    PerTable table;
    table.spec_ = spec;
    const size_t np = spec.payload_bytes.size();
    const size_t ns = spec.snr_db.size();
    const size_t nd = spec.delta_p_db.size();
    const size_t nr = spec.rfo_hz.size();
    table.ct_.assign(np * ns * nd * nr, 0.0);
    table.single_.assign(np * ns, 0.0);

    const PhyConfig phy = phy_config(spec.mode);
    const size_t n_cells = np * ns * nd * nr + np * ns;

    parallel_for(n_cells, n_threads, [&](size_t cell) {
        const uint64_t cell_seed = derive_seed(spec.seed, cell);
        if (cell < np * ns) {  // single-transmitter cells
            const size_t p = cell / ns;
            const size_t s = cell % ns;
            ChannelScenario sc;
            sc.transmitters.push_back({});
            sc.snr_db = spec.snr_db[s];
            const auto counters = run_batch(phy, sc, spec.payload_bytes[p],
                                            spec.packets_per_cell, cell_seed);
            table.single_[cell] =
                1.0 - static_cast<double>(counters.received_ok) /
                          static_cast<double>(counters.n_packets);
            return;
        }
        size_t idx = cell - np * ns;
        const size_t r = idx % nr;
        idx /= nr;
        const size_t d = idx % nd;
        idx /= nd;
        const size_t s = idx % ns;
        const size_t p = idx / ns;

        ChannelScenario sc;
        TransmitterProfile t1, t2;
        t2.cfo_hz = spec.rfo_hz[r];
        t2.amplitude = std::pow(10.0, -spec.delta_p_db[d] / 20.0);
        sc.transmitters = {t1, t2};
        sc.snr_db = spec.snr_db[s];
        sc.enforce_cfo_limit = false;  // grid may probe beyond the standard bound
        const auto counters =
            run_batch(phy, sc, spec.payload_bytes[p], spec.packets_per_cell, cell_seed);
        table.ct_[cell - np * ns] = 1.0 - static_cast<double>(counters.received_ok) /
                                              static_cast<double>(counters.n_packets);
    });
    return table;
}

std::string PerTable::serialize() const
{
    nlohmann::json j;
    j["version"] = 2;
    j["mode"] = phy_mode_name(spec_.mode);
    j["payload_bytes"] = spec_.payload_bytes;
    j["snr_db"] = spec_.snr_db;
    j["delta_p_db"] = spec_.delta_p_db;
    j["rfo_hz"] = spec_.rfo_hz;
    j["packets_per_cell"] = spec_.packets_per_cell;
    j["seed"] = spec_.seed;
    j["ct_loss"] = ct_;
    j["single_loss"] = single_;
    return j.dump();
}

bool PerTable::deserialize(const std::string& text, PerTable* out)
{
    try {
        const auto j = nlohmann::json::parse(text);
        if (j.at("version").get<int>() != 2)
            return false;
        PerTable t;
        if (!phy_mode_from_name(j.at("mode").get<std::string>(), &t.spec_.mode))
            return false;
        t.spec_.payload_bytes = j.at("payload_bytes").get<std::vector<size_t>>();
        t.spec_.snr_db = j.at("snr_db").get<std::vector<double>>();
        t.spec_.delta_p_db = j.at("delta_p_db").get<std::vector<double>>();
        t.spec_.rfo_hz = j.at("rfo_hz").get<std::vector<double>>();
        t.spec_.packets_per_cell = j.at("packets_per_cell").get<size_t>();
        t.spec_.seed = j.at("seed").get<uint64_t>();
        t.ct_ = j.at("ct_loss").get<std::vector<double>>();
        t.single_ = j.at("single_loss").get<std::vector<double>>();
        const size_t expect = t.spec_.payload_bytes.size() * t.spec_.snr_db.size() *
                              t.spec_.delta_p_db.size() * t.spec_.rfo_hz.size();
        if (t.ct_.size() != expect ||
            t.single_.size() != t.spec_.payload_bytes.size() * t.spec_.snr_db.size())
            return false;
        *out = std::move(t);
        return true;
    } catch (const std::exception&) {
        return false;
    }
}

PerTable load_or_build_per_table(const PerTableSpec& spec, int n_threads,
                                 const std::string& cache_dir)
{
    std::string dir = cache_dir;
    if (dir.empty()) {
        if (const char* env = std::getenv("CTLAB_CACHE_DIR"))
            dir = env;
        else
            dir = "ctlab_cache";
    }
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);

    char name[64];
    std::snprintf(name, sizeof(name), "per_%016llx.json",
                  static_cast<unsigned long long>(spec.content_hash()));
    const std::filesystem::path path = std::filesystem::path(dir) / name;

    if (std::ifstream in{path}; in) {
        std::stringstream ss;
        ss << in.rdbuf();
        PerTable cached;
        if (PerTable::deserialize(ss.str(), &cached) &&
            cached.spec().content_hash() == spec.content_hash())
            return cached;
        // fall through: corrupt or stale cache entry, recompute
    }

    PerTable table = derive_per_table(spec, n_threads);
    if (std::ofstream out{path, std::ios::binary}; out)
        out << table.serialize();
    return table;
}

}  // namespace ctlab
