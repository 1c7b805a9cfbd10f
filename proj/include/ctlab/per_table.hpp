#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctlab/phy.hpp"

namespace ctlab {

// Monte-Carlo grid of packet loss probability (1 - PRR, i.e. errored or
// preamble-lost) for two-transmitter beating, bridging the sample-level link
// model into the slot-level network simulator.
struct PerTableSpec {
    PhyMode mode = PhyMode::BLE_1M;
    std::vector<size_t> payload_bytes = {8, 64};
    std::vector<double> snr_db = {0, 3, 6, 9, 12, 15, 18, 21, 24, 27, 30};
    std::vector<double> delta_p_db = {0, 1, 2, 3, 6, 10};
    std::vector<double> rfo_hz = {1e3, 5e3, 20e3, 60e3, 150e3};
    size_t packets_per_cell = 200;
    uint64_t seed = 0x9d2c5680u;

    uint64_t content_hash() const;
};

class PerTable {
public:
    PerTable() = default;

    // Loss probability for a CT pair: bilinear in (snr, delta_p), nearest
    // RFO cell, payload by exact match (nearest otherwise). delta_p below
    // zero clamps to 0 dB (no dominant transmitter).
    double ct_loss(size_t payload_bytes, double snr_db, double delta_p_db, double rfo_hz) const;

    // Loss probability for a single transmitter in AWGN.
    double single_tx_loss(size_t payload_bytes, double snr_db) const;

    const PerTableSpec& spec() const { return spec_; }
    bool empty() const { return ct_.empty(); }

    std::string serialize() const;
    static bool deserialize(const std::string& text, PerTable* out);

    friend PerTable derive_per_table(const PerTableSpec& spec, int n_threads);

private:
    PerTableSpec spec_;
    // ct_[payload][snr][dp][rfo], single_[payload][snr]
    std::vector<double> ct_;
    std::vector<double> single_;

    size_t ct_index(size_t p, size_t s, size_t d, size_t r) const;
};

// Builds the grid with the channel+receiver Monte Carlo.
PerTable derive_per_table(const PerTableSpec& spec, int n_threads = 1);

// Cached build: loads `<cache_dir>/per_<hash>.json` when it matches the
// spec, otherwise computes and stores it. Corrupt cache entries are
// recomputed. cache_dir defaults to $CTLAB_CACHE_DIR or ./ctlab_cache.
PerTable load_or_build_per_table(const PerTableSpec& spec, int n_threads = 1,
                                 const std::string& cache_dir = "");

}  // namespace ctlab
