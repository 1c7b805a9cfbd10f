#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

namespace ctlab {

// Progress callback: (grid points done, total). Used for stderr reporting;
// file outputs never depend on it.
using ProgressFn = std::function<void(size_t, size_t)>;

struct RunOptions {
    int threads = 1;
    std::optional<uint64_t> seed_override;
    std::string cache_dir;  // PER-table cache; empty = $CTLAB_CACHE_DIR or ./ctlab_cache
    ProgressFn progress;
};

// Each command parses a JSON spec file (unknown fields are rejected), runs
// the experiment and writes its outputs. Throws ConfigError for bad specs,
// InsufficientDataError when an estimator floor is not met.

// One CSV row per grid point:
// phy,n_tx,rfo_hz,delta_p_db,snr_db,temp_c,payload_bytes,n_packets,prr,per,plr,ber
void cmd_sweep(const std::string& spec_path, const std::string& out_path,
               const RunOptions& options = {});

// Writes <out>.histogram.csv and <out>.rfo.json.
void cmd_histogram(const std::string& spec_path, const std::string& out_prefix,
                   const RunOptions& options = {});

// CSV: temp_c,est_rfo_hz,per
void cmd_tempsweep(const std::string& spec_path, const std::string& out_path,
                   const RunOptions& options = {});

// CSV: protocol,phy,jamming,payload_bytes,reliability,latency_ms,energy_mj
void cmd_flood(const std::string& spec_path, const std::string& out_path,
               const RunOptions& options = {});

}  // namespace ctlab
