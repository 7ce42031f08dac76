#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>

namespace armafpe::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int {
    kOk = 0,
    kConfigParse = 2,
    kInvalidParams = 3,
    kNonConvergence = 4,
    kDataMismatch = 5,
    kQualityGate = 6,
};

/// Largest nonconvergence rate an MC run may have without being flagged.
inline constexpr double kMaxNonconvergenceRate = 0.02;

struct RunOptions {
    std::optional<std::uint64_t> seed;  // overrides the config's seed
    unsigned threads = 0;               // 0 = hardware concurrency; never changes results
    bool record_timing = false;         // adds wall-clock seconds to the manifest
};

/// Writes `t,y,eps` CSV.
int cmd_simulate(const std::filesystem::path& config, const std::filesystem::path& out,
                 const RunOptions& options, std::ostream& log);

/// Writes a JSON fit summary.
int cmd_fit(const std::filesystem::path& config, const std::filesystem::path& data,
            const std::filesystem::path& out, const RunOptions& options, std::ostream& log);

/// Writes a JSON table of per-candidate FPE values and the chosen order.
int cmd_select(const std::filesystem::path& config, const std::filesystem::path& data,
               const std::filesystem::path& out, const RunOptions& options, std::ostream& log);

/// kind is one of moments, mspe, eig, select. Writes replications.csv,
/// aggregate.csv and manifest.json into out_dir.
int cmd_mc(const std::filesystem::path& config, std::string_view kind,
           const std::filesystem::path& out_dir, const RunOptions& options, std::ostream& log);

}  // namespace armafpe::cli
