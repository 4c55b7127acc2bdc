#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hhw/hybrid_mc.hpp"
#include "hhw/model.hpp"
#include "hhw/pricer.hpp"

namespace hhw::cli {

// ============================================================================
// Config file
// ============================================================================

struct ConfigEntry {
    std::string key;
    std::string value;
    int line = 0;
};

/// One sweep axis: `sweep.<key>[@group] = v1, v2, ...`.
struct SweepAxis {
    std::string key;
    std::string group;
    std::vector<std::string> values;
    int line = 0;
};

/// Parsed but not yet interpreted config: plain entries in file order plus
/// sweep axes. Duplicate keys are rejected.
struct ConfigFile {
    std::vector<ConfigEntry> entries;
    std::vector<SweepAxis> sweeps;
};

[[nodiscard]] ConfigFile parse_config(const std::string& text);
[[nodiscard]] ConfigFile load_config(const std::string& path);

/// Overrides applied at one sweep point, in axis order.
using SweepPoint = std::vector<ConfigEntry>;

/// Axes sharing a group are zipped (equal lengths required); distinct groups
/// form a cartesian product, the first-declared group varying slowest. A file
/// without sweeps yields a single empty point.
[[nodiscard]] std::vector<SweepPoint> expand_sweeps(const ConfigFile& config);

// ============================================================================
// Run configuration
// ============================================================================

using Model = std::variant<ModelParams, ModelParams2d>;

struct RunConfig {
    Model model;
    std::optional<OptionSpec> option;  // absent when strike/maturity missing
    std::optional<double> maturity;
    std::optional<int> Nt;
    std::optional<int> Ns;
    std::optional<std::int64_t> paths;
    std::optional<std::uint64_t> seed;
    std::optional<int> ratioN;
    int ratioLevels = 3;
    std::optional<std::vector<double>> smileStrikes;
    std::vector<std::string> smileMethods{"htfd"};
    PricerOptions pricer;
};

/// Interprets entries (with `overrides` replacing or adding keys). Unknown
/// keys, malformed values and invalid models raise ConfigError.
[[nodiscard]] RunConfig build_run_config(const ConfigFile& config,
                                         const SweepPoint& overrides = {});

/// Flat rate and dividend yield used to quote implied volatilities.
struct QuoteRates {
    double r;
    double q;
};
[[nodiscard]] QuoteRates quote_rates(const Model& model, double T);

[[nodiscard]] PriceResult price_model(const Model& model, const OptionSpec& spec, int Nt, int Ns,
                                      const PricerOptions& options);
[[nodiscard]] MCResult mc_model(const Model& model, const OptionSpec& spec, int Nt,
                                std::int64_t paths, std::uint64_t seed, const McOptions& options);

// ============================================================================
// Convergence table
// ============================================================================

struct RatioRow {
    int Nt;
    int Ns;
    double price;
    std::optional<double> ratio;
};

/// Prices at Nt = N / 2^(levels+1), ..., N with Ns = 2 Nt, and the ratio
/// (P_{N/2} - P_{N/4}) / (P_N - P_{N/2}) from the third row on. `price_at`
/// receives (Nt, Ns); tests inject synthetic sequences through it.
[[nodiscard]] std::vector<RatioRow> ratio_table(int N, int levels,
                                                const std::function<double(int, int)>& price_at);

// ============================================================================
// Commands
// ============================================================================

struct CommandOptions {
    int threads = 0;
};

/// Each command writes CSV (header first, LF endings, 6-decimal reals) and
/// throws ConfigError for configuration problems; numerical failures
/// propagate as DomainError / SolverError.
void cmd_price(const ConfigFile& config, const CommandOptions& options, std::ostream& out);
void cmd_mc(const ConfigFile& config, const CommandOptions& options, std::ostream& out);
void cmd_ratio(const ConfigFile& config, const CommandOptions& options, std::ostream& out);
void cmd_smile(const ConfigFile& config, const CommandOptions& options, std::ostream& out);

/// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Runs `command` ("price", "mc", "ratio", "smile") on the config at
/// `config_path`, reporting errors on `err`; returns an exit code.
int run_command(const std::string& command, const std::string& config_path,
                const CommandOptions& options, std::ostream& out, std::ostream& err);

}  // namespace hhw::cli
