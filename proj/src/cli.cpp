#include "hhw/cli.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "hhw/analytics.hpp"
#include "hhw/errors.hpp"

namespace hhw::cli {

namespace {

// ----------------------------------------------------------------------------
// Key schema
// ----------------------------------------------------------------------------

enum class Scope { any, hhw, hhw2d };

struct KeyInfo {
    Scope scope;
    bool integral;
};

const std::map<std::string, KeyInfo>& known_keys() {
    static const std::map<std::string, KeyInfo> keys = {
        {"model.type", {Scope::any, false}},
        {"model.S0", {Scope::any, false}},
        {"model.V0", {Scope::any, false}},
        {"model.r0", {Scope::any, false}},
        {"model.kappaV", {Scope::any, false}},
        {"model.thetaV", {Scope::any, false}},
        {"model.sigmaV", {Scope::any, false}},
        {"model.kappaR", {Scope::any, false}},
        {"model.sigmaR", {Scope::any, false}},
        {"model.rho1", {Scope::any, false}},
        {"model.rho2", {Scope::any, false}},
        {"model.curveR", {Scope::any, false}},
        {"model.curveR.times", {Scope::any, false}},
        {"model.curveR.rates", {Scope::any, false}},
        {"model.eta", {Scope::hhw, false}},
        {"model.alphaVX", {Scope::hhw, false}},
        {"model.eta0", {Scope::hhw2d, false}},
        {"model.kappaEta", {Scope::hhw2d, false}},
        {"model.sigmaEta", {Scope::hhw2d, false}},
        {"model.rho3c", {Scope::hhw2d, false}},
        {"model.curveEta", {Scope::hhw2d, false}},
        {"model.curveEta.times", {Scope::hhw2d, false}},
        {"model.curveEta.rates", {Scope::hhw2d, false}},
        {"option.payoff", {Scope::any, false}},
        {"option.exercise", {Scope::any, false}},
        {"option.strike", {Scope::any, false}},
        {"option.maturity", {Scope::any, false}},
        {"option.barrier", {Scope::any, false}},
        {"grid.Nt", {Scope::any, true}},
        {"grid.Ns", {Scope::any, true}},
        {"mc.paths", {Scope::any, true}},
        {"mc.seed", {Scope::any, true}},
        {"ratio.N", {Scope::any, true}},
        {"ratio.levels", {Scope::any, true}},
        {"smile.strikes", {Scope::any, false}},
        {"smile.methods", {Scope::any, false}},
        {"pricer.barrier_mode", {Scope::any, false}},
        {"pricer.half_width", {Scope::any, false}},
        {"pricer.drift", {Scope::any, false}},
    };
    return keys;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    if (trim(value).empty()) return out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

bool valid_key_chars(const std::string& key) {
    return !key.empty() && std::all_of(key.begin(), key.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '@';
    });
}

void check_known(const std::string& key, int line) {
    if (!known_keys().contains(key)) throw ConfigError("unknown key '" + key + "'", line);
}

std::optional<double> try_parse_double(const std::string& text) {
    double v = 0.0;
    const char* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end || text.empty()) return std::nullopt;
    return v;
}

std::string format_fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    std::string s(buf);
    if (s == "-0.000000") s = "0.000000";
    return s;
}

// ----------------------------------------------------------------------------
// Typed access to the merged key/value set
// ----------------------------------------------------------------------------

class Values {
public:
    Values(const ConfigFile& config, const SweepPoint& overrides) {
        for (const auto& e : config.entries) map_[e.key] = e;
        for (const auto& e : overrides) map_[e.key] = e;
    }

    [[nodiscard]] bool has(const std::string& key) const { return map_.contains(key); }

    [[nodiscard]] const ConfigEntry& entry(const std::string& key) const {
        const auto it = map_.find(key);
        if (it == map_.end()) throw ConfigError("missing required key '" + key + "'");
        return it->second;
    }

    [[nodiscard]] double number(const std::string& key) const {
        const auto& e = entry(key);
        const auto v = try_parse_double(e.value);
        if (!v) throw ConfigError("key '" + key + "' expects a number, got '" + e.value + "'", e.line);
        return *v;
    }
    [[nodiscard]] double number_or(const std::string& key, double fallback) const {
        return has(key) ? number(key) : fallback;
    }
    [[nodiscard]] std::optional<double> maybe_number(const std::string& key) const {
        if (!has(key)) return std::nullopt;
        return number(key);
    }

    [[nodiscard]] std::int64_t integer(const std::string& key) const {
        const auto& e = entry(key);
        std::int64_t v = 0;
        const char* end = e.value.data() + e.value.size();
        const auto res = std::from_chars(e.value.data(), end, v);
        if (res.ec != std::errc() || res.ptr != end || e.value.empty())
            throw ConfigError("key '" + key + "' expects an integer, got '" + e.value + "'", e.line);
        return v;
    }

    [[nodiscard]] std::vector<double> numbers(const std::string& key) const {
        const auto& e = entry(key);
        std::vector<double> out;
        for (const auto& item : split_list(e.value)) {
            const auto v = try_parse_double(item);
            if (!v) throw ConfigError("key '" + key + "' expects numbers, got '" + item + "'", e.line);
            out.push_back(*v);
        }
        return out;
    }

    [[nodiscard]] std::string word(const std::string& key, const std::string& fallback,
                                   std::initializer_list<const char*> allowed) const {
        if (!has(key)) return fallback;
        const auto& e = entry(key);
        for (const char* a : allowed)
            if (e.value == a) return e.value;
        std::string list;
        for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
        throw ConfigError("key '" + key + "' must be one of {" + list + "}, got '" + e.value + "'",
                          e.line);
    }

    [[nodiscard]] const std::map<std::string, ConfigEntry>& all() const { return map_; }

private:
    std::map<std::string, ConfigEntry> map_;
};

YieldCurve read_curve(const Values& vals, const std::string& base, std::optional<double> start) {
    const std::string times_key = base + ".times";
    const std::string rates_key = base + ".rates";
    if (vals.has(times_key) || vals.has(rates_key)) {
        if (vals.has(base))
            throw ConfigError("give either '" + base + "' or '" + times_key + "'/'" + rates_key +
                                  "', not both",
                              vals.entry(base).line);
        const auto times = vals.numbers(times_key);
        const auto rates = vals.numbers(rates_key);
        try {
            return YieldCurve::table(times, rates);
        } catch (const DomainError& e) {
            throw ConfigError(base + ": " + e.what(), vals.entry(times_key).line);
        }
    }
    if (vals.has(base)) return YieldCurve::flat(vals.number(base));
    if (start) return YieldCurve::flat(*start);
    throw ConfigError("missing key '" + base + "' (or its initial value)");
}

Model read_model(const Values& vals) {
    const std::string type = vals.word("model.type", "hhw", {"hhw", "hhw2d"});
    const Scope other = type == "hhw" ? Scope::hhw2d : Scope::hhw;
    for (const auto& [key, e] : vals.all()) {
        const auto it = known_keys().find(key);
        if (it != known_keys().end() && it->second.scope == other)
            throw ConfigError("key '" + key + "' does not apply to model.type = " + type, e.line);
    }

    const auto r0 = vals.maybe_number("model.r0");
    const YieldCurve curveR = read_curve(vals, "model.curveR", r0);
    auto common = [&](auto& p) {
        p.S0 = vals.number("model.S0");
        p.V0 = vals.number("model.V0");
        p.r0 = r0 ? *r0 : curveR.forward(0.0);
        p.kappaV = vals.number("model.kappaV");
        p.thetaV = vals.number("model.thetaV");
        p.sigmaV = vals.number("model.sigmaV");
        p.kappaR = vals.number("model.kappaR");
        p.sigmaR = vals.number("model.sigmaR");
        p.rho1 = vals.number_or("model.rho1", 0.0);
        p.rho2 = vals.number_or("model.rho2", 0.0);
        p.curveR = curveR;
    };

    try {
        if (type == "hhw") {
            ModelParams p;
            common(p);
            p.eta = vals.number("model.eta");
            p.alphaVX = vals.number_or("model.alphaVX", 0.0);
            p.validate();
            return p;
        }
        ModelParams2d p;
        common(p);
        const auto eta0 = vals.maybe_number("model.eta0");
        p.curveEta = read_curve(vals, "model.curveEta", eta0);
        p.eta0 = eta0 ? *eta0 : p.curveEta.forward(0.0);
        p.kappaEta = vals.number("model.kappaEta");
        p.sigmaEta = vals.number("model.sigmaEta");
        p.rho3c = vals.number_or("model.rho3c", 0.0);
        p.validate();
        return p;
    } catch (const DomainError& e) {
        throw ConfigError(std::string("invalid model: ") + e.what());
    }
}

std::string sweep_value_text(const ConfigEntry& e) {
    const auto it = known_keys().find(e.key);
    if (it != known_keys().end() && it->second.integral) return e.value;
    if (const auto v = try_parse_double(e.value)) return format_fixed(*v);
    return e.value;
}

std::vector<std::string> sweep_keys(const ConfigFile& config) {
    std::vector<std::string> keys;
    for (const auto& axis : config.sweeps) keys.push_back(axis.key);
    return keys;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << fields[i];
    out << '\n';
}

std::vector<std::string> row_prefix(const SweepPoint& point) {
    std::vector<std::string> fields;
    for (const auto& e : point) fields.push_back(sweep_value_text(e));
    return fields;
}

template <class T>
T require(const std::optional<T>& v, const char* key) {
    if (!v) throw ConfigError(std::string("missing required key '") + key + "'");
    return *v;
}

OptionSpec require_option(const RunConfig& cfg) {
    if (!cfg.option) {
        throw ConfigError("missing required key '" +
                          std::string(cfg.maturity ? "option.strike" : "option.maturity") + "'");
    }
    return *cfg.option;
}

template <class... F>
struct Overloaded : F... {
    using F::operator()...;
};
template <class... F>
Overloaded(F...) -> Overloaded<F...>;

}  // namespace

// ============================================================================
// Parsing
// ============================================================================

ConfigFile parse_config(const std::string& text) {
    ConfigFile cfg;
    std::set<std::string> seen;
    std::set<std::string> seen_sweeps;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!valid_key_chars(key)) throw ConfigError("malformed key '" + key + "'", line_no);

        if (key.starts_with("sweep.")) {
            const std::string rest = key.substr(6);
            const auto at = rest.find('@');
            SweepAxis axis;
            axis.key = rest.substr(0, at);
            axis.group = at == std::string::npos ? "=" + axis.key : rest.substr(at + 1);
            axis.line = line_no;
            if (at != std::string::npos && axis.group.empty())
                throw ConfigError("empty sweep group in '" + key + "'", line_no);
            check_known(axis.key, line_no);
            if (!seen_sweeps.insert(axis.key).second)
                throw ConfigError("key '" + axis.key + "' swept twice", line_no);
            axis.values = split_list(value);
            if (axis.values.empty())
                throw ConfigError("sweep '" + axis.key + "' has no values", line_no);
            // List-valued keys cannot be swept element by element.
            if (axis.key == "smile.strikes" || axis.key == "smile.methods" ||
                axis.key.ends_with(".times") || axis.key.ends_with(".rates"))
                throw ConfigError("key '" + axis.key + "' cannot be swept", line_no);
            cfg.sweeps.push_back(std::move(axis));
            continue;
        }
        if (key.find('@') != std::string::npos)
            throw ConfigError("'@group' is only valid on sweep keys", line_no);
        check_known(key, line_no);
        if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'", line_no);
        cfg.entries.push_back({key, value, line_no});
    }
    return cfg;
}

ConfigFile load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::vector<SweepPoint> expand_sweeps(const ConfigFile& config) {
    // Groups in order of first appearance.
    std::vector<std::string> order;
    std::map<std::string, std::vector<const SweepAxis*>> groups;
    for (const auto& axis : config.sweeps) {
        if (!groups.contains(axis.group)) order.push_back(axis.group);
        groups[axis.group].push_back(&axis);
    }
    std::vector<std::size_t> sizes;
    for (const auto& g : order) {
        const auto& axes = groups[g];
        const std::size_t n = axes.front()->values.size();
        for (const auto* a : axes) {
            if (a->values.size() != n)
                throw ConfigError("sweep group '" + g + "' zips lists of different lengths",
                                  a->line);
        }
        sizes.push_back(n);
    }

    std::vector<SweepPoint> points;
    std::vector<std::size_t> idx(order.size(), 0);
    while (true) {
        SweepPoint point;
        // Emit overrides in axis declaration order regardless of grouping.
        for (const auto& axis : config.sweeps) {
            const auto gi = static_cast<std::size_t>(
                std::find(order.begin(), order.end(), axis.group) - order.begin());
            point.push_back({axis.key, axis.values[idx[gi]], axis.line});
        }
        points.push_back(std::move(point));
        // Odometer: the last group varies fastest.
        int g = static_cast<int>(order.size()) - 1;
        while (g >= 0 && ++idx[static_cast<std::size_t>(g)] == sizes[static_cast<std::size_t>(g)]) {
            idx[static_cast<std::size_t>(g)] = 0;
            --g;
        }
        if (g < 0) break;
    }
    return points;
}

// ============================================================================
// Run configuration
// ============================================================================

RunConfig build_run_config(const ConfigFile& config, const SweepPoint& overrides) {
    const Values vals(config, overrides);
    RunConfig cfg;
    cfg.model = read_model(vals);

    cfg.maturity = vals.maybe_number("option.maturity");
    if (vals.has("option.strike") && cfg.maturity) {
        OptionSpec spec;
        spec.payoff = vals.word("option.payoff", "call", {"call", "put"}) == "call"
                          ? PayoffKind::call
                          : PayoffKind::put;
        spec.exercise = vals.word("option.exercise", "european", {"european", "american"}) ==
                                "european"
                            ? ExerciseKind::european
                            : ExerciseKind::american;
        spec.strike = vals.number("option.strike");
        spec.maturity = *cfg.maturity;
        spec.upAndOut = vals.maybe_number("option.barrier");
        try {
            spec.validate();
        } catch (const std::exception& e) {
            throw ConfigError(std::string("invalid option: ") + e.what());
        }
        cfg.option = spec;
    } else {
        // Still validate the words so typos surface early.
        (void)vals.word("option.payoff", "call", {"call", "put"});
        (void)vals.word("option.exercise", "european", {"european", "american"});
    }

    auto positive_int = [&](const char* key) -> std::optional<int> {
        if (!vals.has(key)) return std::nullopt;
        const auto v = vals.integer(key);
        if (v < 1 || v > 1'000'000)
            throw ConfigError(std::string("key '") + key + "' must be a positive count",
                              vals.entry(key).line);
        return static_cast<int>(v);
    };
    cfg.Nt = positive_int("grid.Nt");
    cfg.Ns = positive_int("grid.Ns");
    if (cfg.Ns && *cfg.Ns % 2 != 0)
        throw ConfigError("grid.Ns must be even", vals.entry("grid.Ns").line);
    if (vals.has("mc.paths")) {
        const auto v = vals.integer("mc.paths");
        if (v < 2) throw ConfigError("mc.paths must be >= 2", vals.entry("mc.paths").line);
        cfg.paths = v;
    }
    if (vals.has("mc.seed")) {
        const auto v = vals.integer("mc.seed");
        if (v < 0) throw ConfigError("mc.seed must be >= 0", vals.entry("mc.seed").line);
        cfg.seed = static_cast<std::uint64_t>(v);
    }
    cfg.ratioN = positive_int("ratio.N");
    if (const auto levels = positive_int("ratio.levels")) cfg.ratioLevels = *levels;

    if (vals.has("smile.strikes")) cfg.smileStrikes = vals.numbers("smile.strikes");
    if (vals.has("smile.methods")) {
        const auto& e = vals.entry("smile.methods");
        cfg.smileMethods = split_list(e.value);
        for (const auto& m : cfg.smileMethods)
            if (m != "htfd" && m != "hmc")
                throw ConfigError("smile.methods entries must be htfd or hmc, got '" + m + "'",
                                  e.line);
    }

    cfg.pricer.barrier = vals.word("pricer.barrier_mode", "projection",
                                   {"projection", "dirichlet"}) == "projection"
                             ? BarrierMode::projection
                             : BarrierMode::dirichlet;
    if (const auto L = vals.maybe_number("pricer.half_width")) {
        if (!(*L > 0.0))
            throw ConfigError("pricer.half_width must be > 0", vals.entry("pricer.half_width").line);
        cfg.pricer.halfWidth = L;
    }
    cfg.pricer.martingaleDrift =
        vals.word("pricer.drift", "martingale", {"martingale", "continuous"}) == "martingale";
    return cfg;
}

QuoteRates quote_rates(const Model& model, double T) {
    return std::visit(Overloaded{
                          [T](const ModelParams& p) { return QuoteRates{p.curveR.zero_rate(T), p.eta}; },
                          [T](const ModelParams2d& p) {
                              return QuoteRates{p.curveR.zero_rate(T), p.curveEta.zero_rate(T)};
                          },
                      },
                      model);
}

PriceResult price_model(const Model& model, const OptionSpec& spec, int Nt, int Ns,
                        const PricerOptions& options) {
    return std::visit(Overloaded{
                          [&](const ModelParams& p) { return price_hhw(p, spec, Nt, Ns, options); },
                          [&](const ModelParams2d& p) { return price_hhw2d(p, spec, Nt, Ns, options); },
                      },
                      model);
}

MCResult mc_model(const Model& model, const OptionSpec& spec, int Nt, std::int64_t paths,
                  std::uint64_t seed, const McOptions& options) {
    return std::visit(
        Overloaded{
            [&](const ModelParams& p) { return mc_price(p, spec, Nt, paths, seed, options); },
            [&](const ModelParams2d& p) { return mc_price2d(p, spec, Nt, paths, seed, options); },
        },
        model);
}

std::vector<RatioRow> ratio_table(int N, int levels,
                                  const std::function<double(int, int)>& price_at) {
    if (levels < 1 || levels > 20) throw ConfigError("ratio.levels must be in [1, 20]");
    const int divisor = 1 << (levels + 1);
    if (N < divisor || N % divisor != 0)
        throw ConfigError("ratio.N must be a positive multiple of " + std::to_string(divisor) +
                          " (2^(levels+1))");
    std::vector<RatioRow> rows;
    for (int Nt = N / divisor; Nt <= N; Nt *= 2) {
        RatioRow row{Nt, 2 * Nt, price_at(Nt, 2 * Nt), std::nullopt};
        if (rows.size() >= 2) {
            const double p4 = rows[rows.size() - 2].price;
            const double p2 = rows.back().price;
            if (row.price != p2) row.ratio = convergence_ratio(p4, p2, row.price);
        }
        rows.push_back(row);
    }
    return rows;
}

// ============================================================================
// Commands
// ============================================================================

void cmd_price(const ConfigFile& config, const CommandOptions& options, std::ostream& out) {
    const auto points = expand_sweeps(config);
    auto header = sweep_keys(config);
    for (const char* c : {"Nt", "Ns", "price", "implied_vol", "wall_time_s"}) header.push_back(c);
    // Validate every point before the first (possibly long) run.
    std::vector<RunConfig> runs;
    for (const auto& point : points) {
        runs.push_back(build_run_config(config, point));
        (void)require_option(runs.back());
        (void)require(runs.back().Nt, "grid.Nt");
        (void)require(runs.back().Ns, "grid.Ns");
    }
    write_row(out, header);
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const RunConfig& cfg = runs[i];
        PricerOptions po = cfg.pricer;
        po.threads = options.threads;
        const PriceResult r = price_model(cfg.model, *cfg.option, *cfg.Nt, *cfg.Ns, po);
        auto row = row_prefix(points[i]);
        row.push_back(std::to_string(r.Nt));
        row.push_back(std::to_string(r.Ns));
        row.push_back(format_fixed(r.price));
        row.push_back(r.impliedVol ? format_fixed(*r.impliedVol) : "");
        row.push_back(format_fixed(r.wallTime));
        write_row(out, row);
        out.flush();
    }
}

void cmd_mc(const ConfigFile& config, const CommandOptions& options, std::ostream& out) {
    const auto points = expand_sweeps(config);
    auto header = sweep_keys(config);
    for (const char* c : {"Nt", "paths", "seed", "estimate", "ci_halfwidth", "wall_time_s"})
        header.push_back(c);
    std::vector<RunConfig> runs;
    for (const auto& point : points) {
        runs.push_back(build_run_config(config, point));
        const OptionSpec spec = require_option(runs.back());
        if (spec.exercise != ExerciseKind::european)
            throw ConfigError("mc: hybrid Monte Carlo supports european exercise only; "
                              "american options are unsupported");
        (void)require(runs.back().Nt, "grid.Nt");
        (void)require(runs.back().paths, "mc.paths");
        (void)require(runs.back().seed, "mc.seed");
    }
    write_row(out, header);
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const RunConfig& cfg = runs[i];
        const MCResult r = mc_model(cfg.model, *cfg.option, *cfg.Nt, *cfg.paths, *cfg.seed,
                                    McOptions{options.threads});
        auto row = row_prefix(points[i]);
        row.push_back(std::to_string(*cfg.Nt));
        row.push_back(std::to_string(r.paths));
        row.push_back(std::to_string(r.seed));
        row.push_back(format_fixed(r.estimate));
        row.push_back(format_fixed(r.halfWidth));
        row.push_back(format_fixed(r.wallTime));
        write_row(out, row);
        out.flush();
    }
}

void cmd_ratio(const ConfigFile& config, const CommandOptions& options, std::ostream& out) {
    const auto points = expand_sweeps(config);
    auto header = sweep_keys(config);
    for (const char* c : {"K", "Nt", "Ns", "price", "ratio"}) header.push_back(c);
    std::vector<RunConfig> runs;
    for (const auto& point : points) {
        runs.push_back(build_run_config(config, point));
        (void)require_option(runs.back());
        const int N = require(runs.back().ratioN, "ratio.N");
        // Fails early on indivisible N.
        (void)ratio_table(N, runs.back().ratioLevels, [](int, int) { return 0.0; });
    }
    write_row(out, header);
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const RunConfig& cfg = runs[i];
        PricerOptions po = cfg.pricer;
        po.threads = options.threads;
        const auto rows = ratio_table(*cfg.ratioN, cfg.ratioLevels, [&](int Nt, int Ns) {
            return price_model(cfg.model, *cfg.option, Nt, Ns, po).price;
        });
        for (const auto& r : rows) {
            auto row = row_prefix(points[i]);
            row.push_back(format_fixed(cfg.option->strike));
            row.push_back(std::to_string(r.Nt));
            row.push_back(std::to_string(r.Ns));
            row.push_back(format_fixed(r.price));
            row.push_back(r.ratio ? format_fixed(*r.ratio) : "");
            write_row(out, row);
        }
        out.flush();
    }
}

void cmd_smile(const ConfigFile& config, const CommandOptions& options, std::ostream& out) {
    const auto points = expand_sweeps(config);
    auto header = sweep_keys(config);
    for (const char* c : {"method", "strike", "moneyness", "price", "implied_vol", "status"})
        header.push_back(c);
    std::vector<RunConfig> runs;
    for (const auto& point : points) {
        runs.push_back(build_run_config(config, point));
        const RunConfig& cfg = runs.back();
        (void)require(cfg.smileStrikes, "smile.strikes");
        (void)require(cfg.maturity, "option.maturity");
        if (cfg.option && (cfg.option->payoff != PayoffKind::call ||
                           cfg.option->exercise != ExerciseKind::european || cfg.option->upAndOut))
            throw ConfigError("smile: only european calls without barrier are supported");
        for (const auto& m : cfg.smileMethods) {
            (void)require(cfg.Nt, "grid.Nt");
            if (m == "htfd") (void)require(cfg.Ns, "grid.Ns");
            if (m == "hmc") {
                (void)require(cfg.paths, "mc.paths");
                (void)require(cfg.seed, "mc.seed");
            }
        }
    }
    write_row(out, header);
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const RunConfig& cfg = runs[i];
        const double T = *cfg.maturity;
        const double S0 = std::visit([](const auto& p) { return p.S0; }, cfg.model);
        const QuoteRates qr = quote_rates(cfg.model, T);
        for (const auto& method : cfg.smileMethods) {
            for (const double K : *cfg.smileStrikes) {
                OptionSpec spec;
                spec.strike = K;
                spec.maturity = T;
                double price = 0.0;
                if (method == "htfd") {
                    PricerOptions po = cfg.pricer;
                    po.threads = options.threads;
                    price = price_model(cfg.model, spec, *cfg.Nt, *cfg.Ns, po).price;
                } else {
                    price = mc_model(cfg.model, spec, *cfg.Nt, *cfg.paths, *cfg.seed,
                                     McOptions{options.threads})
                                .estimate;
                }
                const auto vol = try_implied_vol(price, S0, K, T, qr.r, qr.q);
                auto row = row_prefix(points[i]);
                row.push_back(method);
                row.push_back(format_fixed(K));
                row.push_back(format_fixed(K / S0));
                row.push_back(format_fixed(price));
                row.push_back(vol ? format_fixed(*vol) : "");
                row.push_back(vol ? "ok" : "outside_band");
                write_row(out, row);
            }
        }
        out.flush();
    }
}

int run_command(const std::string& command, const std::string& config_path,
                const CommandOptions& options, std::ostream& out, std::ostream& err) {
    try {
        const ConfigFile config = load_config(config_path);
        if (command == "price")
            cmd_price(config, options, out);
        else if (command == "mc")
            cmd_mc(config, options, out);
        else if (command == "ratio")
            cmd_ratio(config, options, out);
        else if (command == "smile")
            cmd_smile(config, options, out);
        else
            throw ConfigError("unknown command '" + command + "'");
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const UnsupportedError& e) {
        err << "unsupported: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    }
}

}  // namespace hhw::cli
