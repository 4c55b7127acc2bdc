#include "hhw/hybrid_mc.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "hhw/errors.hpp"
#include "hhw/parallel.hpp"

namespace hhw {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
constexpr std::int64_t kChunk = 1024;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// A contract only needs a payoff and a terminal time for the simulator; the
// pricer's grid is unused, so a tiny one is requested.
Contract placeholder_contract(double T) {
    Contract c;
    c.payoff = [](double) { return 0.0; };
    c.maturity = T;
    return c;
}

}  // namespace

// ----------------------------------------------------------------------------
// Random source
// ----------------------------------------------------------------------------

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(mix64(seed) ^ stream)) {}

std::uint64_t CounterRng::next_u64() { return mix64(key_ + (++counter_) * kGamma); }

double CounterRng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double CounterRng::uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::gaussian() { return inverse_normal_cdf(uniform_open()); }

double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw DomainError("inverse_normal_cdf: p must be in [0, 1]");
    }
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2509.0809287301226727 * r + 33430.575583588128105) * r +
                     67265.770927008700853) * r + 45921.953931549871457) * r +
                   13731.693765509461125) * r + 1971.5909503065514427) * r +
                 133.14166789178437745) * r + 3.387132872796366608) /
               (((((((5226.495278852545925 * r + 28729.085735721942674) * r +
                     39307.89580009271061) * r + 21213.794301586595867) * r +
                   5394.1960214247511077) * r + 687.1870074920579083) * r +
                 42.313330701600911252) * r + 1.0);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r +
                    0.24178072517745061177) * r + 1.27045825245236838258) * r +
                  3.64784832476320460504) * r + 5.7694972214606914055) * r +
                4.6303378461565452959) * r + 1.42343711074968357734) /
              (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r +
                    0.0151986665636164571966) * r + 0.14810397642748007459) * r +
                  0.68976733498510000455) * r + 1.6763848301838038494) * r +
                2.05319162663775882187) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    0.0012426609473880784386) * r + 0.026532189526576123093) * r +
                  0.29656057182850489123) * r + 1.7848265399172913358) * r +
                5.4637849111641143699) * r + 6.6579046435011037772) /
              (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r +
                    1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
                  0.0148753612908506148525) * r + 0.13692988092273580531) * r +
                0.59983220655588793769) * r + 1.0);
    }
    return q < 0.0 ? -val : val;
}

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 16) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

// ----------------------------------------------------------------------------
// Steps
// ----------------------------------------------------------------------------

int select_branch(const JointJumpProbs& probs, double uniform) {
    double acc = 0.0;
    for (int b = 0; b < probs.branches; ++b) {
        acc += probs[b];
        if (uniform < acc) return b;
    }
    // Round-off left a sliver above the cumulative sum: take the last
    // branch with positive probability.
    for (int b = probs.branches - 1; b >= 0; --b)
        if (probs[b] > 0.0) return b;
    return 0;
}

double euler_y_step(const ModelParams& p, double y, double v_n, double x_n, double v_next,
                    double x_next, double t_n, double h, double gaussian) {
    if (v_n < 0.0) throw DomainError("euler_y_step: v_n must be >= 0");
    const double sv = std::sqrt(v_n);
    return y + (p.rho1 / p.sigmaV) * (v_next - v_n) + p.rho2 * sv * (x_next - x_n) +
           effective_drift(p, v_n, x_n, t_n) * h + p.rho3() * std::sqrt(h * v_n) * gaussian;
}

double euler_y_step(const ModelParams2d& p, double y, double v_n, double x1_n, double x2_n,
                    double v_next, double x1_next, double x2_next, double t_n, double h,
                    double gaussian) {
    if (v_n < 0.0) throw DomainError("euler_y_step: v_n must be >= 0");
    const double sv = std::sqrt(v_n);
    return y + (p.rho1 / p.sigmaV) * (v_next - v_n) + p.rho2 * sv * (x1_next - x1_n) +
           p.rho3c * sv * (x2_next - x2_n) + effective_drift_2d(p, v_n, x1_n, x2_n, t_n) * h +
           p.rho4() * std::sqrt(h * v_n) * gaussian;
}

// ----------------------------------------------------------------------------
// HybridSimulator
// ----------------------------------------------------------------------------

HybridSimulator::HybridSimulator(const ModelParams& model, int Nt, double T)
    : factors_(1),
      y0_(std::log(model.S0)),
      sigmaR_(model.sigmaR),
      pricer_(model, placeholder_contract(T), Nt, 2) {}

HybridSimulator::HybridSimulator(const ModelParams2d& model, int Nt, double T)
    : factors_(2),
      y0_(std::log(model.S0)),
      sigmaR_(model.sigmaR),
      pricer_(model, placeholder_contract(T), Nt, 2) {}

PathState HybridSimulator::initial_state() const {
    PathState s;
    s.y = y0_;
    return s;
}

PathState HybridSimulator::chain_step(const PathState& state, double uniform) const {
    const int n = state.n;
    if (n >= steps()) throw DomainError("chain_step: path already at maturity");
    const JointJumpProbs probs = pricer_.branch_probabilities(n, state.k, state.j, state.l);
    const int b = select_branch(probs, uniform);
    const Lattice1D& V = pricer_.variance_lattice();
    const Lattice1D& X1 = pricer_.ou_lattice(0);

    PathState next = state;
    next.n = n + 1;
    if (factors_ == 1) {
        next.k = ((b >> 1) & 1) == 0 ? V.jump_up(n, state.k) : V.jump_down(n, state.k);
        next.j = (b & 1) == 0 ? X1.jump_up(n, state.j) : X1.jump_down(n, state.j);
    } else {
        const Lattice1D& X2 = pricer_.ou_lattice(1);
        next.k = ((b >> 2) & 1) == 0 ? V.jump_up(n, state.k) : V.jump_down(n, state.k);
        next.j = ((b >> 1) & 1) == 0 ? X1.jump_up(n, state.j) : X1.jump_down(n, state.j);
        next.l = (b & 1) == 0 ? X2.jump_up(n, state.l) : X2.jump_down(n, state.l);
    }
    return next;
}

PathState HybridSimulator::advance(const PathState& state, double uniform,
                                   double gaussian) const {
    PathState next = chain_step(state, uniform);
    const int n = state.n;
    const double h = step();
    const Lattice1D& V = pricer_.variance_lattice();
    const Lattice1D& X1 = pricer_.ou_lattice(0);
    const double v = V.node(n, state.k);
    const double x1 = X1.node(n, state.j);
    double x2 = 0.0, x2n = 0.0;
    if (factors_ == 2) {
        x2 = pricer_.ou_lattice(1).node(n, state.l);
        x2n = pricer_.ou_lattice(1).node(n + 1, next.l);
    }
    next.y = state.y +
             pricer_.branch_shift(v, V.node(n + 1, next.k), x1, X1.node(n + 1, next.j), x2, x2n) +
             pricer_.drift(n, v, x1, x2) * h +
             std::sqrt(pricer_.rho_perp2() * h * v) * gaussian;
    return next;
}

PathOutcome HybridSimulator::simulate_path(std::uint64_t seed, std::uint64_t path,
                                           std::optional<double> upAndOut) const {
    CounterRng rng(seed, path);
    const double h = step();
    const double log_barrier = upAndOut ? std::log(*upAndOut) : 0.0;
    const Lattice1D& X1 = pricer_.ou_lattice(0);
    PathOutcome out;
    PathState s = initial_state();
    double rate_sum = 0.0;
    for (int n = 0; n < steps(); ++n) {
        rate_sum += sigmaR_ * X1.node(n, s.j) + pricer_.phi_r(n);
        const double u = rng.uniform();
        const double g = rng.gaussian();
        s = advance(s, u, g);
        if (upAndOut && s.y >= log_barrier) out.knockedOut = true;
    }
    out.yT = s.y;
    out.vT = pricer_.variance_lattice().node(steps(), s.k);
    out.rateIntegral = rate_sum * h;
    return out;
}

// ----------------------------------------------------------------------------
// Estimators
// ----------------------------------------------------------------------------

MCResult mc_expectation(const HybridSimulator& sim, const Contract& contract,
                        std::int64_t paths, std::uint64_t seed, const McOptions& options) {
    if (contract.american) throw UnsupportedError("hybrid Monte Carlo prices european options only");
    if (paths < 2) throw DomainError("mc needs at least 2 paths");
    const auto start = std::chrono::steady_clock::now();

    std::vector<double> values(static_cast<std::size_t>(paths));
    const int chunks = static_cast<int>((paths + kChunk - 1) / kChunk);
    parallel_for(chunks, options.threads, [&](int c) {
        const std::int64_t lo = c * kChunk;
        const std::int64_t hi = std::min(paths, lo + kChunk);
        for (std::int64_t i = lo; i < hi; ++i) {
            const PathOutcome o = sim.simulate_path(seed, static_cast<std::uint64_t>(i),
                                                    contract.upAndOut);
            values[static_cast<std::size_t>(i)] =
                o.knockedOut ? 0.0 : std::exp(-o.rateIntegral) * contract.payoff(std::exp(o.yT));
        }
    });

    const double n = static_cast<double>(paths);
    const double mean = pairwise_sum(values) / n;
    for (double& v : values) v = (v - mean) * (v - mean);
    const double var = pairwise_sum(values) / (n - 1.0);

    MCResult out;
    out.estimate = mean;
    out.stdError = std::sqrt(var / n);
    out.halfWidth = 1.96 * out.stdError;
    out.paths = paths;
    out.seed = seed;
    out.wallTime =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

MCResult mc_price(const ModelParams& model, const OptionSpec& spec, int Nt, std::int64_t paths,
                  std::uint64_t seed, const McOptions& options) {
    if (spec.exercise != ExerciseKind::european)
        throw UnsupportedError("hybrid Monte Carlo prices european options only");
    const HybridSimulator sim(model, Nt, spec.maturity);
    return mc_expectation(sim, make_contract(spec), paths, seed, options);
}

MCResult mc_price2d(const ModelParams2d& model, const OptionSpec& spec, int Nt,
                    std::int64_t paths, std::uint64_t seed, const McOptions& options) {
    if (spec.exercise != ExerciseKind::european)
        throw UnsupportedError("hybrid Monte Carlo prices european options only");
    const HybridSimulator sim(model, Nt, spec.maturity);
    return mc_expectation(sim, make_contract(spec), paths, seed, options);
}

}  // namespace hhw
