#include "hhw/analytics.hpp"

#include <cmath>

#include "hhw/errors.hpp"

namespace hhw {

namespace {

constexpr double kVolLo = 1e-6;
constexpr double kVolHi = 5.0;
constexpr double kPriceTol = 1e-10;
constexpr int kMaxIter = 200;

double bs_vega(double S0, double K, double T, double r, double q, double vol) {
    const double st = vol * std::sqrt(T);
    const double d1 = (std::log(S0 / K) + (r - q + 0.5 * vol * vol) * T) / st;
    return S0 * std::exp(-q * T) * std::exp(-0.5 * d1 * d1) / std::sqrt(2.0 * M_PI) *
           std::sqrt(T);
}

}  // namespace

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double bs_call(double S0, double K, double T, double r, double q, double vol) {
    const double fwd_s = S0 * std::exp(-q * T);
    const double fwd_k = K * std::exp(-r * T);
    const double st = vol * std::sqrt(T);
    if (!(st > 0.0)) return std::max(fwd_s - fwd_k, 0.0);
    const double d1 = (std::log(S0 / K) + (r - q + 0.5 * vol * vol) * T) / st;
    const double d2 = d1 - st;
    return fwd_s * norm_cdf(d1) - fwd_k * norm_cdf(d2);
}

double bs_put(double S0, double K, double T, double r, double q, double vol) {
    const double fwd_s = S0 * std::exp(-q * T);
    const double fwd_k = K * std::exp(-r * T);
    const double st = vol * std::sqrt(T);
    if (!(st > 0.0)) return std::max(fwd_k - fwd_s, 0.0);
    const double d1 = (std::log(S0 / K) + (r - q + 0.5 * vol * vol) * T) / st;
    const double d2 = d1 - st;
    return fwd_k * norm_cdf(-d2) - fwd_s * norm_cdf(-d1);
}

double implied_vol(double price, double S0, double K, double T, double r, double q) {
    const double lower = std::max(S0 * std::exp(-q * T) - K * std::exp(-r * T), 0.0);
    const double upper = S0 * std::exp(-q * T);
    if (!(price > lower && price < upper))
        throw DomainError("implied_vol: price outside the no-arbitrage band");

    double lo = kVolLo;
    double hi = kVolHi;
    const double f_lo = bs_call(S0, K, T, r, q, lo) - price;
    const double f_hi = bs_call(S0, K, T, r, q, hi) - price;
    if (std::abs(f_lo) <= kPriceTol) return lo;
    if (std::abs(f_hi) <= kPriceTol) return hi;
    if (f_lo > 0.0 || f_hi < 0.0)
        throw DomainError("implied_vol: price not attainable for vol in [1e-6, 5]");

    double vol = 0.5 * (lo + hi);
    for (int it = 0; it < kMaxIter; ++it) {
        const double f = bs_call(S0, K, T, r, q, vol) - price;
        if (std::abs(f) <= kPriceTol) return vol;
        if (f > 0.0)
            hi = vol;
        else
            lo = vol;
        // Newton step, falling back to bisection when it leaves the bracket.
        const double vega = bs_vega(S0, K, T, r, q, vol);
        double next = vega > 0.0 ? vol - f / vega : lo - 1.0;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (hi - lo < 1e-15) return next;
        vol = next;
    }
    return vol;
}

std::optional<double> try_implied_vol(double price, double S0, double K, double T, double r,
                                      double q) {
    try {
        return implied_vol(price, S0, K, T, r, q);
    } catch (const DomainError&) {
        return std::nullopt;
    }
}

double convergence_ratio(double pN4, double pN2, double pN) {
    const double denom = pN - pN2;
    if (denom == 0.0) throw DomainError("convergence_ratio: undefined (P_N == P_N/2)");
    return (pN2 - pN4) / denom;
}

}  // namespace hhw
