#pragma once

#include <optional>

namespace hhw {

/// Standard normal cumulative distribution.
[[nodiscard]] double norm_cdf(double x);

/// Black-Scholes price of a call with continuous rate r and dividend yield q.
[[nodiscard]] double bs_call(double S0, double K, double T, double r, double q, double vol);
[[nodiscard]] double bs_put(double S0, double K, double T, double r, double q, double vol);

/// Volatility reproducing a call price, by safeguarded Newton-bisection on
/// [1e-6, 5] to |price error| <= 1e-10. Throws DomainError when the price lies
/// outside the no-arbitrage band (max(S e^{-qT} - K e^{-rT}, 0), S e^{-qT}).
[[nodiscard]] double implied_vol(double price, double S0, double K, double T, double r,
                                 double q);

/// As implied_vol, returning nullopt instead of throwing.
[[nodiscard]] std::optional<double> try_implied_vol(double price, double S0, double K,
                                                    double T, double r, double q);

/// (P_{N/2} - P_{N/4}) / (P_N - P_{N/2}); about 2^a for an O(N^-a) scheme.
/// Throws DomainError when P_N == P_{N/2}.
[[nodiscard]] double convergence_ratio(double pN4, double pN2, double pN);

struct SmilePoint {
    double moneyness;
    double impliedVol;
};

}  // namespace hhw
