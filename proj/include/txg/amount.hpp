#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace txg {

/// A single transfer amount in Planck. The total DOT supply fits in 64 bits.
using Planck = std::uint64_t;

/// Aggregated flux in Planck. Ledger-wide sums exceed 2^64 Planck.
__extension__ typedef unsigned __int128 Flux;

inline constexpr Planck kPlanckPerDot = 10'000'000'000ULL;
inline constexpr int kDotDecimals = 10;

std::string to_string(Flux value);

/// Parses a non-negative decimal integer. Throws std::invalid_argument.
Flux parse_flux(std::string_view text);

/// Parses a decimal DOT amount such as "1.5" into Planck. At most ten
/// fractional digits are accepted; anything finer is below one Planck.
/// Throws std::invalid_argument on malformed or out-of-range input.
Planck parse_dot(std::string_view text);

/// Planck rendered as DOT with `decimals` digits, rounded half up.
/// Thousands are grouped with commas when `grouped` is set.
std::string format_dot(Flux planck, int decimals = 2, bool grouped = false);

/// Exact numerator/denominator percentage, rounded half up to `decimals`
/// places, without the percent sign. A zero denominator yields "0.00".
std::string format_pct(Flux numerator, Flux denominator, int decimals = 2);

/// Same value as format_pct, as a double fraction in [0, 1] for JSON.
double fraction(Flux numerator, Flux denominator);

std::string group_thousands(std::string digits);

}  // namespace txg
