#include "txg/amount.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "txg/error.hpp"

namespace txg {

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kMalformedRecord: return 3;
    case ErrorKind::kMissingField: return 4;
    case ErrorKind::kUnknownAccount: return 5;
    case ErrorKind::kClusterOverlap: return 6;
    case ErrorKind::kPartialColoring: return 7;
    case ErrorKind::kConfig: return 8;
    case ErrorKind::kIo: return 9;
    case ErrorKind::kConsistency: return 10;
  }
  return 1;
}

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kMalformedRecord: return "malformed-record";
    case ErrorKind::kMissingField: return "missing-field";
    case ErrorKind::kUnknownAccount: return "unknown-account";
    case ErrorKind::kClusterOverlap: return "cluster-overlap";
    case ErrorKind::kPartialColoring: return "partial-coloring";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kConsistency: return "consistency";
  }
  return "unknown";
}

std::string to_string(Flux value) {
  if (value == 0) return "0";
  std::string out;
  while (value != 0) {
    out.push_back(static_cast<char>('0' + static_cast<int>(value % 10)));
    value /= 10;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

Flux parse_flux(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty integer");
  constexpr Flux kMax = ~Flux{0};
  Flux value = 0;
  for (char c : text) {
    if (c < '0' || c > '9') {
      throw std::invalid_argument("not a decimal integer: " + std::string(text));
    }
    const auto digit = static_cast<unsigned>(c - '0');
    if (value > (kMax - digit) / 10) {
      throw std::invalid_argument("integer overflow: " + std::string(text));
    }
    value = value * 10 + digit;
  }
  return value;
}

Planck parse_dot(std::string_view text) {
  const auto dot = text.find('.');
  const std::string_view whole = text.substr(0, dot);
  std::string_view frac =
      dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if (whole.empty() && frac.empty()) {
    throw std::invalid_argument("empty DOT amount");
  }
  if (dot != std::string_view::npos && frac.empty()) {
    throw std::invalid_argument("dangling decimal point: " + std::string(text));
  }
  if (frac.size() > static_cast<std::size_t>(kDotDecimals)) {
    throw std::invalid_argument("more than 10 fractional digits: " +
                                std::string(text));
  }
  const Flux whole_value = whole.empty() ? 0 : parse_flux(whole);
  Flux frac_value = frac.empty() ? 0 : parse_flux(frac);
  for (std::size_t i = frac.size(); i < static_cast<std::size_t>(kDotDecimals); ++i) {
    frac_value *= 10;
  }
  const Flux total = whole_value * kPlanckPerDot + frac_value;
  if (whole_value > std::numeric_limits<Planck>::max() / kPlanckPerDot ||
      total > std::numeric_limits<Planck>::max()) {
    throw std::invalid_argument("DOT amount out of range: " + std::string(text));
  }
  return static_cast<Planck>(total);
}

std::string group_thousands(std::string digits) {
  std::string out;
  const std::size_t n = digits.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i != 0 && (n - i) % 3 == 0) out.push_back(',');
    out.push_back(digits[i]);
  }
  return out;
}

namespace {

Flux pow10(int e) {
  Flux p = 1;
  while (e-- > 0) p *= 10;
  return p;
}

// Renders scaled / 10^decimals with exactly `decimals` fractional digits.
std::string fixed_point(Flux scaled, int decimals, bool grouped) {
  const Flux unit = pow10(decimals);
  std::string whole = to_string(scaled / unit);
  if (grouped) whole = group_thousands(std::move(whole));
  if (decimals == 0) return whole;
  std::string frac = to_string(scaled % unit);
  frac.insert(0, static_cast<std::size_t>(decimals) - frac.size(), '0');
  return whole + "." + frac;
}

}  // namespace

std::string format_dot(Flux planck, int decimals, bool grouped) {
  const Flux divisor = pow10(kDotDecimals - decimals);
  const Flux scaled = (planck + divisor / 2) / divisor;
  return fixed_point(scaled, decimals, grouped);
}

std::string format_pct(Flux numerator, Flux denominator, int decimals) {
  if (denominator == 0) return fixed_point(0, decimals, false);
  // numerator * 100 * 10^decimals / denominator, rounded half up.
  const Flux scale = 100 * pow10(decimals);
  const Flux scaled = (2 * numerator * scale + denominator) / (2 * denominator);
  return fixed_point(scaled, decimals, false);
}

double fraction(Flux numerator, Flux denominator) {
  if (denominator == 0) return 0.0;
  return static_cast<double>(static_cast<long double>(numerator) /
                             static_cast<long double>(denominator));
}

}  // namespace txg
