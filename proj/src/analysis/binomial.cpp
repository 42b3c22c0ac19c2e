#include <cmath>
#include <cstdio>
#include <limits>

#include "eventflux/analysis.hpp"
#include "eventflux/error.hpp"

namespace eventflux::analysis {

namespace {

void check_binomial_args(std::uint64_t correct, std::uint64_t trials, double chance) {
  if (!(chance > 0.0 && chance < 1.0))
    throw Error(ErrorKind::Argument, "binomial: chance must lie strictly between 0 and 1");
  if (correct > trials)
    throw Error(ErrorKind::Argument, "binomial: correct (" + std::to_string(correct) +
                                         ") exceeds trials (" + std::to_string(trials) + ")");
}

}  // namespace

double log_binomial_tail(std::uint64_t correct, std::uint64_t trials, double chance) {
  check_binomial_args(correct, trials, chance);
  if (correct == 0) return 0.0;

  // Extended precision keeps the log-pmf terms accurate to ~1e-17 relative
  // even where lgamma(n + 1) is in the hundreds.
  using real = long double;
  const real n = static_cast<real>(trials);
  const real log_q = std::log(static_cast<real>(chance));
  const real log_1mq = std::log1p(-static_cast<real>(chance));
  const real log_n_fact = std::lgamma(n + 1);

  auto log_pmf = [&](std::uint64_t i) {
    const real k = static_cast<real>(i);
    return log_n_fact - std::lgamma(k + 1) - std::lgamma(n - k + 1) + k * log_q + (n - k) * log_1mq;
  };

  real peak = -std::numeric_limits<real>::infinity();
  for (std::uint64_t i = correct; i <= trials; ++i) peak = std::max(peak, log_pmf(i));
  real sum = 0;
  for (std::uint64_t i = correct; i <= trials; ++i) sum += std::exp(log_pmf(i) - peak);
  const real result = peak + std::log(sum);
  return static_cast<double>(std::min<real>(result, 0));
}

double binomial_above_chance(std::uint64_t correct, std::uint64_t trials, double chance) {
  return std::exp(log_binomial_tail(correct, trials, chance));
}

std::string format_p_value(double log_p) {
  if (std::isnan(log_p)) return "nan";
  if (log_p == -std::numeric_limits<double>::infinity()) return "0.000e+00";
  const long double log10_p = static_cast<long double>(log_p) / std::log(10.0L);
  long long exponent = static_cast<long long>(std::floor(log10_p));
  long double mantissa = std::pow(10.0L, log10_p - static_cast<long double>(exponent));
  mantissa = std::round(mantissa * 1000.0L) / 1000.0L;
  if (mantissa >= 10.0L) {
    mantissa /= 10.0L;
    ++exponent;
  }
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.3Lfe%c%02lld", mantissa, exponent < 0 ? '-' : '+',
                exponent < 0 ? -exponent : exponent);
  return buf;
}

}  // namespace eventflux::analysis
