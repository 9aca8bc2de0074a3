#pragma once

namespace mmc {

/// Standard normal CDF, 0.5·erfc(-x/√2).
double standard_normal_cdf(double x) noexcept;

/// Standard normal density.
double standard_normal_pdf(double x) noexcept;

/// Inverse of the standard normal CDF for u in (0, 1). Wichura's AS241 rational
/// approximation (central, near-tail and far-tail branches), about 1e-16 relative in z.
/// Throws DomainError outside the open unit interval.
double standard_normal_quantile(double u);

}  // namespace mmc
