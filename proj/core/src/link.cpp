#include "coxbo/link.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "coxbo/error.hpp"

namespace coxbo {

namespace {

double logistic(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

LinkFunction LinkFunction::from_name(std::string_view name) {
  if (name == "exponential") return LinkFunction(LinkKind::kExponential);
  if (name == "quadratic") return LinkFunction(LinkKind::kQuadratic);
  if (name == "sigmoidal") return LinkFunction(LinkKind::kSigmoidal);
  if (name == "softplus") return LinkFunction(LinkKind::kSoftplus);
  fail(ErrorCategory::kInput, "unknown link function '" + std::string(name) + "'");
}

std::string_view LinkFunction::name() const noexcept {
  switch (kind_) {
    case LinkKind::kExponential: return "exponential";
    case LinkKind::kQuadratic: return "quadratic";
    case LinkKind::kSigmoidal: return "sigmoidal";
    case LinkKind::kSoftplus: return "softplus";
  }
  return "unknown";
}

double LinkFunction::kappa(double x) const noexcept {
  switch (kind_) {
    case LinkKind::kExponential: return std::exp(x);
    case LinkKind::kQuadratic: return x * x;
    case LinkKind::kSigmoidal: return logistic(x);
    case LinkKind::kSoftplus: return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
  }
  return 0.0;
}

double LinkFunction::kappa_dot(double x) const noexcept {
  switch (kind_) {
    case LinkKind::kExponential: return std::exp(x);
    case LinkKind::kQuadratic: return 2.0 * x;
    case LinkKind::kSigmoidal: {
      const double s = logistic(x);
      return s * (1.0 - s);
    }
    case LinkKind::kSoftplus: return logistic(x);
  }
  return 0.0;
}

double LinkFunction::kappa_ddot(double x) const noexcept {
  switch (kind_) {
    case LinkKind::kExponential: return std::exp(x);
    case LinkKind::kQuadratic: return 2.0;
    case LinkKind::kSigmoidal: {
      // (1 - e^x) e^x / (e^x + 1)^3 == s (1 - s) (1 - 2 s)
      const double s = logistic(x);
      return s * (1.0 - s) * (1.0 - 2.0 * s);
    }
    case LinkKind::kSoftplus: {
      const double s = logistic(x);
      return s * (1.0 - s);
    }
  }
  return 0.0;
}

double LinkFunction::kappa_inv(double y) const {
  require(std::isfinite(y), ErrorCategory::kDomain, "kappa_inv: non-finite argument");
  switch (kind_) {
    case LinkKind::kExponential:
      require(y > 0.0, ErrorCategory::kDomain, "kappa_inv(exponential) needs y > 0");
      return std::log(y);
    case LinkKind::kQuadratic:
      require(y > 0.0, ErrorCategory::kDomain, "kappa_inv(quadratic) needs y > 0");
      return std::sqrt(y);
    case LinkKind::kSigmoidal:
      require(y > 0.0 && y < 1.0, ErrorCategory::kDomain, "kappa_inv(sigmoidal) needs 0 < y < 1");
      return -std::log(1.0 / y - 1.0);
    case LinkKind::kSoftplus:
      require(y > 0.0, ErrorCategory::kDomain, "kappa_inv(softplus) needs y > 0");
      // log(e^y - 1) == y + log(1 - e^-y)
      return y > 1.0 ? y + std::log1p(-std::exp(-y)) : std::log(std::expm1(y));
  }
  return 0.0;
}

double LinkFunction::clamp_to_range(double y, double floor) const noexcept {
  const double lo = std::max(floor, std::numeric_limits<double>::min());
  if (kind_ == LinkKind::kSigmoidal) return std::clamp(y, lo, 1.0 - 1e-9);
  return std::max(y, lo);
}

double kappa(LinkFunction link, double x) noexcept { return link.kappa(x); }
double kappa_dot(LinkFunction link, double x) noexcept { return link.kappa_dot(x); }
double kappa_ddot(LinkFunction link, double x) noexcept { return link.kappa_ddot(x); }
double kappa_inv(LinkFunction link, double y) { return link.kappa_inv(y); }

}  // namespace coxbo
