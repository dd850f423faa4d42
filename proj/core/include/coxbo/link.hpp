#pragma once

#include <string>
#include <string_view>

namespace coxbo {

enum class LinkKind { kExponential, kQuadratic, kSigmoidal, kSoftplus };

/// Smooth non-negative link kappa mapping the latent GP value to intensity,
/// together with its first two derivatives and inverse.
class LinkFunction {
 public:
  constexpr explicit LinkFunction(LinkKind kind) noexcept : kind_(kind) {}

  /// "exponential" | "quadratic" | "sigmoidal" | "softplus"
  static LinkFunction from_name(std::string_view name);
  std::string_view name() const noexcept;

  LinkKind kind() const noexcept { return kind_; }

  double kappa(double x) const noexcept;
  double kappa_dot(double x) const noexcept;
  double kappa_ddot(double x) const noexcept;
  /// Throws kDomain outside the open range of kappa.
  double kappa_inv(double y) const;

  /// Clamps y into the range where kappa_inv is defined.
  double clamp_to_range(double y, double floor) const noexcept;

  friend bool operator==(LinkFunction a, LinkFunction b) noexcept { return a.kind_ == b.kind_; }

 private:
  LinkKind kind_;
};

double kappa(LinkFunction link, double x) noexcept;
double kappa_dot(LinkFunction link, double x) noexcept;
double kappa_ddot(LinkFunction link, double x) noexcept;
double kappa_inv(LinkFunction link, double y);

}  // namespace coxbo
