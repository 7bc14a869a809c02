#ifndef CRITLIM_KERNELS_HPP
#define CRITLIM_KERNELS_HPP

#include <cmath>
#include <concepts>
#include <stdexcept>
#include <string>

namespace critlim {

enum class Family { fbm, subfbm, bifbm };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::fbm: return "fbm";
    case Family::subfbm: return "subfbm";
    case Family::bifbm: return "bifbm";
  }
  return "?";
}

inline Family family_from_name(const std::string& s) {
  if (s == "fbm") return Family::fbm;
  if (s == "subfbm") return Family::subfbm;
  if (s == "bifbm") return Family::bifbm;
  throw std::invalid_argument("unknown kernel family: " + s);
}

// t^e with the t = 0 case short-circuited (pow(0, e) is fine for e > 0,
// but keep the branch explicit so negative exponents never see 0).
inline double pow0(double t, double e) {
  return t <= 0.0 ? 0.0 : std::pow(t, e);
}

struct Alphas {
  double alpha1;
  double alpha2;
  double lambda;  // (alpha2/alpha1)^(d/4)
};

/// One of the three shipped Gaussian process families, parameterized by
/// the Hurst exponent H (and K for the bi-fractional case).  Variance
/// scales as alpha1 * t^(2*h_eff) with h_eff = H or H*K.
struct KernelSpec {
  Family family = Family::fbm;
  double H = 0.5;
  double K = 1.0;   // used by bifbm only; fixed to 1 otherwise
  int d = 4;        // ambient dimension
  bool critical = false;

  KernelSpec() = default;

  KernelSpec(Family fam, double h, double k, int dim, bool crit = false)
      : family(fam), H(h), K(k), d(dim), critical(crit) {
    validate();
  }

  static KernelSpec fbm(double h, int dim, bool crit = false) {
    return KernelSpec(Family::fbm, h, 1.0, dim, crit);
  }
  static KernelSpec subfbm(double h, int dim, bool crit = false) {
    return KernelSpec(Family::subfbm, h, 1.0, dim, crit);
  }
  static KernelSpec bifbm(double h, double k, int dim, bool crit = false) {
    return KernelSpec(Family::bifbm, h, k, dim, crit);
  }

  void validate() const {
    if (!(H > 0.0 && H < 1.0))
      throw std::invalid_argument("KernelSpec: H must lie in (0,1)");
    if (!(K > 0.0 && K <= 1.0))
      throw std::invalid_argument("KernelSpec: K must lie in (0,1]");
    if (family != Family::bifbm && K != 1.0)
      throw std::invalid_argument("KernelSpec: K is a bifbm parameter");
    if (d < 1) throw std::invalid_argument("KernelSpec: d must be positive");
    if (critical && std::abs(h_eff() * d - 2.0) > 1e-12)
      throw std::invalid_argument(
          "KernelSpec: critical flag requires h_eff * d == 2");
  }

  // Effective variance exponent: Var(X_t) = alpha1 * t^(2*h_eff).
  double h_eff() const { return family == Family::bifbm ? H * K : H; }

  Alphas alphas() const {
    double a1 = 1.0, a2 = 1.0;
    switch (family) {
      case Family::fbm:
        break;
      case Family::subfbm:
        a1 = 2.0 - std::pow(2.0, 2.0 * H - 1.0);
        break;
      case Family::bifbm:
        a2 = std::pow(2.0, 1.0 - K);
        break;
    }
    return {a1, a2, std::pow(a2 / a1, 0.25 * d)};
  }

  double cov(double t, double s) const {
    if (t < 0.0 || s < 0.0)
      throw std::invalid_argument("cov: negative time");
    // all three families collapse to Brownian motion at H = 1/2 (K = 1);
    // min(t, s) avoids the cancellation of the power-form expressions
    if (H == 0.5 && K == 1.0) return std::min(t, s);
    switch (family) {
      case Family::fbm:
        return 0.5 * (pow0(t, 2 * H) + pow0(s, 2 * H) -
                      pow0(std::abs(t - s), 2 * H));
      case Family::subfbm:
        return pow0(t, 2 * H) + pow0(s, 2 * H) -
               0.5 * (pow0(t + s, 2 * H) + pow0(std::abs(t - s), 2 * H));
      case Family::bifbm:
        return std::pow(2.0, -K) *
               (pow0(pow0(t, 2 * H) + pow0(s, 2 * H), K) -
                pow0(std::abs(t - s), 2 * H * K));
    }
    return 0.0;
  }

  double var(double t) const { return cov(t, t); }
};

/// Strictly ordered times t1 < t2 < t3 < t4 defining the increment pair
/// ([t1,t2], [t3,t4]) used by the ratio-condition checks.
struct IncrementQuadruple {
  double t1, t2, t3, t4;

  IncrementQuadruple(double a, double b, double c, double d)
      : t1(a), t2(b), t3(c), t4(d) {
    if (!(t1 >= 0.0 && t1 < t2 && t2 < t3 && t3 < t4))
      throw std::invalid_argument("IncrementQuadruple: need 0 <= t1 < t2 < t3 < t4");
  }

  double dt2() const { return t2 - t1; }
  double dt3() const { return t3 - t2; }
  double dt4() const { return t4 - t3; }
};

template <typename T>
concept kernel_like = requires(const T& k, double t, double s) {
  { k.cov(t, s) } -> std::convertible_to<double>;
  { k.h_eff() } -> std::convertible_to<double>;
};

// E (X_b - X_a)(X_d - X_c), by bilinearity of the covariance.  Grouped by
// the shared second argument, so kernels that are exact at nearby inputs
// (the Brownian min form) cancel exactly for independent increments.
template <kernel_like Kernel>
double increment_cov(const Kernel& k, double a, double b, double c, double d) {
  return (k.cov(d, b) - k.cov(c, b)) - (k.cov(d, a) - k.cov(c, a));
}

template <kernel_like Kernel>
double increment_cov(const Kernel& k, const IncrementQuadruple& q) {
  return increment_cov(k, q.t1, q.t2, q.t3, q.t4);
}

template <kernel_like Kernel>
double increment_var(const Kernel& k, double a, double b) {
  return increment_cov(k, a, b, a, b);
}

// Stationary families have a closed increment variance; using it avoids the
// large-t cancellation of the bilinear route.
inline double increment_var(const KernelSpec& k, double a, double b) {
  if (k.family == Family::fbm) return pow0(std::abs(b - a), 2.0 * k.H);
  return increment_cov(k, a, b, a, b);
}

inline double cov(const KernelSpec& spec, double t, double s) {
  return spec.cov(t, s);
}

inline Alphas alphas(const KernelSpec& spec) { return spec.alphas(); }

inline double h_eff(const KernelSpec& spec) { return spec.h_eff(); }

}  // namespace critlim

#endif  // CRITLIM_KERNELS_HPP
