#pragma once

// Test-only oracles, independent of the library implementation paths they
// check. Keep this file free of looplab_core internals beyond basic types.

#include <cmath>
#include <complex>
#include <vector>

namespace oracles {

// 64-point Gauss-Legendre nodes/weights on [0,1], generated by Newton
// iteration on Legendre polynomials.
inline void gauss_legendre_01(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));  // initial guess on [-1,1]
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (t * p1 - p0) / (t * t - 1.0);
      double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    double p0 = 1.0, p1 = t;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    double dp = n * (t * p1 - p0) / (t * t - 1.0);
    x[i] = 0.5 * (t + 1.0);
    w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
  }
}

// Conformal radius of the square [-1,1]^2 seen from its center, from the
// Schwarz-Christoffel map f(z) = C * int_0^z dt / sqrt(1 - t^4) of the unit
// disk onto the square with corners at distance C*K on the axes. Matching the
// circumradius sqrt(2) of [-1,1]^2 gives radius = sqrt(2) / K with
// K = int_0^1 dt / sqrt(1 - t^4). The endpoint singularity is removed by
// t = 1 - s^2, giving a smooth integrand for Gauss-Legendre quadrature.
inline double square_conformal_radius() {
  std::vector<double> xs, ws;
  gauss_legendre_01(64, xs, ws);
  double K = 0.0;
  for (int i = 0; i < 64; ++i) {
    double s = xs[i];
    double t = 1.0 - s * s;
    K += ws[i] * 2.0 / std::sqrt((1.0 + t) * (1.0 + t * t));
  }
  return std::sqrt(2.0) / K;
}

// Conformal radius of a regular n-gon (circumradius R) from its center. The
// Schwarz-Christoffel map of the disk onto the n-gon is c*int_0^z (1-t^n)^(-2/n) dt,
// so the radius is R / K_n with K_n = B(1/n, 1-2/n)/n.
inline double regular_polygon_conformal_radius(int n, double circumradius) {
  double lg = std::lgamma(1.0 / n) + std::lgamma(1.0 - 2.0 / n) - std::lgamma(1.0 - 1.0 / n);
  double K = std::exp(lg) / n;
  return circumradius / K;
}

// Brute-force pairwise containment closure. contains[i][j] = loop j strictly
// contains loop i (decided by the caller-supplied predicate); the parent of i
// is the container of i contained in every other container of i.
inline std::vector<int> containment_forest(int n,
                                           const std::vector<std::vector<bool>>& contains) {
  std::vector<int> parent(n, -1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!contains[i][j]) continue;
      bool innermost = true;
      for (int k = 0; k < n && innermost; ++k) {
        if (k == j || !contains[i][k]) continue;
        if (!contains[j][k]) innermost = false;  // k is a tighter container than j
      }
      if (innermost) {
        parent[i] = j;
        break;
      }
    }
  }
  return parent;
}

// Naive two-level Hausdorff distance over dense point samples of polylines.
inline double dense_hausdorff(const std::vector<std::vector<std::complex<double>>>& a,
                              const std::vector<std::vector<std::complex<double>>>& b) {
  auto point_to_set = [](std::complex<double> p, const std::vector<std::complex<double>>& set) {
    double best = 1e300;
    for (auto q : set) best = std::min(best, std::abs(p - q));
    return best;
  };
  auto set_hausdorff = [&](const std::vector<std::complex<double>>& u,
                           const std::vector<std::complex<double>>& v) {
    double worst = 0.0;
    for (auto p : u) worst = std::max(worst, point_to_set(p, v));
    for (auto p : v) worst = std::max(worst, point_to_set(p, u));
    return worst;
  };
  double worst = 0.0;
  for (const auto& u : a) {
    double best = 1e300;
    for (const auto& v : b) best = std::min(best, set_hausdorff(u, v));
    worst = std::max(worst, best);
  }
  for (const auto& v : b) {
    double best = 1e300;
    for (const auto& u : a) best = std::min(best, set_hausdorff(v, u));
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace oracles
