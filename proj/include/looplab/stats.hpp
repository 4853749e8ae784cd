#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace looplab {

// Monte Carlo estimate with autocorrelation-aware errors.
struct Estimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  double n_eff = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::string method;

  // Discrepancy against another independent estimate, in combined sigmas.
  double sigmas_from(const Estimate& o) const;
  bool compatible(const Estimate& o, double sigmas = 3.0) const;
};

double autocovariance(const std::vector<double>& xs, std::size_t lag);

// Integrated autocorrelation time by Geyer's initial positive sequence:
// tau = 1/2 + sum of paired autocorrelations while the pair sums stay positive.
double integrated_autocorr_time(const std::vector<double>& xs);

// Wilson 95% score interval with (effective) sample size n.
std::pair<double, double> wilson_interval(double phat, double n);

// Mean / stderr / n_eff for a single MCMC series of bounded values.
Estimate series_estimate(const std::vector<double>& xs, const std::string& method = "mc");

// Pools per-chain series of equal standing into one estimate.
Estimate pooled_estimate(const std::vector<std::vector<double>>& chains,
                         const std::string& method = "mc");

// Ratio estimator mean(num)/mean(den) for paired MCMC series (den in {0,1}),
// delta-method error through the influence series, autocorrelation-aware.
Estimate ratio_estimate(const std::vector<std::vector<double>>& num_chains,
                        const std::vector<std::vector<double>>& den_chains);

struct KSResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n1 = 0, n2 = 0;
};

// Two-sample Kolmogorov-Smirnov test (asymptotic p-value).
KSResult two_sample_ks(std::vector<double> a, std::vector<double> b);

// Largest jump of the empirical CDF (atom detector for continuity smoke tests).
double max_cdf_jump(std::vector<double> xs);

double pearson_correlation(const std::vector<double>& xs, const std::vector<double>& ys);

struct LinearFit {
  double intercept = 0.0, slope = 0.0;
  double intercept_se = 0.0, slope_se = 0.0;
  double chi2 = 0.0;
  int dof = 0;
};

// Weighted least squares y = a + b x with weights 1/se^2.
LinearFit weighted_linear_fit(const std::vector<double>& x, const std::vector<double>& y,
                              const std::vector<double>& se);

}  // namespace looplab
