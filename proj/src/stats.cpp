#include "looplab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace looplab {

double Estimate::sigmas_from(const Estimate& o) const {
  double se = std::sqrt(stderr_ * stderr_ + o.stderr_ * o.stderr_);
  double diff = std::abs(mean - o.mean);
  if (se == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return diff / se;
}

bool Estimate::compatible(const Estimate& o, double sigmas) const {
  return sigmas_from(o) <= sigmas;
}

double autocovariance(const std::vector<double>& xs, std::size_t lag) {
  const std::size_t n = xs.size();
  if (lag >= n) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(n);
  double acc = 0.0;
  for (std::size_t i = 0; i + lag < n; ++i) acc += (xs[i] - mean) * (xs[i + lag] - mean);
  return acc / static_cast<double>(n);
}

double integrated_autocorr_time(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  if (n < 8) return 1.0;
  double c0 = autocovariance(xs, 0);
  if (c0 <= 0.0) return 1.0;  // constant series
  double tau = 0.5;
  const std::size_t max_lag = n / 4;
  for (std::size_t k = 1; 2 * k < max_lag; ++k) {
    double pair = autocovariance(xs, 2 * k - 1) + autocovariance(xs, 2 * k);
    if (pair <= 0.0) break;
    tau += pair / c0;
  }
  return std::max(0.5, tau);
}

std::pair<double, double> wilson_interval(double phat, double n) {
  if (n <= 0.0) return {0.0, 1.0};
  const double z = 1.959963984540054;
  double z2 = z * z;
  double denom = 1.0 + z2 / n;
  double center = (phat + z2 / (2.0 * n)) / denom;
  double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

namespace {

void finish_estimate(Estimate& e, bool bernoulli_like) {
  // Wilson interval for extreme means where the normal interval degenerates.
  bool extreme = bernoulli_like &&
                 (e.mean <= 0.0 || e.mean >= 1.0 || e.n_eff * std::min(e.mean, 1.0 - e.mean) < 5.0);
  if (extreme) {
    auto [lo, hi] = wilson_interval(e.mean, e.n_eff);
    e.ci_lo = lo;
    e.ci_hi = hi;
    if (!e.method.empty()) e.method += "+wilson";
  } else {
    e.ci_lo = e.mean - 1.959963984540054 * e.stderr_;
    e.ci_hi = e.mean + 1.959963984540054 * e.stderr_;
  }
}

bool looks_bernoulli(const std::vector<double>& xs) {
  for (double x : xs)
    if (x != 0.0 && x != 1.0) return false;
  return true;
}

}  // namespace

Estimate series_estimate(const std::vector<double>& xs, const std::string& method) {
  if (xs.empty()) throw std::invalid_argument("series_estimate: empty series");
  Estimate e;
  e.method = method;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = autocovariance(xs, 0);
  double tau = integrated_autocorr_time(xs);
  e.mean = mean;
  e.n_eff = static_cast<double>(xs.size()) / (2.0 * tau);
  e.stderr_ = var > 0.0 ? std::sqrt(var / e.n_eff) : 0.0;
  finish_estimate(e, looks_bernoulli(xs));
  return e;
}

Estimate pooled_estimate(const std::vector<std::vector<double>>& chains,
                         const std::string& method) {
  std::size_t total = 0;
  for (const auto& c : chains) total += c.size();
  if (total == 0) throw std::invalid_argument("pooled_estimate: no samples");
  Estimate e;
  e.method = method;
  double mean = 0.0;
  for (const auto& c : chains)
    for (double x : c) mean += x;
  mean /= static_cast<double>(total);
  e.mean = mean;
  double var_of_mean = 0.0;
  double n_eff = 0.0;
  bool bern = true;
  for (const auto& c : chains) {
    if (c.empty()) continue;
    bern = bern && looks_bernoulli(c);
    double tau = integrated_autocorr_time(c);
    double var = autocovariance(c, 0);
    double w = static_cast<double>(c.size()) / static_cast<double>(total);
    double ne = static_cast<double>(c.size()) / (2.0 * tau);
    n_eff += ne;
    if (var > 0.0) var_of_mean += w * w * var / ne;
  }
  e.n_eff = n_eff;
  e.stderr_ = std::sqrt(var_of_mean);
  finish_estimate(e, bern);
  return e;
}

Estimate ratio_estimate(const std::vector<std::vector<double>>& num_chains,
                        const std::vector<std::vector<double>>& den_chains) {
  if (num_chains.size() != den_chains.size())
    throw std::invalid_argument("ratio_estimate: chain count mismatch");
  double sn = 0.0, sd = 0.0;
  std::size_t total = 0;
  for (std::size_t c = 0; c < num_chains.size(); ++c) {
    if (num_chains[c].size() != den_chains[c].size())
      throw std::invalid_argument("ratio_estimate: series length mismatch");
    for (std::size_t i = 0; i < num_chains[c].size(); ++i) {
      sn += num_chains[c][i];
      sd += den_chains[c][i];
      ++total;
    }
  }
  if (sd <= 0.0) throw std::runtime_error("ratio_estimate: zero accepted samples");
  double r = sn / sd;
  double dmean = sd / static_cast<double>(total);

  // Influence series h_i = (num_i - r * den_i) / mean(den): the ratio error is
  // the autocorrelation-aware error of mean(h).
  Estimate e;
  e.method = "ratio";
  e.mean = r;
  double var_of_mean = 0.0, n_eff = 0.0;
  for (std::size_t c = 0; c < num_chains.size(); ++c) {
    const auto& num = num_chains[c];
    const auto& den = den_chains[c];
    if (num.empty()) continue;
    std::vector<double> h(num.size());
    for (std::size_t i = 0; i < num.size(); ++i) h[i] = (num[i] - r * den[i]) / dmean;
    double tau = integrated_autocorr_time(h);
    double var = autocovariance(h, 0);
    double w = static_cast<double>(num.size()) / static_cast<double>(total);
    double ne = static_cast<double>(num.size()) / (2.0 * tau);
    n_eff += ne;
    if (var > 0.0) var_of_mean += w * w * var / ne;
  }
  e.n_eff = n_eff;
  e.stderr_ = std::sqrt(var_of_mean);
  bool extreme = e.mean <= 0.0 || e.mean >= 1.0;
  if (extreme) {
    auto [lo, hi] = wilson_interval(std::clamp(e.mean, 0.0, 1.0), std::max(1.0, sd));
    e.ci_lo = lo;
    e.ci_hi = hi;
  } else {
    e.ci_lo = e.mean - 1.959963984540054 * e.stderr_;
    e.ci_hi = e.mean + 1.959963984540054 * e.stderr_;
  }
  return e;
}

namespace {

double ks_q(double lambda) {
  // Asymptotic Kolmogorov tail Q(lambda) = 2 sum_k (-1)^{k-1} exp(-2 k^2 lambda^2).
  if (lambda < 1e-8) return 1.0;
  double sum = 0.0, sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-12) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

KSResult two_sample_ks(std::vector<double> a, std::vector<double> b) {
  KSResult r;
  r.n1 = a.size();
  r.n2 = b.size();
  if (a.empty() || b.empty()) throw std::invalid_argument("two_sample_ks: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  r.statistic = d;
  double ne = std::sqrt(na * nb / (na + nb));
  r.p_value = ks_q((ne + 0.12 + 0.11 / ne) * d);
  return r;
}

double max_cdf_jump(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  std::size_t best = 1, run = 1;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (xs[i] == xs[i - 1])
      ++run;
    else
      run = 1;
    best = std::max(best, run);
  }
  return static_cast<double>(best) / static_cast<double>(xs.size());
}

double pearson_correlation(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("pearson_correlation: bad input");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(xs.size());
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

LinearFit weighted_linear_fit(const std::vector<double>& x, const std::vector<double>& y,
                              const std::vector<double>& se) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n || se.size() != n)
    throw std::invalid_argument("weighted_linear_fit: need >= 2 points");
  double sw = 0.0, swx = 0.0, swy = 0.0, swxx = 0.0, swxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = se[i] > 0.0 ? se[i] : 1e-12;
    double w = 1.0 / (s * s);
    sw += w;
    swx += w * x[i];
    swy += w * y[i];
    swxx += w * x[i] * x[i];
    swxy += w * x[i] * y[i];
  }
  double det = sw * swxx - swx * swx;
  if (std::abs(det) < 1e-300) throw std::runtime_error("weighted_linear_fit: singular fit");
  LinearFit f;
  f.intercept = (swxx * swy - swx * swxy) / det;
  f.slope = (sw * swxy - swx * swy) / det;
  f.intercept_se = std::sqrt(swxx / det);
  f.slope_se = std::sqrt(sw / det);
  f.dof = static_cast<int>(n) - 2;
  for (std::size_t i = 0; i < n; ++i) {
    double s = se[i] > 0.0 ? se[i] : 1e-12;
    double resid = (y[i] - f.intercept - f.slope * x[i]) / s;
    f.chi2 += resid * resid;
  }
  return f;
}

}  // namespace looplab
