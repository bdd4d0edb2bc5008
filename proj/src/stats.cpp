#include "qmon/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qmon::stats {

namespace {

double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_p: bad arguments");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q: bad arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi2_sf(double x, double df) {
  if (x <= 0.0) return 1.0;
  return gamma_q(0.5 * df, 0.5 * x);
}

Chi2Result chi2_gof(std::span<const std::int64_t> counts,
                    std::span<const double> expected_prob) {
  if (counts.size() != expected_prob.size() || counts.empty())
    throw std::invalid_argument("chi2_gof: size mismatch");
  std::int64_t total = 0;
  for (auto c : counts) total += c;
  Chi2Result r;
  int used = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double e = expected_prob[i] * static_cast<double>(total);
    if (e <= 0.0) continue;
    const double d = static_cast<double>(counts[i]) - e;
    r.statistic += d * d / e;
    ++used;
  }
  r.df = used - 1;
  r.p_value = chi2_sf(r.statistic, r.df);
  return r;
}

Chi2Result chi2_uniform(std::span<const std::int64_t> counts) {
  std::vector<double> p(counts.size(), 1.0 / static_cast<double>(counts.size()));
  return chi2_gof(counts, p);
}

Chi2Result chi2_two_sample(std::span<const std::int64_t> a,
                           std::span<const std::int64_t> b) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("chi2_two_sample: size mismatch");
  double na = 0, nb = 0;
  for (auto v : a) na += static_cast<double>(v);
  for (auto v : b) nb += static_cast<double>(v);
  const double ka = std::sqrt(nb / na), kb = std::sqrt(na / nb);
  Chi2Result r;
  int used = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ai = static_cast<double>(a[i]), bi = static_cast<double>(b[i]);
    if (ai + bi <= 0.0) continue;
    const double d = ka * ai - kb * bi;
    r.statistic += d * d / (ai + bi);
    ++used;
  }
  r.df = used - 1;
  r.p_value = chi2_sf(r.statistic, r.df);
  return r;
}

Chi2Result chi2_independence(const std::vector<std::vector<std::int64_t>>& table) {
  const std::size_t nr = table.size();
  if (nr == 0) throw std::invalid_argument("chi2_independence: empty table");
  const std::size_t nc = table[0].size();
  std::vector<double> row(nr, 0.0), col(nc, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) {
      const double v = static_cast<double>(table[i][j]);
      row[i] += v;
      col[j] += v;
      total += v;
    }
  Chi2Result r;
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) {
      const double e = row[i] * col[j] / total;
      if (e <= 0.0) continue;
      const double d = static_cast<double>(table[i][j]) - e;
      r.statistic += d * d / e;
    }
  r.df = static_cast<double>((nr - 1) * (nc - 1));
  r.p_value = chi2_sf(r.statistic, r.df);
  return r;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_line: need >= 2 matched points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  LineFit f;
  f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("total_variation: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::fabs(p[i] - q[i]);
  return 0.5 * s;
}

MeanSE mean_se(std::span<const double> xs) {
  MeanSE r;
  if (xs.empty()) return r;
  long double m = 0.0L;
  for (double v : xs) m += v;
  m /= static_cast<long double>(xs.size());
  long double var = 0.0L;
  for (double v : xs) {
    const long double d = v - m;
    var += d * d;
  }
  const std::size_t n = xs.size();
  r.mean = static_cast<double>(m);
  r.se = n > 1 ? std::sqrt(static_cast<double>(var / ((n - 1.0L) * n))) : 0.0;
  return r;
}

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a(const std::string& s) { return fnv1a(s.data(), s.size()); }

}  // namespace qmon::stats
