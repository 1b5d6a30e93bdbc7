#pragma once

// Brute-force reference implementations for validating the stats module.
// Each oracle enumerates the entire null distribution directly, with no
// shared code path beyond the rank preprocessing, so a bug in the fast
// implementations cannot hide.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "panelstat/stats.hpp"

namespace panelstat {

// Exact two-sided Wilcoxon signed-rank p by enumerating all 2^n sign
// assignments of the absolute-delta ranks. Two-sided means doubling the
// smaller tail of W+, capped at 1.
inline double oracle_wilcoxon(const std::vector<double>& deltas) {
  std::vector<double> abs_nonzero;
  long long observed_doubled = 0;
  for (double d : deltas) {
    if (d != 0.0) abs_nonzero.push_back(std::fabs(d));
  }
  const std::size_t n = abs_nonzero.size();
  if (n == 0) throw std::runtime_error("oracle_wilcoxon: no non-zero pairs");
  if (n > 20) throw std::runtime_error("oracle_wilcoxon: n too large");
  const std::vector<long long> dranks = doubled_average_ranks(abs_nonzero);
  {
    std::size_t j = 0;
    for (double d : deltas) {
      if (d == 0.0) continue;
      if (d > 0.0) observed_doubled += dranks[j];
      ++j;
    }
  }
  std::uint64_t lower = 0, upper = 0;
  const std::uint64_t total = 1ULL << n;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    long long w = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1ULL << i)) w += dranks[i];
    }
    if (w <= observed_doubled) ++lower;
    if (w >= observed_doubled) ++upper;
  }
  const double tail = static_cast<double>(std::min(lower, upper));
  return std::min(1.0, 2.0 * tail / static_cast<double>(total));
}

// Exact two-sided Mann-Whitney p by enumerating every assignment of
// pooled positions to group a: p = P(|U - mean U| >= |U_obs - mean U|).
inline double oracle_mwu(const std::vector<double>& a,
                         const std::vector<double>& b) {
  if (a.empty() || b.empty()) {
    throw std::runtime_error("oracle_mwu: empty sample");
  }
  const std::size_t na = a.size(), nb = b.size();
  const std::size_t total = na + nb;
  {
    double c = 1.0;
    for (std::size_t i = 0; i < std::min(na, nb); ++i) {
      c *= static_cast<double>(total - i) / static_cast<double>(i + 1);
    }
    if (c > 200000.0) {
      throw std::runtime_error("oracle_mwu: instance too large");
    }
  }
  std::vector<double> pooled;
  pooled.insert(pooled.end(), a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::vector<long long> dranks = doubled_average_ranks(pooled);

  const long long shift =
      static_cast<long long>(na) * (static_cast<long long>(na) + 1);
  const long long mu_doubled =
      static_cast<long long>(na) * static_cast<long long>(nb);
  long long observed = 0;
  for (std::size_t i = 0; i < na; ++i) observed += dranks[i];
  const long long obs_dev = std::llabs((observed - shift) - mu_doubled);

  // Walk every na-subset of positions via the standard combination stepper.
  std::vector<std::size_t> pick(na);
  std::iota(pick.begin(), pick.end(), 0);
  std::uint64_t extreme = 0, count = 0;
  while (true) {
    long long sum = 0;
    for (std::size_t i : pick) sum += dranks[i];
    if (std::llabs((sum - shift) - mu_doubled) >= obs_dev) ++extreme;
    ++count;
    // Advance to the next combination in lexicographic order.
    std::size_t i = na;
    while (i > 0) {
      --i;
      if (pick[i] != i + total - na) break;
      if (i == 0) {
        return static_cast<double>(extreme) / static_cast<double>(count);
      }
    }
    ++pick[i];
    for (std::size_t j = i + 1; j < na; ++j) pick[j] = pick[j - 1] + 1;
  }
}

// Exact two-sided Spearman permutation p over all n! orderings of y.
inline double oracle_spearman(const std::vector<double>& x,
                              const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 3) {
    throw std::runtime_error("oracle_spearman: need matched n >= 3");
  }
  if (n > 8) throw std::runtime_error("oracle_spearman: n too large");
  auto constant = [](const std::vector<double>& v) {
    for (double e : v) {
      if (e != v.front()) return false;
    }
    return true;
  };
  if (constant(x) || constant(y)) {
    throw std::runtime_error("oracle_spearman: constant vector");
  }
  const std::vector<long long> rx = doubled_average_ranks(x);
  const std::vector<long long> ry = doubled_average_ranks(y);
  auto cross = [n](const std::vector<long long>& u,
                   const std::vector<long long>& v) {
    long long suv = 0, su = 0, sv = 0;
    for (std::size_t i = 0; i < n; ++i) {
      suv += u[i] * v[i];
      su += u[i];
      sv += v[i];
    }
    return static_cast<long long>(n) * suv - su * sv;
  };
  const long long threshold = std::llabs(cross(rx, ry));

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<long long> permuted(n);
  std::uint64_t extreme = 0, count = 0;
  do {
    for (std::size_t i = 0; i < n; ++i) permuted[i] = ry[perm[i]];
    if (std::llabs(cross(rx, permuted)) >= threshold) ++extreme;
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(extreme) / static_cast<double>(count);
}

// Exact McNemar p by integer binomial summation (n <= 60 keeps the
// intermediate products inside 64 bits).
inline double oracle_mcnemar(std::size_t b, std::size_t c) {
  const std::size_t n = b + c;
  if (n == 0) return 1.0;
  if (n > 60) throw std::runtime_error("oracle_mcnemar: n too large");
  std::uint64_t tail = 0;
  std::uint64_t coef = 1;  // C(n, 0)
  for (std::size_t k = 0; k <= std::min(b, c); ++k) {
    if (k > 0) coef = coef * (n - k + 1) / k;
    tail += coef;
  }
  const long double p =
      2.0L * static_cast<long double>(tail) /
      std::pow(2.0L, static_cast<long double>(n));
  return static_cast<double>(std::min(1.0L, p));
}

}  // namespace panelstat
