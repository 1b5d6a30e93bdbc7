#pragma once

// Nonparametric test battery: Wilcoxon signed-rank, Mann-Whitney U,
// Cliff's delta, Spearman rank correlation, exact McNemar,
// Benjamini-Hochberg FDR adjustment, Fleiss and Cohen kappa, and the
// paired percentile bootstrap.
//
// Exactness policy: every test reports how its p-value was obtained via
// the `approximation` field. Small instances use exact enumeration (by
// dynamic programming over rank sums, so ties are handled without
// approximation); larger ones fall back to tie-corrected normal
// approximations with continuity correction, or to seeded Monte Carlo
// permutation for mid-sized Mann-Whitney instances.
//
// Rank conventions: average ranks for ties throughout. Internally ranks
// are doubled so average ranks become integers and tail comparisons are
// exact integer arithmetic, never floating-point.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "panelstat/numeric.hpp"
#include "panelstat/panel.hpp"
#include "panelstat/rng.hpp"
#include "panelstat/special_math.hpp"

namespace panelstat {

enum class Approximation { kExact, kNormalApprox, kTApprox, kPermutation };

inline const char* approximation_name(Approximation a) {
  switch (a) {
    case Approximation::kExact: return "exact";
    case Approximation::kNormalApprox: return "normal_approx";
    case Approximation::kTApprox: return "t_approx";
    case Approximation::kPermutation: return "permutation";
  }
  return "?";
}

struct StatResult {
  std::string method;
  double statistic = 0.0;
  double p_two_sided = 1.0;
  double effect_size = 0.0;  // rank-biserial r, Cliff's delta, or rho
  std::size_t n_used = 0;
  std::size_t n_excluded = 0;
  Approximation approximation = Approximation::kExact;
};

struct BootstrapCI {
  double point_estimate = 0.0;  // full-sample value
  double mean = 0.0;            // mean over replicates
  double sd = 0.0;              // sample sd over replicates
  double ci_low = 0.0;          // 2.5th percentile
  double ci_high = 0.0;         // 97.5th percentile
  int reps = 0;
  std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Ranking helpers

// Average ranks doubled to integers: tied values spanning sorted positions
// i..j (1-based) all receive rank (i + j), i.e. twice their average rank.
inline std::vector<long long> doubled_average_ranks(
    const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<long long> ranks(n, 0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // Positions i..j hold 1-based ranks i+1..j+1; doubled average rank.
    const long long doubled = static_cast<long long>(i + j + 2);
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = doubled;
    i = j + 1;
  }
  return ranks;
}

inline std::vector<double> average_ranks(const std::vector<double>& values) {
  std::vector<double> out;
  out.reserve(values.size());
  for (long long r : doubled_average_ranks(values)) {
    out.push_back(static_cast<double>(r) / 2.0);
  }
  return out;
}

// Sizes of tie groups in a value multiset (groups of size 1 included).
inline std::vector<std::size_t> tie_group_sizes(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  std::vector<std::size_t> sizes;
  std::size_t i = 0;
  while (i < values.size()) {
    std::size_t j = i;
    while (j + 1 < values.size() && values[j + 1] == values[i]) ++j;
    sizes.push_back(j - i + 1);
    i = j + 1;
  }
  return sizes;
}

namespace detail {

// Two-sided p by doubling the smaller tail of a discrete distribution,
// capped at 1. `counts[s]` is the number of outcomes with statistic s;
// `total` their sum; `observed` the observed statistic.
inline double doubled_tail_p(const std::vector<std::uint64_t>& counts,
                             double total, long long observed) {
  std::uint64_t lower = 0, upper = 0;
  for (std::size_t s = 0; s < counts.size(); ++s) {
    const long long sv = static_cast<long long>(s);
    if (sv <= observed) lower += counts[s];
    if (sv >= observed) upper += counts[s];
  }
  const double tail = static_cast<double>(std::min(lower, upper));
  return std::min(1.0, 2.0 * tail / total);
}

inline double continuity_corrected_z(double stat, double mu, double sigma) {
  double num = std::fabs(stat - mu) - 0.5;
  if (num < 0.0) num = 0.0;
  return num / sigma;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Wilcoxon signed-rank test (paired)

// Two-sided signed-rank test on paired differences. Zero differences are
// excluded (reported in n_excluded). Exact when the non-zero count is at
// most cfg.wilcoxon_exact_cutoff: the full sign-assignment distribution of
// W+ is built by dynamic programming over doubled ranks. Otherwise normal
// approximation with tie correction and continuity correction. The
// reported statistic is W+; effect size is the rank-biserial correlation.
inline StatResult wilcoxon_signed_rank(const std::vector<double>& deltas,
                                       const AnalysisConfig& cfg) {
  std::vector<double> abs_nonzero;
  std::vector<bool> positive;
  std::size_t zeros = 0;
  for (double d : deltas) {
    if (d == 0.0) {
      ++zeros;
      continue;
    }
    abs_nonzero.push_back(std::fabs(d));
    positive.push_back(d > 0.0);
  }
  const std::size_t n = abs_nonzero.size();
  if (n == 0) {
    throw std::runtime_error("wilcoxon_signed_rank: no non-zero pairs");
  }

  const std::vector<long long> dranks = doubled_average_ranks(abs_nonzero);
  long long w_plus_doubled = 0;
  long long total_doubled = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total_doubled += dranks[i];
    if (positive[i]) w_plus_doubled += dranks[i];
  }
  const double w_plus = static_cast<double>(w_plus_doubled) / 2.0;
  const double w_minus =
      static_cast<double>(total_doubled - w_plus_doubled) / 2.0;

  StatResult res;
  res.method = "wilcoxon_signed_rank";
  res.statistic = w_plus;
  res.effect_size = (w_plus - w_minus) / (w_plus + w_minus);
  res.n_used = n;
  res.n_excluded = zeros;

  if (n <= static_cast<std::size_t>(cfg.wilcoxon_exact_cutoff)) {
    // counts[s] = number of sign assignments with doubled W+ equal to s.
    std::vector<std::uint64_t> counts(
        static_cast<std::size_t>(total_doubled) + 1, 0);
    counts[0] = 1;
    long long reach = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const long long r = dranks[i];
      for (long long s = reach; s >= 0; --s) {
        if (counts[static_cast<std::size_t>(s)]) {
          counts[static_cast<std::size_t>(s + r)] +=
              counts[static_cast<std::size_t>(s)];
        }
      }
      reach += r;
    }
    res.p_two_sided = detail::doubled_tail_p(
        counts, std::pow(2.0, static_cast<double>(n)), w_plus_doubled);
    res.approximation = Approximation::kExact;
  } else {
    const double nd = static_cast<double>(n);
    const double mu = nd * (nd + 1.0) / 4.0;
    double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0;
    for (std::size_t t : tie_group_sizes(abs_nonzero)) {
      const double td = static_cast<double>(t);
      var -= (td * td * td - td) / 48.0;
    }
    if (var <= 0.0) {
      res.p_two_sided = 1.0;
    } else {
      const double z =
          detail::continuity_corrected_z(w_plus, mu, std::sqrt(var));
      res.p_two_sided = normal_two_sided_p(z);
    }
    res.approximation = Approximation::kNormalApprox;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Cliff's delta and the Mann-Whitney U test (unpaired)

inline double cliffs_delta(const std::vector<double>& a,
                           const std::vector<double>& b) {
  if (a.empty() || b.empty()) {
    throw std::runtime_error("cliffs_delta: empty sample");
  }
  long long greater = 0, less = 0;
  for (double x : a) {
    for (double y : b) {
      if (x > y) {
        ++greater;
      } else if (x < y) {
        ++less;
      }
    }
  }
  return static_cast<double>(greater - less) /
         (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

namespace detail {

// C(n, k) without overflow for the range we compare against cutoffs.
inline double choose_approx(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    c *= static_cast<double>(n - i) / static_cast<double>(i + 1);
    if (c > 1e18) return c;  // far beyond any cutoff; stop early
  }
  return c;
}

}  // namespace detail

// Two-sided Mann-Whitney U. The statistic is U for sample a, derived from
// joint average ranks. p-value tiers:
//   - exact (group-assignment enumeration via DP over doubled ranks) when
//     C(n_a + n_b, n_a) <= 200,000;
//   - seeded Monte Carlo permutation when n_a * n_b <= 10,000;
//   - tie-corrected normal approximation otherwise.
// Exact and permutation p-values use P(|U - mu| >= |U_obs - mu|) over
// assignments, compared in integer arithmetic. Effect size is Cliff's
// delta.
inline StatResult mann_whitney_u(const std::vector<double>& a,
                                 const std::vector<double>& b) {
  if (a.empty() || b.empty()) {
    throw std::runtime_error("mann_whitney_u: empty sample");
  }
  const std::size_t na = a.size(), nb = b.size();
  const std::size_t total = na + nb;
  std::vector<double> pooled;
  pooled.reserve(total);
  pooled.insert(pooled.end(), a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::vector<long long> dranks = doubled_average_ranks(pooled);

  long long ra_doubled = 0;
  for (std::size_t i = 0; i < na; ++i) ra_doubled += dranks[i];
  // Doubled U = doubled rank sum - n_a (n_a + 1).
  const long long u_doubled =
      ra_doubled - static_cast<long long>(na) *
                       (static_cast<long long>(na) + 1);
  const long long mu_doubled =
      static_cast<long long>(na) * static_cast<long long>(nb);
  const long long obs_dev = std::llabs(u_doubled - mu_doubled);

  StatResult res;
  res.method = "mann_whitney_u";
  res.statistic = static_cast<double>(u_doubled) / 2.0;
  res.effect_size = cliffs_delta(a, b);
  res.n_used = total;

  if (detail::choose_approx(total, na) <= 200000.0) {
    // distribution of the doubled rank sum of the group-a positions over
    // all C(total, na) assignments: ways[k][s] after processing each item.
    long long max_sum = 0;
    for (long long r : dranks) max_sum += r;
    std::vector<std::vector<std::uint64_t>> ways(
        na + 1,
        std::vector<std::uint64_t>(static_cast<std::size_t>(max_sum) + 1, 0));
    ways[0][0] = 1;
    for (std::size_t i = 0; i < total; ++i) {
      const long long r = dranks[i];
      const std::size_t cap = std::min(na, i + 1);
      for (std::size_t k = cap; k >= 1; --k) {
        auto& dst = ways[k];
        const auto& src = ways[k - 1];
        for (long long s = max_sum; s >= r; --s) {
          if (src[static_cast<std::size_t>(s - r)]) {
            dst[static_cast<std::size_t>(s)] +=
                src[static_cast<std::size_t>(s - r)];
          }
        }
      }
    }
    std::uint64_t extreme = 0, count = 0;
    const long long shift = static_cast<long long>(na) *
                            (static_cast<long long>(na) + 1);
    for (long long s = 0; s <= max_sum; ++s) {
      const std::uint64_t w = ways[na][static_cast<std::size_t>(s)];
      if (!w) continue;
      count += w;
      const long long dev = std::llabs((s - shift) - mu_doubled);
      if (dev >= obs_dev) extreme += w;
    }
    res.p_two_sided =
        static_cast<double>(extreme) / static_cast<double>(count);
    res.approximation = Approximation::kExact;
  } else if (na * nb <= 10000) {
    // Monte Carlo permutation with a fixed documented seed so results are
    // reproducible without threading configuration through here.
    constexpr std::uint64_t kPermSeed = 0x70616e656c4d5755ULL;
    constexpr int kReps = 10000;
    SplitMix64 gen(kPermSeed ^ (static_cast<std::uint64_t>(na) << 32) ^
                   static_cast<std::uint64_t>(nb));
    std::vector<long long> shuffled = dranks;
    std::uint64_t extreme = 0;
    const long long shift = static_cast<long long>(na) *
                            (static_cast<long long>(na) + 1);
    for (int rep = 0; rep < kReps; ++rep) {
      for (std::size_t i = total - 1; i > 0; --i) {
        const std::size_t j =
            static_cast<std::size_t>(gen.next_below(i + 1));
        std::swap(shuffled[i], shuffled[j]);
      }
      long long sum = 0;
      for (std::size_t i = 0; i < na; ++i) sum += shuffled[i];
      if (std::llabs((sum - shift) - mu_doubled) >= obs_dev) ++extreme;
    }
    res.p_two_sided = (static_cast<double>(extreme) + 1.0) /
                      (static_cast<double>(kReps) + 1.0);
    res.approximation = Approximation::kPermutation;
  } else {
    const double nad = static_cast<double>(na);
    const double nbd = static_cast<double>(nb);
    const double nd = static_cast<double>(total);
    const double mu = nad * nbd / 2.0;
    double tie_term = 0.0;
    for (std::size_t t : tie_group_sizes(pooled)) {
      const double td = static_cast<double>(t);
      tie_term += td * td * td - td;
    }
    const double var =
        nad * nbd / 12.0 * ((nd + 1.0) - tie_term / (nd * (nd - 1.0)));
    if (var <= 0.0) {
      res.p_two_sided = 1.0;
    } else {
      const double z = detail::continuity_corrected_z(
          res.statistic, mu, std::sqrt(var));
      res.p_two_sided = normal_two_sided_p(z);
    }
    res.approximation = Approximation::kNormalApprox;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Spearman rank correlation

// rho is the Pearson correlation of average ranks. Two-sided p by full
// permutation enumeration when n <= 9 (comparison done in exact integer
// arithmetic on doubled ranks), otherwise by the t approximation with
// n - 2 degrees of freedom.
inline StatResult spearman_rho(const std::vector<double>& x,
                               const std::vector<double>& y) {
  if (x.size() != y.size()) {
    throw std::runtime_error("spearman_rho: length mismatch");
  }
  const std::size_t n = x.size();
  if (n < 3) {
    throw std::runtime_error("spearman_rho: need at least 3 pairs");
  }
  auto constant = [](const std::vector<double>& v) {
    for (double e : v) {
      if (e != v.front()) return false;
    }
    return true;
  };
  if (constant(x) || constant(y)) {
    throw std::runtime_error("spearman_rho: rank correlation undefined");
  }

  const std::vector<long long> rx = doubled_average_ranks(x);
  const std::vector<long long> ry = doubled_average_ranks(y);
  auto cross_stat = [n](const std::vector<long long>& u,
                        const std::vector<long long>& v) {
    // n * sum(uv) - sum(u) sum(v); the permutation-variant part of rho.
    long long suv = 0, su = 0, sv = 0;
    for (std::size_t i = 0; i < n; ++i) {
      suv += u[i] * v[i];
      su += u[i];
      sv += v[i];
    }
    return static_cast<long long>(n) * suv - su * sv;
  };
  auto sq_norm = [n](const std::vector<long long>& u) {
    long long suu = 0, su = 0;
    for (std::size_t i = 0; i < n; ++i) {
      suu += u[i] * u[i];
      su += u[i];
    }
    return static_cast<long long>(n) * suu - su * su;
  };

  const long long num = cross_stat(rx, ry);
  const double rho = static_cast<double>(num) /
                     std::sqrt(static_cast<double>(sq_norm(rx)) *
                               static_cast<double>(sq_norm(ry)));

  StatResult res;
  res.method = "spearman_rho";
  res.statistic = rho;
  res.effect_size = rho;
  res.n_used = n;

  if (n <= 9) {
    // The rank norms are permutation-invariant, so |rho_perm| >= |rho_obs|
    // reduces to an integer comparison of the cross statistic.
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    const long long threshold = std::llabs(num);
    std::uint64_t extreme = 0, count = 0;
    std::vector<long long> permuted(n);
    do {
      for (std::size_t i = 0; i < n; ++i) permuted[i] = ry[perm[i]];
      if (std::llabs(cross_stat(rx, permuted)) >= threshold) ++extreme;
      ++count;
    } while (std::next_permutation(perm.begin(), perm.end()));
    res.p_two_sided =
        static_cast<double>(extreme) / static_cast<double>(count);
    res.approximation = Approximation::kPermutation;
  } else {
    const double denom = 1.0 - rho * rho;
    if (denom <= 0.0) {
      res.p_two_sided = 0.0;
    } else {
      const double t =
          rho * std::sqrt((static_cast<double>(n) - 2.0) / denom);
      res.p_two_sided =
          student_t_two_sided_p(t, static_cast<double>(n) - 2.0);
    }
    res.approximation = Approximation::kTApprox;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Exact McNemar test

// Exact binomial McNemar on discordant-pair counts: b pairs correct only
// under the first condition, c only under the second. Statistic is
// min(b, c); p = min(1, 2 P(Bin(b+c, 1/2) <= min(b, c))). With no
// discordant pairs at all, p = 1 by convention and n_used = 0 marks the
// degenerate case. Effect size is the discordance imbalance (b-c)/(b+c).
inline StatResult mcnemar_exact(std::size_t b, std::size_t c) {
  StatResult res;
  res.method = "mcnemar_exact";
  res.approximation = Approximation::kExact;
  const std::size_t n = b + c;
  res.n_used = n;
  res.statistic = static_cast<double>(std::min(b, c));
  if (n == 0) {
    res.p_two_sided = 1.0;
    res.effect_size = 0.0;
    return res;
  }
  res.effect_size = (static_cast<double>(b) - static_cast<double>(c)) /
                    static_cast<double>(n);
  const double nd = static_cast<double>(n);
  const double log_half_n = -nd * std::log(2.0);
  double p = 0.0;
  for (std::size_t k = 0; k <= std::min(b, c); ++k) {
    const double log_term = log_gamma(nd + 1.0) -
                            log_gamma(static_cast<double>(k) + 1.0) -
                            log_gamma(nd - static_cast<double>(k) + 1.0) +
                            log_half_n;
    p += std::exp(log_term);
  }
  res.p_two_sided = std::min(1.0, 2.0 * p);
  return res;
}

// ---------------------------------------------------------------------------
// Benjamini-Hochberg FDR adjustment

// Step-up adjusted p-values, returned in the input order. Adjusted values
// never fall below the raw ones and never exceed 1.
inline std::vector<double> benjamini_hochberg(
    const std::vector<double>& p_values) {
  const std::size_t m = p_values.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return p_values[a] < p_values[b];
                   });
  std::vector<double> adjusted(m, 0.0);
  double running = 1.0;
  for (std::size_t i = m; i-- > 0;) {
    const double candidate = std::min(
        1.0, p_values[order[i]] * static_cast<double>(m) /
                 static_cast<double>(i + 1));
    running = std::min(running, candidate);
    adjusted[order[i]] = running;
  }
  return adjusted;
}

// ---------------------------------------------------------------------------
// Agreement coefficients

// Chance-level agreement among a fixed panel of raters over items rated
// into k categories. `table` rows are per-item category counts, each
// summing to the common rater count n.
struct FleissResult {
  std::vector<double> per_item;  // P_i per table row
  double observed = 0.0;         // P-bar
  double expected = 0.0;         // P-bar_e
  double kappa = 0.0;
  std::size_t n_items = 0;
  std::size_t n_raters = 0;
};

inline double per_item_agreement(const std::vector<std::size_t>& row,
                                 std::size_t n_raters) {
  if (n_raters < 2) {
    throw std::runtime_error("per_item_agreement: need >= 2 raters");
  }
  std::size_t total = 0, squares = 0;
  for (std::size_t c : row) {
    total += c;
    squares += c * c;
  }
  if (total != n_raters) {
    throw std::runtime_error("per_item_agreement: row does not sum to n");
  }
  const double nd = static_cast<double>(n_raters);
  return (static_cast<double>(squares) - nd) / (nd * (nd - 1.0));
}

inline FleissResult fleiss_kappa(
    const std::vector<std::vector<std::size_t>>& table,
    std::size_t n_raters) {
  if (table.empty()) {
    throw std::runtime_error("fleiss_kappa: empty table");
  }
  const std::size_t k = table.front().size();
  FleissResult res;
  res.n_items = table.size();
  res.n_raters = n_raters;
  std::vector<double> category_totals(k, 0.0);
  for (const auto& row : table) {
    if (row.size() != k) {
      throw std::runtime_error("fleiss_kappa: ragged table");
    }
    res.per_item.push_back(per_item_agreement(row, n_raters));
    for (std::size_t j = 0; j < k; ++j) {
      category_totals[j] += static_cast<double>(row[j]);
    }
  }
  res.observed = mean(res.per_item);
  const double denom =
      static_cast<double>(res.n_items) * static_cast<double>(n_raters);
  for (double t : category_totals) {
    const double pj = t / denom;
    res.expected += pj * pj;
  }
  if (res.expected >= 1.0) {
    throw std::runtime_error(
        "fleiss_kappa: kappa undefined (all ratings in one category)");
  }
  res.kappa = (res.observed - res.expected) / (1.0 - res.expected);
  return res;
}

// Two-rater chance-corrected agreement over paired label lists.
inline double cohens_kappa(const std::vector<std::string>& rater_a,
                           const std::vector<std::string>& rater_b) {
  if (rater_a.size() != rater_b.size() || rater_a.empty()) {
    throw std::runtime_error(
        "cohens_kappa: need equal-length non-empty label lists");
  }
  const double n = static_cast<double>(rater_a.size());
  std::map<std::string, double> marg_a, marg_b;
  double agree = 0.0;
  for (std::size_t i = 0; i < rater_a.size(); ++i) {
    marg_a[rater_a[i]] += 1.0;
    marg_b[rater_b[i]] += 1.0;
    if (rater_a[i] == rater_b[i]) agree += 1.0;
  }
  const double p_o = agree / n;
  double p_e = 0.0;
  for (const auto& [label, ca] : marg_a) {
    auto it = marg_b.find(label);
    if (it != marg_b.end()) p_e += (ca / n) * (it->second / n);
  }
  if (p_e >= 1.0) {
    throw std::runtime_error("cohens_kappa: degenerate marginals");
  }
  return (p_o - p_e) / (1.0 - p_e);
}

// ---------------------------------------------------------------------------
// Paired percentile bootstrap over per-question correctness flags

// Resamples question indices with replacement, applying the SAME index
// vector to both conditions in every replicate, so the two intervals are
// comparable. Accuracies are fractions in [0, 1].
inline std::pair<BootstrapCI, BootstrapCI> paired_bootstrap_accuracy(
    const std::vector<int>& zero_shot_flags,
    const std::vector<int>& agentic_flags, const AnalysisConfig& cfg) {
  if (zero_shot_flags.size() != agentic_flags.size() ||
      zero_shot_flags.empty()) {
    throw std::runtime_error(
        "paired_bootstrap_accuracy: need equal-length non-empty flag "
        "vectors");
  }
  const std::size_t q = zero_shot_flags.size();
  const int reps = cfg.bootstrap_reps;
  std::vector<double> acc_zs(reps), acc_ag(reps);
  for (int rep = 0; rep < reps; ++rep) {
    const auto idx = bootstrap_indices(cfg.rng_seed,
                                       static_cast<std::uint64_t>(rep), q);
    long long sum_zs = 0, sum_ag = 0;
    for (std::size_t i : idx) {
      sum_zs += zero_shot_flags[i];
      sum_ag += agentic_flags[i];
    }
    acc_zs[rep] = static_cast<double>(sum_zs) / static_cast<double>(q);
    acc_ag[rep] = static_cast<double>(sum_ag) / static_cast<double>(q);
  }
  auto summarize = [&](const std::vector<double>& reps_acc,
                       const std::vector<int>& flags) {
    BootstrapCI ci;
    long long total = 0;
    for (int f : flags) total += f;
    ci.point_estimate =
        static_cast<double>(total) / static_cast<double>(flags.size());
    ci.mean = mean(reps_acc);
    ci.sd = sample_sd(reps_acc);
    std::vector<double> sorted = reps_acc;
    std::sort(sorted.begin(), sorted.end());
    ci.ci_low = quantile_sorted(sorted, 0.025);
    ci.ci_high = quantile_sorted(sorted, 0.975);
    ci.reps = reps;
    ci.seed = cfg.rng_seed;
    return ci;
  };
  return {summarize(acc_zs, zero_shot_flags),
          summarize(acc_ag, agentic_flags)};
}

}  // namespace panelstat
