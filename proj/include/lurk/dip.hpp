#pragma once

// Hartigan & Hartigan dip statistic for unimodality: the maximum distance
// between the empirical CDF and the closest unimodal CDF. Follows the
// greatest-convex-minorant / least-concave-majorant cycling of AS 217.

#include <algorithm>
#include <vector>

namespace lurk {

struct DipResult {
  double dip = 0.0;
  std::size_t modal_low = 0;   // 0-based index into the sorted sample
  std::size_t modal_high = 0;
};

// Values need not be sorted. Samples with fewer than two distinct values give
// the minimum dip 1/(2n).
inline DipResult dip_test_statistic(std::vector<double> sample) {
  std::sort(sample.begin(), sample.end());
  const long n = static_cast<long>(sample.size());
  DipResult res;
  if (n == 0) return res;
  // 1-based working arrays
  std::vector<double> x(static_cast<std::size_t>(n) + 1);
  std::copy(sample.begin(), sample.end(), x.begin() + 1);
  std::vector<long> mn(x.size()), mj(x.size()), gcm(x.size()), lcm(x.size());

  long low = 1, high = n;
  double dip = 1.0;  // in units of 1/(2n) until the end
  if (n < 2 || x[n] == x[1]) {
    res.dip = dip / (2.0 * static_cast<double>(n));
    res.modal_high = static_cast<std::size_t>(n - 1);
    return res;
  }

  // Convex minorant index chains.
  mn[1] = 1;
  for (long j = 2; j <= n; ++j) {
    mn[j] = j - 1;
    for (;;) {
      const long mnj = mn[j];
      const long mnmnj = mn[mnj];
      if (mnj == 1 || (x[j] - x[mnj]) * static_cast<double>(mnj - mnmnj) <
                          (x[mnj] - x[mnmnj]) * static_cast<double>(j - mnj))
        break;
      mn[j] = mnmnj;
    }
  }
  // Concave majorant index chains.
  mj[n] = n;
  for (long k = n - 1; k >= 1; --k) {
    mj[k] = k + 1;
    for (;;) {
      const long mjk = mj[k];
      const long mjmjk = mj[mjk];
      if (mjk == n || (x[k] - x[mjk]) * static_cast<double>(mjk - mjmjk) <
                          (x[mjk] - x[mjmjk]) * static_cast<double>(k - mjk))
        break;
      mj[k] = mjmjk;
    }
  }

  for (;;) {
    // GCM change points from high down to low.
    gcm[1] = high;
    long i = 1;
    while (gcm[i] > low) {
      gcm[i + 1] = mn[gcm[i]];
      ++i;
    }
    const long l_gcm = i;
    long ig = l_gcm;
    long ix = ig - 1;

    // LCM change points from low up to high.
    lcm[1] = low;
    i = 1;
    while (lcm[i] < high) {
      lcm[i + 1] = mj[lcm[i]];
      ++i;
    }
    const long l_lcm = i;
    long ih = l_lcm;
    long iv = 2;

    double d = 0.0;
    if (l_gcm != 2 || l_lcm != 2) {
      do {
        const long gcmix = gcm[ix];
        const long lcmiv = lcm[iv];
        if (gcmix > lcmiv) {
          const long gcmi1 = gcm[ix + 1];
          const double dx = static_cast<double>(lcmiv - gcmi1 + 1) -
                            (x[lcmiv] - x[gcmi1]) * static_cast<double>(gcmix - gcmi1) / (x[gcmix] - x[gcmi1]);
          ++iv;
          if (dx >= d) {
            d = dx;
            ig = ix + 1;
            ih = iv - 1;
          }
        } else {
          const long lcmiv1 = lcm[iv - 1];
          const double dx = (x[gcmix] - x[lcmiv1]) * static_cast<double>(lcmiv - lcmiv1) / (x[lcmiv] - x[lcmiv1]) -
                            static_cast<double>(gcmix - lcmiv1 - 1);
          --ix;
          if (dx >= d) {
            d = dx;
            ig = ix + 1;
            ih = iv;
          }
        }
        if (ix < 1) ix = 1;
        if (iv > l_lcm) iv = l_lcm;
      } while (gcm[ix] != lcm[iv]);
    } else {
      d = 1.0;
    }

    if (d < dip) break;

    // Dip for the convex minorant.
    double dip_l = 0.0;
    for (long j = ig; j < l_gcm; ++j) {
      double max_t = 1.0;
      const long jb = gcm[j + 1], je = gcm[j];
      if (je - jb > 1 && x[je] != x[jb]) {
        const double c = static_cast<double>(je - jb) / (x[je] - x[jb]);
        for (long jj = jb; jj <= je; ++jj) {
          const double t = static_cast<double>(jj - jb + 1) - (x[jj] - x[jb]) * c;
          max_t = std::max(max_t, t);
        }
      }
      dip_l = std::max(dip_l, max_t);
    }
    // Dip for the concave majorant.
    double dip_u = 0.0;
    for (long j = ih; j < l_lcm; ++j) {
      double max_t = 1.0;
      const long jb = lcm[j], je = lcm[j + 1];
      if (je - jb > 1 && x[je] != x[jb]) {
        const double c = static_cast<double>(je - jb) / (x[je] - x[jb]);
        for (long jj = jb; jj <= je; ++jj) {
          const double t = (x[jj] - x[jb]) * c - static_cast<double>(jj - jb - 1);
          max_t = std::max(max_t, t);
        }
      }
      dip_u = std::max(dip_u, max_t);
    }
    dip = std::max({dip, dip_l, dip_u});

    if (low == gcm[ig] && high == lcm[ih]) break;
    low = gcm[ig];
    high = lcm[ih];
  }

  res.dip = dip / (2.0 * static_cast<double>(n));
  res.modal_low = static_cast<std::size_t>(low - 1);
  res.modal_high = static_cast<std::size_t>(high - 1);
  return res;
}

inline double dip_statistic(std::vector<double> sample) { return dip_test_statistic(std::move(sample)).dip; }

} // namespace lurk
