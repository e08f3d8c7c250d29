#include "gmmfit/ak_metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gmmfit {

namespace {

int sgn(double v) { return (v > 0.0) - (v < 0.0); }

void merge_same_sign(std::vector<SignRun>& runs) {
  std::vector<SignRun> out;
  for (const auto& r : runs) {
    if (!out.empty() && sgn(out.back().integral) == sgn(r.integral)) {
      out.back().x.hi = r.x.hi;
      out.back().integral += r.integral;
    } else {
      out.push_back(r);
    }
  }
  runs = std::move(out);
}

}  // namespace

SignRunDecomposition sign_runs(const PiecewisePolynomial& p) {
  std::vector<SignRun> runs;
  int cur = 0;
  for (const auto& seg : sign_segments(p)) {
    if (!runs.empty() && (seg.sign == 0 || seg.sign == cur)) {
      runs.back().x.hi = seg.x.hi;
      runs.back().integral += seg.integral;
      continue;
    }
    if (runs.empty() || seg.sign != 0) {
      runs.push_back({seg.x, seg.integral});
      cur = seg.sign;
    }
  }
  // absorb negligible runs, then re-merge runs of equal sign
  bool changed = true;
  while (changed && runs.size() > 1) {
    changed = false;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      if (std::abs(runs[i].integral) >= kNegligibleRun) continue;
      if (i > 0) {
        runs[i - 1].x.hi = runs[i].x.hi;
        runs[i - 1].integral += runs[i].integral;
      } else {
        runs[1].x.lo = runs[0].x.lo;
        runs[1].integral += runs[0].integral;
      }
      runs.erase(runs.begin() + static_cast<long>(i));
      merge_same_sign(runs);
      changed = true;
      break;
    }
  }
  return {std::move(runs)};
}

double ak_from_integrals(std::span<const double> values, int K) {
  if (K < 1) throw std::invalid_argument("K must be at least 1");
  const double ninf = -std::numeric_limits<double>::infinity();
  // states after processing a prefix, indexed by groups opened so far:
  // out = not inside a group, pos/neg = inside a group counted with +/- sign
  std::vector<double> out(K + 1, ninf), pos(K + 1, ninf), neg(K + 1, ninf);
  out[0] = 0.0;
  for (double v : values) {
    for (int j = K; j >= 0; --j) {
      double closed = std::max({out[j], pos[j], neg[j]});
      double open_prev = j > 0 ? std::max({out[j - 1], pos[j - 1], neg[j - 1]}) : ninf;
      double np = std::max(pos[j], open_prev) + v;
      double nn = std::max(neg[j], open_prev) - v;
      out[j] = closed;
      pos[j] = np;
      neg[j] = nn;
    }
  }
  double best = 0.0;
  for (int j = 0; j <= K; ++j) best = std::max({best, out[j], pos[j], neg[j]});
  return best;
}

double ak_norm(const PiecewisePolynomial& p, int K) {
  if (K < 1) throw std::invalid_argument("K must be at least 1");
  auto dec = sign_runs(p);
  std::vector<double> v;
  v.reserve(dec.runs.size());
  for (const auto& r : dec.runs) v.push_back(r.integral);
  return ak_from_integrals(v, K);
}

double ak_distance(const PiecewisePolynomial& p, const PiecewisePolynomial& q, int K) {
  return ak_norm(subtract(p, q), K);
}

double ak_brute_force(const PiecewisePolynomial& p, int K, std::size_t grid) {
  if (K < 1) throw std::invalid_argument("K must be at least 1");
  if (p.empty() || grid < 2) return 0.0;
  const Interval S = p.support();
  // prefix integrals F at grid points
  std::vector<double> F(grid);
  F[0] = 0.0;
  for (std::size_t i = 1; i < grid; ++i) {
    double a = S.lo + S.width() * (i - 1) / (grid - 1);
    double b = i + 1 == grid ? S.hi : S.lo + S.width() * i / (grid - 1);
    F[i] = F[i - 1] + integrate(p, a, b);
  }
  // best[j][i]: best value using j intervals with endpoints <= grid point i
  const double ninf = -std::numeric_limits<double>::infinity();
  std::vector<double> prev(grid, 0.0), cur(grid);
  double answer = 0.0;
  for (int j = 1; j <= K; ++j) {
    double hi_plus = ninf, hi_minus = ninf;  // max of prev[l] - F[l], prev[l] + F[l]
    for (std::size_t i = 0; i < grid; ++i) {
      hi_plus = std::max(hi_plus, prev[i] - F[i]);
      hi_minus = std::max(hi_minus, prev[i] + F[i]);
      double take = std::max(hi_plus + F[i], hi_minus - F[i]);
      cur[i] = std::max(i > 0 ? cur[i - 1] : ninf, take);
    }
    answer = std::max(answer, cur[grid - 1]);
    prev = cur;
  }
  return answer;
}

}  // namespace gmmfit
