#include "bvm/law1d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bvm/errors.hpp"
#include "bvm/special_functions.hpp"

namespace bvm {

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kInf = std::numeric_limits<double>::infinity();

double chi2_cdf_at(const ScaledNoncentralChi2Law& law, double x) {
  if (law.scale == 0.0) return x >= law.offset ? 1.0 : 0.0;
  const double t = (x - law.offset) / law.scale;
  if (law.scale > 0.0) {
    return t <= 0.0 ? 0.0 : special::noncentral_chi2_cdf(law.dof, law.noncentrality, t);
  }
  return t <= 0.0 ? 1.0 : special::noncentral_chi2_sf(law.dof, law.noncentrality, t);
}
}  // namespace

WeightedSampleLaw make_weighted_sample(std::vector<double> values, std::vector<double> weights) {
  if (values.empty()) throw InputError("weighted sample is empty");
  if (weights.empty()) weights.assign(values.size(), 1.0);
  if (weights.size() != values.size()) throw InvalidDimension("values and weights differ in length");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || !std::isfinite(weights[i]) || weights[i] < 0.0) {
      throw InputError("weighted sample has a non-finite value or negative weight");
    }
  }
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  WeightedSampleLaw law;
  law.values.reserve(values.size());
  law.weights.reserve(values.size());
  double total = 0.0;
  for (std::size_t i : order) total += weights[i];
  if (!(total > 0.0)) throw InputError("weighted sample has zero total weight");
  for (std::size_t i : order) {
    law.values.push_back(values[i]);
    law.weights.push_back(weights[i] / total);
  }
  law.cumulative.resize(law.weights.size());
  std::partial_sum(law.weights.begin(), law.weights.end(), law.cumulative.begin());
  law.cumulative.back() = 1.0;
  return law;
}

double law_cdf(const Law1D& law, double x) {
  return std::visit(
      overloaded{
          [x](const NormalLaw& l) {
            if (l.sd == 0.0) return x >= l.mean ? 1.0 : 0.0;
            return special::normal_cdf((x - l.mean) / l.sd);
          },
          [x](const WeightedSampleLaw& l) {
            const auto it = std::upper_bound(l.values.begin(), l.values.end(), x);
            return it == l.values.begin() ? 0.0 : l.cumulative[(it - l.values.begin()) - 1];
          },
          [x](const ScaledNoncentralChi2Law& l) { return chi2_cdf_at(l, x); },
      },
      law);
}

double law_cdf_left(const Law1D& law, double x) {
  return std::visit(
      overloaded{
          [x](const NormalLaw& l) {
            if (l.sd == 0.0) return x > l.mean ? 1.0 : 0.0;
            return special::normal_cdf((x - l.mean) / l.sd);
          },
          [x](const WeightedSampleLaw& l) {
            const auto it = std::lower_bound(l.values.begin(), l.values.end(), x);
            return it == l.values.begin() ? 0.0 : l.cumulative[(it - l.values.begin()) - 1];
          },
          [x](const ScaledNoncentralChi2Law& l) {
            if (l.scale == 0.0) return x > l.offset ? 1.0 : 0.0;
            return chi2_cdf_at(l, x);
          },
      },
      law);
}

double noncentral_chi2_quantile(double dof, double noncentrality, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InputError("quantile level outside [0, 1]");
  if (p == 0.0) return 0.0;
  if (p == 1.0) return kInf;
  const double mean = dof + noncentrality;
  const double sd = std::sqrt(2.0 * (dof + 2.0 * noncentrality));
  double lo = 0.0;
  double hi = std::max(mean + sd * std::max(special::normal_quantile(p), 0.0) * 2.0 + 10.0, 1.0);
  while (special::noncentral_chi2_cdf(dof, noncentrality, hi) < p) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (special::noncentral_chi2_cdf(dof, noncentrality, mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double law_quantile(const Law1D& law, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InputError("quantile level outside [0, 1]");
  return std::visit(
      overloaded{
          [p](const NormalLaw& l) {
            if (l.sd == 0.0) return l.mean;
            return l.mean + l.sd * special::normal_quantile(p);
          },
          [p](const WeightedSampleLaw& l) {
            auto it = std::lower_bound(l.cumulative.begin(), l.cumulative.end(), p);
            if (it == l.cumulative.end()) --it;
            return l.values[static_cast<std::size_t>(it - l.cumulative.begin())];
          },
          [p](const ScaledNoncentralChi2Law& l) {
            if (l.scale == 0.0) return l.offset;
            const double q = l.scale > 0.0 ? p : 1.0 - p;
            return l.offset + l.scale * noncentral_chi2_quantile(l.dof, l.noncentrality, q);
          },
      },
      law);
}

Law1D law_affine(const Law1D& law, double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b)) throw InputError("affine map must be finite");
  return std::visit(
      overloaded{
          [&](const NormalLaw& l) -> Law1D { return NormalLaw{a + b * l.mean, std::abs(b) * l.sd}; },
          [&](const WeightedSampleLaw& l) -> Law1D {
            std::vector<double> values(l.values.size());
            for (std::size_t i = 0; i < values.size(); ++i) values[i] = a + b * l.values[i];
            return make_weighted_sample(std::move(values), l.weights);
          },
          [&](const ScaledNoncentralChi2Law& l) -> Law1D {
            return ScaledNoncentralChi2Law{a + b * l.offset, b * l.scale, l.dof, l.noncentrality};
          },
      },
      law);
}

bool law_is_continuous(const Law1D& law) {
  return std::visit(overloaded{
                        [](const NormalLaw& l) { return l.sd > 0.0; },
                        [](const WeightedSampleLaw&) { return false; },
                        [](const ScaledNoncentralChi2Law& l) { return l.scale != 0.0; },
                    },
                    law);
}

double law_effective_size(const Law1D& law) {
  if (const auto* s = std::get_if<WeightedSampleLaw>(&law)) {
    double sq = 0.0;
    for (double w : s->weights) sq += w * w;
    return 1.0 / sq;
  }
  return kInf;
}

double law_mean(const Law1D& law) {
  return std::visit(overloaded{
                        [](const NormalLaw& l) { return l.mean; },
                        [](const WeightedSampleLaw& l) {
                          double m = 0.0;
                          for (std::size_t i = 0; i < l.values.size(); ++i) {
                            m += l.weights[i] * l.values[i];
                          }
                          return m;
                        },
                        [](const ScaledNoncentralChi2Law& l) {
                          return l.offset + l.scale * (l.dof + l.noncentrality);
                        },
                    },
                    law);
}

std::vector<double> law_grid_points(const Law1D& law, std::size_t count) {
  if (const auto* s = std::get_if<WeightedSampleLaw>(&law)) return s->values;
  if (!law_is_continuous(law)) return {law_quantile(law, 0.5)};
  std::vector<double> grid;
  grid.reserve(count);
  const auto* chi = std::get_if<ScaledNoncentralChi2Law>(&law);
  for (std::size_t i = 0; i < count; ++i) {
    const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(count);
    if (chi) {
      // A normal approximation of the quantiles is enough to place the grid.
      const double mean = chi->dof + chi->noncentrality;
      const double sd = std::sqrt(2.0 * (chi->dof + 2.0 * chi->noncentrality));
      const double x = std::max(mean + sd * special::normal_quantile(p), 0.0);
      grid.push_back(chi->offset + chi->scale * x);
    } else {
      grid.push_back(law_quantile(law, p));
    }
  }
  return grid;
}

}  // namespace bvm
