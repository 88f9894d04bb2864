#include "hwnet/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "hwnet/error.hpp"

namespace hwnet {

double student_t_quantile(double p, double dof) {
  if (dof < 1) return boost::math::quantile(boost::math::normal(), p);
  return boost::math::quantile(boost::math::students_t(dof), p);
}

double Estimate::half_width(double level) const {
  if (samples < 2) return std::numeric_limits<double>::infinity();
  return student_t_quantile(0.5 + level / 2.0, static_cast<double>(samples - 1)) * std_error;
}

BatchAccumulator::BatchAccumulator(int functionals, double start, double end, int batches)
    : K_(functionals), batches_(std::max(batches, 1)), start_(start), end_(end) {
  width_ = end_ > start_ ? (end_ - start_) / batches_ : 0.0;
  sums_.assign(static_cast<size_t>(K_) * batches_, 0.0);
}

void BatchAccumulator::add(const double* values, double t0, double t1) {
  t0 = std::max(t0, start_);
  t1 = std::min(t1, end_);
  if (!(t1 > t0) || width_ <= 0.0) return;
  observed_ += t1 - t0;
  int b = std::min(static_cast<int>((t0 - start_) / width_), batches_ - 1);
  while (t0 < t1) {
    const double edge = b == batches_ - 1 ? t1 : std::min(t1, start_ + (b + 1) * width_);
    const double dt = edge - t0;
    double* row = &sums_[static_cast<size_t>(b) * K_];
    for (int k = 0; k < K_; ++k) row[k] += values[k] * dt;
    t0 = edge;
    ++b;
  }
}

std::vector<double> BatchAccumulator::batch_means(int k) const {
  std::vector<double> out(batches_, 0.0);
  if (width_ <= 0.0) return out;
  for (int b = 0; b < batches_; ++b) out[b] = sums_[static_cast<size_t>(b) * K_ + k] / width_;
  return out;
}

Estimate batch_estimate(const std::vector<std::vector<double>>& groups) {
  std::vector<double> all;
  for (const auto& g : groups) all.insert(all.end(), g.begin(), g.end());
  return sample_estimate(all);
}

Estimate sample_estimate(const std::vector<double>& v) {
  Estimate e;
  e.samples = static_cast<long>(v.size());
  if (v.empty()) return e;
  e.mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  if (v.size() < 2) {
    e.std_error = std::numeric_limits<double>::infinity();
    return e;
  }
  double ss = 0.0;
  for (double x : v) ss += (x - e.mean) * (x - e.mean);
  e.std_error = std::sqrt(ss / (v.size() - 1) / v.size());
  return e;
}

Histogram::Histogram(double lo, double hi, double width) : lo_(lo), width_(width) {
  bins_.assign(static_cast<size_t>(std::ceil((hi - lo) / width)) + 2, 0.0);
}

void Histogram::add(double value, double weight) {
  const double pos = (value - lo_) / width_;
  size_t k;
  if (pos < 0) k = 0;
  else if (pos >= static_cast<double>(bins_.size() - 2)) k = bins_.size() - 1;
  else k = static_cast<size_t>(pos) + 1;
  bins_[k] += weight;
  total_ += weight;
}

double Histogram::quantile(double p) const {
  if (total_ <= 0) return std::numeric_limits<double>::quiet_NaN();
  const double target = p * total_;
  double acc = 0.0;
  for (size_t k = 0; k < bins_.size(); ++k) {
    if (acc + bins_[k] >= target && bins_[k] > 0) {
      if (k == 0) return lo_;
      if (k == bins_.size() - 1) return lo_ + width_ * static_cast<double>(bins_.size() - 2);
      const double frac = (target - acc) / bins_[k];
      return lo_ + width_ * (static_cast<double>(k - 1) + frac);
    }
    acc += bins_[k];
  }
  return lo_ + width_ * static_cast<double>(bins_.size() - 2);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  if (n < 2 || y.size() != n) throw Error(ErrorCode::InvalidInput, "line fit needs two points");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t k = 0; k < n; ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  LineFit f;
  if (sxx <= 0) throw Error(ErrorCode::InvalidInput, "line fit needs distinct abscissae");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  const double sse = std::max(syy - f.slope * sxy, 0.0);
  f.r2 = syy > 0 ? 1.0 - sse / syy : 1.0;
  f.slope_se = n > 2 ? std::sqrt(sse / (n - 2) / sxx) : 0.0;
  return f;
}

}  // namespace hwnet
