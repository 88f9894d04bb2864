#pragma once

#include <vector>

namespace hwnet {

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  long samples = 0;  // independent units behind std_error
  double half_width(double level = 0.95) const;
};

// Time integrals of several functionals over [start, end) split into equal batches.
class BatchAccumulator {
 public:
  BatchAccumulator(int functionals, double start, double end, int batches);
  // values[k] is held constant on [t0, t1).
  void add(const double* values, double t0, double t1);
  std::vector<double> batch_means(int k) const;
  double observed() const { return observed_; }
  int batches() const { return batches_; }

 private:
  int K_, batches_;
  double start_, end_, width_;
  double observed_ = 0.0;
  std::vector<double> sums_;  // batch-major
};

// Mean of all batch means and the standard error of that mean.
Estimate batch_estimate(const std::vector<std::vector<double>>& groups);
Estimate sample_estimate(const std::vector<double>& values);

class Histogram {
 public:
  Histogram(double lo, double hi, double width);
  void add(double value, double weight);
  double quantile(double p) const;
  double total() const { return total_; }

 private:
  double lo_, width_;
  std::vector<double> bins_;  // [underflow, interior..., overflow]
  double total_ = 0.0;
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_se = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

double student_t_quantile(double p, double dof);

}  // namespace hwnet
