#pragma once

#include <string>
#include <vector>

namespace exhub {

struct BandSeries {
  struct Point {
    double n_band;
    double delta_e_ev;
  };
  std::vector<Point> points;  // n_band strictly increasing
  std::string state_label;

  void validate() const;  // throws on bad ordering or too few points
};

struct FitResult {
  double delta_e_inf = 0.0;  // eV
  double b = 0.0;            // eV
  double c = 1.0;            // band count, > 0 on success
  double residual_rms = 0.0;
  bool converged = false;
};

// f(n) = delta_e_inf + b * exp(-n / c). Throws if c <= 0.
double evaluate_fit(const FitResult& params, double n);

// Damped Gauss-Newton least squares with multi-start over the decay constant.
FitResult fit_band_extrapolation(const BandSeries& series);

BandSeries band_series_from_csv(const std::string& csv_text);

}  // namespace exhub
