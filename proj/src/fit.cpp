#include "exhub/fit.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace exhub {

void BandSeries::validate() const {
  if (points.size() < 4)
    throw std::invalid_argument(
        "band series needs at least 4 points for a 3-parameter fit");
  for (std::size_t i = 1; i < points.size(); ++i)
    if (points[i].n_band <= points[i - 1].n_band)
      throw std::invalid_argument("n_band must be strictly increasing");
}

double evaluate_fit(const FitResult& params, double n) {
  if (params.c <= 0.0) throw std::invalid_argument("c must be positive");
  return params.delta_e_inf + params.b * std::exp(-n / params.c);
}

namespace {

double rms_residual(const BandSeries& s, const FitResult& p) {
  double ss = 0.0;
  for (const auto& pt : s.points) {
    double r = evaluate_fit(p, pt.n_band) - pt.delta_e_ev;
    ss += r * r;
  }
  return std::sqrt(ss / static_cast<double>(s.points.size()));
}

// One damped Gauss-Newton run from a given start; nu follows the usual
// x10-up / /10-down schedule.
FitResult refine(const BandSeries& s, FitResult p) {
  const int n = static_cast<int>(s.points.size());
  double nu = 1e-3;
  double ss = 0.0;
  auto sum_sq = [&](const FitResult& q) {
    double acc = 0.0;
    for (const auto& pt : s.points) {
      double r = evaluate_fit(q, pt.n_band) - pt.delta_e_ev;
      acc += r * r;
    }
    return acc;
  };
  ss = sum_sq(p);

  for (int iter = 0; iter < 200; ++iter) {
    Eigen::MatrixXd jac(n, 3);
    Eigen::VectorXd res(n);
    for (int i = 0; i < n; ++i) {
      double nb = s.points[i].n_band;
      double e = std::exp(-nb / p.c);
      res(i) = p.delta_e_inf + p.b * e - s.points[i].delta_e_ev;
      jac(i, 0) = 1.0;
      jac(i, 1) = e;
      jac(i, 2) = p.b * e * nb / (p.c * p.c);
    }
    Eigen::Matrix3d jtj = jac.transpose() * jac;
    Eigen::Vector3d jtr = jac.transpose() * res;

    bool stepped = false;
    for (int attempt = 0; attempt < 40; ++attempt) {
      Eigen::Matrix3d damped = jtj;
      for (int d = 0; d < 3; ++d)
        damped(d, d) += nu * std::max(jtj(d, d), 1e-12);
      Eigen::Vector3d delta = damped.ldlt().solve(-jtr);
      FitResult trial = p;
      trial.delta_e_inf += delta(0);
      trial.b += delta(1);
      trial.c += delta(2);
      if (trial.c > 0.0) {
        double trial_ss = sum_sq(trial);
        if (trial_ss <= ss) {
          p = trial;
          ss = trial_ss;
          nu = std::max(nu / 10.0, 1e-12);
          stepped = true;
          if (delta.norm() < 1e-10) {
            p.converged = true;
            p.residual_rms = rms_residual(s, p);
            return p;
          }
          break;
        }
      }
      nu *= 10.0;
      if (nu > 1e12) break;
    }
    if (!stepped) break;
  }
  p.converged = false;
  p.residual_rms = rms_residual(s, p);
  return p;
}

}  // namespace

FitResult fit_band_extrapolation(const BandSeries& series) {
  series.validate();
  const auto& pts = series.points;
  const double y_first = pts.front().delta_e_ev;
  const double y_last = pts.back().delta_e_ev;
  const double n_first = pts.front().n_band;
  const double n_last = pts.back().n_band;
  const double span = n_last - n_first;

  bool all_equal = true;
  for (const auto& pt : pts)
    if (pt.delta_e_ev != y_first) {
      all_equal = false;
      break;
    }
  if (all_equal) {
    FitResult flat;
    flat.delta_e_inf = y_first;
    flat.b = 0.0;
    flat.c = span > 0 ? span : 1.0;
    flat.residual_rms = 0.0;
    flat.converged = true;
    return flat;
  }

  FitResult best;
  bool have_best = false;
  for (double c0 : {span / 10.0, span / 3.0, span}) {
    if (c0 <= 0.0) continue;
    double denom = std::exp(-n_first / c0) - std::exp(-n_last / c0);
    FitResult start;
    start.c = c0;
    start.b = std::abs(denom) > 1e-300 ? (y_first - y_last) / denom : 0.0;
    start.delta_e_inf = y_last - start.b * std::exp(-n_last / c0);
    FitResult candidate = refine(series, start);
    if (!have_best || candidate.residual_rms < best.residual_rms ||
        (candidate.converged && !best.converged &&
         candidate.residual_rms <= best.residual_rms * (1 + 1e-12))) {
      best = candidate;
      have_best = true;
    }
  }
  return best;
}

BandSeries band_series_from_csv(const std::string& csv_text) {
  BandSeries series;
  std::istringstream in(csv_text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    for (char& ch : line)
      if (ch == ',') ch = ' ';
    std::istringstream row(line);
    double n, e;
    if (!(row >> n >> e)) {
      if (line_no == 1) continue;  // header row
      throw std::invalid_argument("bad CSV row at line " +
                                  std::to_string(line_no));
    }
    series.points.push_back({n, e});
  }
  series.validate();
  return series;
}

}  // namespace exhub
