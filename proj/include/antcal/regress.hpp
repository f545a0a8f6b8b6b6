#ifndef ANTCAL_REGRESS_HPP
#define ANTCAL_REGRESS_HPP

// Least-squares estimation of the correction transform from training pairs.
//
// Row k of T is fitted independently by ordinary least squares on the
// homogeneous inputs (azimuth, elevation, 1); the third row stays (0, 0, 1).

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "antcal/error.hpp"
#include "antcal/geometry.hpp"
#include "antcal/maxima.hpp"
#include "antcal/signalio.hpp"
#include "antcal/text.hpp"

namespace antcal {

class TrainingSet {
 public:
  static constexpr std::size_t kMinPairs = 3;

  /// Throws too-few-pairs below 3 pairs and rank-deficient when the intended
  /// pointings are collinear in the azimuth-elevation plane.
  explicit TrainingSet(std::vector<TrainingPair> pairs) : pairs_(std::move(pairs)) {
    if (pairs_.size() < kMinPairs) {
      throw Error(Errc::too_few_pairs, "need at least 3 pairs, got " + std::to_string(pairs_.size()));
    }
    unwrap();
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (const auto& x : x_) mean += x;
    mean /= static_cast<double>(x_.size());
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (const auto& x : x_) cov += (x - mean) * (x - mean).transpose();
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
    const double big = es.eigenvalues()(1);
    if (!(big > 0.0) || es.eigenvalues()(0) <= 1e-12 * big) {
      throw Error(Errc::rank_deficient, "intended pointings are collinear");
    }
  }

  const std::vector<TrainingPair>& pairs() const noexcept { return pairs_; }
  std::size_t size() const noexcept { return pairs_.size(); }

  /// Intended pointing i on the continuous azimuth branch.
  const Eigen::Vector2d& input(std::size_t i) const { return x_[i]; }
  /// Actual pointing i, unwrapped to within 180 degrees of its input.
  const Eigen::Vector2d& target(std::size_t i) const { return y_[i]; }

 private:
  // The first intended azimuth stays in [0, 360); each later one is moved by
  // whole turns to within 180 degrees of its predecessor.
  void unwrap() {
    double prev = 0.0;
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
      double az = pairs_[i].intended.azimuth_deg();
      if (i > 0) az = prev + wrap_to_180(az - prev);
      prev = az;
      const double actual = az + wrap_to_180(pairs_[i].actual.azimuth_deg() - az);
      x_.emplace_back(az, pairs_[i].intended.elevation_deg());
      y_.emplace_back(actual, pairs_[i].actual.elevation_deg());
    }
  }

  std::vector<TrainingPair> pairs_;
  std::vector<Eigen::Vector2d> x_;
  std::vector<Eigen::Vector2d> y_;
};

struct FitReport {
  Transform transform;
  ErrorMetrics azimuth;
  ErrorMetrics elevation;
  std::vector<Eigen::Vector2d> residuals;  // target - prediction, degrees
  std::vector<std::size_t> flagged;       // residual norm > 3x the median
  double condition_number = 0.0;          // of the Gram matrix
  bool used_qr = false;
};

/// Residual sum of squares over both fitted rows.
inline double rss(const Transform& t, const TrainingSet& ts) {
  double sum = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    sum += (ts.target(i) - t.map(ts.input(i)(0), ts.input(i)(1))).squaredNorm();
  }
  return sum;
}

/// Metrics of a fixed transform on a training set; no estimation happens.
inline FitReport evaluate(const Transform& t, const TrainingSet& ts) {
  FitReport r;
  r.transform = t;
  std::vector<double> ra, rb, za(ts.size(), 0.0);
  std::vector<double> norms;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const Eigen::Vector2d res = ts.target(i) - t.map(ts.input(i)(0), ts.input(i)(1));
    r.residuals.push_back(res);
    ra.push_back(res(0));
    rb.push_back(res(1));
    norms.push_back(res.norm());
  }
  r.azimuth = mae_mse(ra, za);
  r.elevation = mae_mse(rb, za);
  auto sorted = norms;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2),
                   sorted.end());
  const double median = sorted[sorted.size() / 2];
  for (std::size_t i = 0; i < norms.size(); ++i) {
    if (norms[i] > 3.0 * median) r.flagged.push_back(i);
  }
  return r;
}

/// Gram-matrix conditioning above which the fit switches to a
/// column-pivoted QR of the design matrix.
inline constexpr double kMaxGramCondition = 1e8;

inline FitReport fit(const TrainingSet& ts) {
  const auto n = static_cast<Eigen::Index>(ts.size());
  Eigen::MatrixX3d design(n, 3);
  Eigen::MatrixX2d targets(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    design.row(i) << ts.input(k)(0), ts.input(k)(1), 1.0;
    targets.row(i) = ts.target(k).transpose();
  }
  const Eigen::Matrix3d gram = design.transpose() * design;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(gram, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  const double cond = lmin > 0.0 ? es.eigenvalues()(2) / lmin
                                 : std::numeric_limits<double>::infinity();

  Eigen::Matrix<double, 3, 2> coef;
  bool used_qr = false;
  const Eigen::LLT<Eigen::Matrix3d> llt(gram);
  if (cond <= kMaxGramCondition && llt.info() == Eigen::Success) {
    coef = llt.solve(design.transpose() * targets);
  } else {
    const Eigen::ColPivHouseholderQR<Eigen::MatrixX3d> qr(design);
    if (qr.rank() < 3) throw Error(Errc::rank_deficient, "design matrix is rank deficient");
    coef = qr.solve(targets);
    used_qr = true;
  }
  FitReport r = evaluate(Transform::from_rows(coef(0, 0), coef(1, 0), coef(2, 0), coef(0, 1),
                                              coef(1, 1), coef(2, 1)),
                         ts);
  r.condition_number = cond;
  r.used_qr = used_qr;
  return r;
}

inline std::string format_training_error(const FitReport& r) {
  const MetricRow rows[] = {{"azimuth", r.azimuth}, {"elevation", r.elevation}};
  return format_error_table(rows);
}

// ---------------------------------------------------------------------------
// Transform file: three rows of three numbers, '#' comments.

inline std::string write_transform(const Transform& t) {
  std::string out;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      if (c) out += " ";
      out += text::shortest(t(r, c));
    }
    out += "\n";
  }
  try {
    const auto d = decompose(t);
    out += "# translation " + text::fixed(d.translation(0), 6) + " " +
           text::fixed(d.translation(1), 6) + "\n";
    out += "# scaling " + text::fixed(d.scaling(0), 6) + " " + text::fixed(d.scaling(1), 6) + "\n";
    out += "# shear " + text::fixed(d.shear, 6) + "\n";
    out += "# rotation_deg " + text::fixed(d.rotation_deg, 6) + "\n";
  } catch (const Error&) {
    out += "# linear block has no rotation-shear-scaling factorization\n";
  }
  return out;
}

inline Transform parse_transform(std::string_view text) {
  std::vector<double> v;
  const auto lines = text::split_lines(text);
  std::size_t rows = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::is_blank_or_comment(lines[i])) continue;
    const auto f = text::split_ws(lines[i]);
    if (f.size() != 3 || rows == 3) {
      throw Error(Errc::malformed_line, "expected three rows of three numbers", i + 1);
    }
    for (auto s : f) {
      const auto d = text::to_double(s);
      if (!d) throw Error(Errc::malformed_line, "bad number '" + std::string(s) + "'", i + 1);
      v.push_back(*d);
    }
    ++rows;
  }
  if (rows != 3) throw Error(Errc::malformed_line, "expected three rows of three numbers");
  Eigen::Matrix3d m;
  m << v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8];
  return Transform(m);
}

}  // namespace antcal

#endif  // ANTCAL_REGRESS_HPP
