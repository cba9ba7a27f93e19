#include <cmath>

#include "inflection/econometrics.hpp"
#include "inflection/errors.hpp"

namespace inflection {

OlsResult ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  const OlsOptions& opts) {
  const Eigen::Index n = X.rows();
  const Eigen::Index k = X.cols();
  if (y.size() != n) throw ValidationError("ols_fit: X and y row counts differ");
  if (k == 0) throw ValidationError("ols_fit: design has no columns");
  if (n < k) {
    throw RankDeficiencyError("rank-deficiency: fewer rows than columns", "");
  }

  auto column_name = [&](Eigen::Index j) {
    return static_cast<std::size_t>(j) < opts.names.size()
               ? opts.names[static_cast<std::size_t>(j)]
               : "x" + std::to_string(j);
  };

  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
  const Eigen::MatrixXd& packed = qr.matrixQR();
  for (Eigen::Index j = 0; j < k; ++j) {
    const double scale = static_cast<std::size_t>(j) < opts.reference_norms.size()
                             ? opts.reference_norms[static_cast<std::size_t>(j)]
                             : X.col(j).norm();
    if (!(std::abs(packed(j, j)) > opts.rank_tol * scale) || scale == 0.0) {
      throw RankDeficiencyError("rank-deficiency: column '" + column_name(j) +
                                    "' is collinear with preceding columns or the "
                                    "absorbed fixed effects",
                                column_name(j));
    }
  }

  const auto R = packed.topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const Eigen::VectorXd qty = (qr.householderQ().transpose() * y).head(k);

  OlsResult out;
  out.coef = R.solve(qty);
  out.residuals = y - X * out.coef;
  const Eigen::MatrixXd r_inv = R.solve(Eigen::MatrixXd::Identity(k, k));
  out.xtx_inv = r_inv * r_inv.transpose();
  return out;
}

Eigen::MatrixXd cluster_vcov(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals,
                             std::span<const int> clusters, std::optional<int> n_params) {
  const Eigen::Index n = X.rows();
  const Eigen::Index k = X.cols();
  if (residuals.size() != n || static_cast<Eigen::Index>(clusters.size()) != n) {
    throw ValidationError("cluster_vcov: X, residuals and clusters differ in length");
  }
  int G = 0;
  for (int g : clusters) {
    if (g < 0) throw ValidationError("cluster_vcov: negative cluster index");
    G = std::max(G, g + 1);
  }
  std::vector<char> present(static_cast<std::size_t>(G), 0);
  for (int g : clusters) present[static_cast<std::size_t>(g)] = 1;
  int occupied = 0;
  for (char p : present) occupied += p;
  if (occupied < 2) {
    throw SingleClusterError("cluster_vcov: at least two clusters are required");
  }

  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(G, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    scores.row(clusters[static_cast<std::size_t>(i)]) += residuals[i] * X.row(i);
  }
  const Eigen::MatrixXd meat = scores.transpose() * scores;

  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
  const auto R = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv = R.solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd bread = r_inv * r_inv.transpose();

  const double Gd = occupied;
  const double Nd = static_cast<double>(n);
  const double Kd = static_cast<double>(n_params.value_or(static_cast<int>(k)));
  const double factor = Gd / (Gd - 1.0) * (Nd - 1.0) / std::max(Nd - Kd, 1.0);

  Eigen::MatrixXd v = factor * bread * meat * bread;
  return 0.5 * (v + v.transpose());
}

}  // namespace inflection
