#pragma once

#include <Eigen/Dense>

namespace storm {

/// Local quadratic model m(center + s) = value + g's + s'Hs/2. An empty
/// hessian (size 0) stands for H = 0, keeping first-order models cheap.
/// A nonempty hessian must be symmetric.
struct QuadraticModel {
  Eigen::VectorXd center;
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;

  bool has_hessian() const { return hessian.size() > 0; }

  double value_at(const Eigen::VectorXd& s) const {
    double m = value + gradient.dot(s);
    if (has_hessian()) m += 0.5 * s.dot(hessian * s);
    return m;
  }

  // Spectral norm of the hessian; 0 for first-order models.
  double hessian_norm() const {
    if (!has_hessian()) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (hessian + hessian.transpose()),
                                                      Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
};

}  // namespace storm
