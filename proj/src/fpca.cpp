/*
 * Copyright 2026 The rramfda Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "rramfda/fpca.hpp"

#include <cmath>
#include <string>

#include "rramfda/error.hpp"

namespace rramfda {

namespace {

constexpr double kSignTie = 1e-10;

void fix_sign(const BasisSpec& spec, const Eigen::VectorXd& integrals, Eigen::Ref<Eigen::VectorXd> b,
              Eigen::Ref<Eigen::VectorXd> u) {
  double key = integrals.dot(b);
  if (std::abs(key) < kSignTie) key = eval_expansion(spec, b, spec.domain().lo);
  if (std::abs(key) < kSignTie * b.cwiseAbs().maxCoeff()) {
    Eigen::Index k = 0;
    b.cwiseAbs().maxCoeff(&k);
    key = b(k);
  }
  if (key < 0.0) {
    b = -b;
    u = -u;
  }
}

}  // namespace

FpcaModel fit_fpca(const CoefMatrix& coefs, const GramMatrix& gram, int q_max) {
  const Eigen::MatrixXd& a = coefs.values;
  const Eigen::Index n = a.rows();
  const Eigen::Index p = a.cols();
  if (n < 2) throw InvalidArgument("FPCA needs at least 2 curves");
  if (p != coefs.spec.dimension() || gram.matrix.rows() != p) {
    throw InvalidArgument("coefficient matrix, basis and Gram matrix dimensions disagree");
  }
  if (!a.allFinite()) throw DataError("coefficient matrix has non-finite entries");
  const Eigen::Index limit = std::min(n - 1, p);
  if (q_max < 1 || q_max > limit) {
    throw InvalidArgument("q_max must lie in [1, " + std::to_string(limit) + "]");
  }

  FpcaModel model{coefs.spec, gram, {}, {}, {}, {}, {}, 0.0};
  model.mean_coefs = a.colwise().mean().transpose();
  const Eigen::MatrixXd centered = a.rowwise() - model.mean_coefs.transpose();
  const double denom = static_cast<double>(n - 1);
  model.coef_covariance = (centered.transpose() * centered) / denom;

  const Eigen::MatrixXd z = centered * gram.sqrt;
  Eigen::MatrixXd cov = (z.transpose() * z) / denom;
  cov = 0.5 * (cov + cov.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericError("covariance eigendecomposition failed");

  // Eigen returns ascending order.
  Eigen::VectorXd values = eig.eigenvalues().reverse();
  Eigen::MatrixXd vectors = eig.eigenvectors().rowwise().reverse();
  values = values.cwiseMax(0.0);
  model.total_variance = values.sum();

  const Eigen::VectorXd integrals = basis_integrals(coefs.spec);
  Eigen::MatrixXd b = gram.inv_sqrt * vectors.leftCols(q_max);  // p x q
  Eigen::MatrixXd u = vectors.leftCols(q_max);
  for (int j = 0; j < q_max; ++j) fix_sign(coefs.spec, integrals, b.col(j), u.col(j));

  model.eigenvalues = values.head(q_max);
  model.weight_coefs = b.transpose();
  model.scores = z * u;
  return model;
}

VarianceTable explained_variance(const FpcaModel& model, int q) {
  if (q < 0 || q > model.q_max()) {
    throw InvalidArgument("q must lie in [0, " + std::to_string(model.q_max()) + "]");
  }
  VarianceTable t;
  double running = 0.0;
  for (int j = 0; j < q; ++j) {
    const double pct =
        model.total_variance > 0.0 ? 100.0 * model.eigenvalues(j) / model.total_variance : 0.0;
    running += pct;
    t.percent.push_back(pct);
    t.cumulative.push_back(running);
  }
  return t;
}

Eigen::VectorXd reconstruct(const FpcaModel& model, const Eigen::Ref<const Eigen::VectorXd>& scores,
                            int q) {
  if (q < 0 || q > model.q_max()) {
    throw InvalidArgument("q must lie in [0, " + std::to_string(model.q_max()) + "]");
  }
  if (scores.size() != q) throw InvalidArgument("score vector length must equal q");
  Eigen::VectorXd out = model.mean_coefs;
  for (int j = 0; j < q; ++j) out += scores(j) * model.weight_coefs.row(j).transpose();
  return out;
}

Eigen::MatrixXd reconstruct_all(const FpcaModel& model, const Eigen::Ref<const Eigen::MatrixXd>& scores,
                                int q) {
  if (q < 0 || q > model.q_max()) {
    throw InvalidArgument("q must lie in [0, " + std::to_string(model.q_max()) + "]");
  }
  if (scores.cols() != q) throw InvalidArgument("score matrix must have q columns");
  Eigen::MatrixXd out = scores * model.weight_coefs.topRows(q);
  out.rowwise() += model.mean_coefs.transpose();
  return out;
}

Eigen::MatrixXd project_scores(const FpcaModel& model, const Eigen::Ref<const Eigen::MatrixXd>& coefs,
                               int q) {
  if (q < 0 || q > model.q_max()) {
    throw InvalidArgument("q must lie in [0, " + std::to_string(model.q_max()) + "]");
  }
  if (coefs.cols() != model.mean_coefs.size()) {
    throw InvalidArgument("coefficient width does not match the model basis");
  }
  const Eigen::MatrixXd centered = coefs.rowwise() - model.mean_coefs.transpose();
  return centered * model.gram.matrix * model.weight_coefs.topRows(q).transpose();
}

double eval_mean(const FpcaModel& model, double u) {
  return eval_expansion(model.spec, model.mean_coefs, u);
}

double eval_weight(const FpcaModel& model, int component, double u) {
  if (component < 0 || component >= model.q_max()) {
    throw InvalidArgument("component index out of range");
  }
  return eval_expansion(model.spec, model.weight_coefs.row(component).transpose(), u);
}

double eval_covariance(const FpcaModel& model, double u, double v) {
  const Eigen::VectorXd pu = eval_basis(model.spec, u);
  const Eigen::VectorXd pv = eval_basis(model.spec, v);
  return pu.dot(model.coef_covariance * pv);
}

}  // namespace rramfda
