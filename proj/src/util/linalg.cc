//
// Copyright 2026 The fllab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "fllab/util/linalg.h"

#include <Eigen/Eigenvalues>

#include "fllab/util/error.h"

namespace fllab {

CovarianceSpectrum CovarianceEigen(const RowMatrix& samples, bool want_directions) {
  const Eigen::Index m = samples.rows(), d = samples.cols();
  if (m < 2) throw InvalidArgument("covariance needs at least two samples");
  const Eigen::RowVectorXd mean = samples.colwise().mean();
  const RowMatrix centered = samples.rowwise() - mean;
  const double norm = 1.0 / static_cast<double>(m - 1);
  CovarianceSpectrum out;
  const auto opts = want_directions ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly;
  if (m < d) {
    // Nonzero spectrum of C^T C / (m-1) equals that of C C^T / (m-1).
    Eigen::MatrixXd gram = (centered * centered.transpose()) * norm;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, opts);
    out.eigenvalues = eig.eigenvalues().reverse();
    if (want_directions) {
      Eigen::MatrixXd v = eig.eigenvectors().rowwise().reverse();
      out.directions = centered.transpose() * v;
      for (Eigen::Index j = 0; j < out.directions.cols(); ++j) {
        const double n = out.directions.col(j).norm();
        if (n > 0) out.directions.col(j) /= n;
      }
    }
  } else {
    Eigen::MatrixXd cov = (centered.transpose() * centered) * norm;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, opts);
    out.eigenvalues = eig.eigenvalues().reverse();
    if (want_directions) out.directions = eig.eigenvectors().rowwise().reverse();
  }
  out.eigenvalues = out.eigenvalues.cwiseMax(0.0);
  return out;
}

}  // namespace fllab
