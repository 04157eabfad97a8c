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

#ifndef FLLAB_UTIL_LINALG_H_
#define FLLAB_UTIL_LINALG_H_

#include <Eigen/Core>

namespace fllab {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Eigen-decomposition of the sample covariance of the rows of `samples`
// (m x d), computed on whichever of the m x m Gram matrix or the d x d
// covariance is smaller. Eigenvalues are descending; `directions` holds the
// matching unit eigenvectors in R^d as columns (only the leading
// min(m, d) of them).
struct CovarianceSpectrum {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd directions;
};
CovarianceSpectrum CovarianceEigen(const RowMatrix& samples, bool want_directions);

}  // namespace fllab

#endif  // FLLAB_UTIL_LINALG_H_
