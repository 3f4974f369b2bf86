#pragma once

#include <cstddef>
#include <vector>

#include "ensfts/matrix.hpp"

namespace ensfts {

// Sample (N-1) covariance between the columns of `data`.
// Throws InvalidInput when data has fewer than 2 rows.
Matrix covariance_matrix(const Matrix& data);

struct EigenDecomposition {
  std::vector<double> values;  // descending
  Matrix vectors;              // column i pairs with values[i]; unit norm
  int sweeps = 0;
};

struct JacobiOptions {
  // Convergence when the off-diagonal Frobenius norm drops below
  // tolerance * ||m||_F.
  double tolerance = 1e-12;
  int max_sweeps = 100;
};

// Cyclic Jacobi rotation eigensolver for real symmetric matrices.
// Throws InvalidInput for non-square or asymmetric (1e-9) input and
// NumericalFailure when max_sweeps is exhausted.
EigenDecomposition sym_eigen(const Matrix& m, const JacobiOptions& options = {});

struct EigenPair {
  double value = 0.0;
  std::vector<double> vector;
};

// Largest-eigenvalue pair of a symmetric matrix via restarted Lanczos with
// full reorthogonalisation. Only touches `m` through matrix-vector products,
// which keeps it usable where a dense Jacobi solve would be too slow.
EigenPair leading_eigenpair(const Matrix& m, double tolerance = 1e-10, int max_restarts = 50);

// Flips `v` so that its largest-magnitude entry is positive (ties go to the
// lowest index). Returns true when the sign was flipped.
bool canonicalize_sign(std::vector<double>& v);

}  // namespace ensfts
