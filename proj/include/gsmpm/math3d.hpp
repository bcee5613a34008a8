#pragma once

#include "gsmpm/types.hpp"

namespace gsmpm {

Mat3 quaternion_to_matrix(const Quaternion& q);

// Shepperd's method: branch on the largest of the trace and the diagonal
// entries so every rotation regime stays well conditioned. The result is
// canonicalized to w >= 0 (if w == 0, first nonzero component positive).
// Throws ValidationError unless R^T R = I and det R = +1 within 1e-6.
Quaternion rotation_to_quaternion(const Mat3& R);

// F = R * S with R a rotation and S symmetric positive definite, computed by
// Higham's scaled Newton iteration. Requires det(F) > 0.
void polar_decompose(const Mat3& F, Mat3& R, Mat3& S);

// Eigendecomposition of a symmetric positive definite matrix with the
// conventions the 4D pipeline relies on: eigenvalues sorted descending,
// det(Q) = +1, column signs canonicalized, Q = I for isotropic input.
// Eigenvalues below `eigenvalue_floor` are clamped to it; `clamped` (when
// non-null) is incremented once per clamped eigenvalue.
void sym_eigen_descending(const Mat3& sigma, Mat3& q_out, Vec3& eigenvalues_out,
                          double eigenvalue_floor = 1e-12, int* clamped = nullptr);

}  // namespace gsmpm
