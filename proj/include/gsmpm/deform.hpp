#pragma once

#include "gsmpm/math3d.hpp"
#include "gsmpm/setup.hpp"
#include "gsmpm/types.hpp"

namespace gsmpm {

// Sigma_t = F Sigma_0 F^T, symmetrized. Sigma_0 must be the initial (t = 0)
// covariance and F the accumulated deformation gradient; F already integrates
// the whole history, so applying it incrementally would compound deformation.
Mat3 deform_covariance(const Mat3& sigma0, const Mat3& f_total);

struct CovarianceDecomposition {
    Mat3 rotation;   // det = +1
    Vec3 scales;     // sqrt(eigenvalues), descending
    int clamped_eigenvalues = 0;  // eigenvalues raised to the 1e-12 floor
};

// Eigendecomposition Sigma = Q diag(S^2) Q^T under the documented
// conventions (descending eigenvalues, det +1, canonical column signs,
// R = I for isotropic input). Throws ValidationError for asymmetric or
// non-finite input.
CovarianceDecomposition decompose_covariance(const Mat3& sigma);

// Full kinematics-to-kernel map: world position via the inverse transform,
// covariance deformed by the particle's F and refactored into rotation
// quaternion + scales; opacity and color pass through unchanged.
GaussianKernel deform_kernel(const GaussianKernel& source, const Vec3& position_sim,
                             const Mat3& f_total, const WorldTransform& transform);

}  // namespace gsmpm
