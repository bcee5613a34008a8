#include "gsmpm/deform.hpp"

#include "gsmpm/errors.hpp"

#include <cmath>

namespace gsmpm {

Mat3 deform_covariance(const Mat3& sigma0, const Mat3& f_total) {
    if (!sigma0.allFinite()) throw ValidationError("deform_covariance: non-finite covariance");
    if ((sigma0 - sigma0.transpose()).cwiseAbs().maxCoeff() >
        1e-9 * std::max(sigma0.cwiseAbs().maxCoeff(), 1e-300)) {
        throw ValidationError("deform_covariance: covariance is not symmetric");
    }
    if (!(f_total.determinant() > 0.0)) {
        throw ValidationError("deform_covariance requires det(F) > 0");
    }
    const Mat3 sigma = f_total * sigma0 * f_total.transpose();
    return 0.5 * (sigma + sigma.transpose());
}

CovarianceDecomposition decompose_covariance(const Mat3& sigma) {
    if (!sigma.allFinite()) throw ValidationError("decompose_covariance: non-finite input");
    const double scale = std::max(sigma.cwiseAbs().maxCoeff(), 1e-300);
    if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
        throw ValidationError("decompose_covariance: input is not symmetric within 1e-9");
    }

    CovarianceDecomposition out;
    Vec3 lambda;
    sym_eigen_descending(0.5 * (sigma + sigma.transpose()), out.rotation, lambda, 1e-12,
                         &out.clamped_eigenvalues);
    out.scales = lambda.cwiseSqrt();
    return out;
}

GaussianKernel deform_kernel(const GaussianKernel& source, const Vec3& position_sim,
                             const Mat3& f_total, const WorldTransform& transform) {
    // The domain map is a uniform scale + translation, so F measured in
    // simulation coordinates equals F in world coordinates and can act on
    // the world-space covariance directly.
    const Mat3 sigma_t = deform_covariance(source.covariance(), f_total);
    const CovarianceDecomposition dec = decompose_covariance(sigma_t);

    GaussianKernel out;
    out.position = transform.to_world(position_sim);
    out.rotation = rotation_to_quaternion(dec.rotation);
    out.scales = dec.scales;
    out.opacity = source.opacity;
    out.color = source.color;
    return out;
}

}  // namespace gsmpm
