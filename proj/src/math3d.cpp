#include "gsmpm/math3d.hpp"

#include "gsmpm/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace gsmpm {

double Quaternion::norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

Quaternion Quaternion::normalized() const {
    const double n = norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw ValidationError("cannot normalize quaternion with zero or non-finite norm");
    }
    return {w / n, x / n, y / n, z / n};
}

Mat3 quaternion_to_matrix(const Quaternion& q) {
    const double w = q.w, x = q.x, y = q.y, z = q.z;
    Mat3 r;
    r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
        2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
        2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return r;
}

namespace {

Quaternion canonical_sign(Quaternion q) {
    double lead = q.w;
    if (lead == 0.0) lead = q.x;
    if (lead == 0.0) lead = q.y;
    if (lead == 0.0) lead = q.z;
    if (lead < 0.0) return {-q.w, -q.x, -q.y, -q.z};
    return q;
}

}  // namespace

Quaternion rotation_to_quaternion(const Mat3& r) {
    if (!r.allFinite()) {
        throw ValidationError("rotation_to_quaternion: non-finite matrix");
    }
    const double ortho = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
    if (ortho > 1e-6) {
        throw ValidationError("rotation_to_quaternion: matrix is not orthonormal (|R^T R - I| = " +
                              std::to_string(ortho) + ")");
    }
    if (std::abs(r.determinant() - 1.0) > 1e-6) {
        throw ValidationError("rotation_to_quaternion: determinant is not +1");
    }

    Quaternion q;
    const double trace = r(0, 0) + r(1, 1) + r(2, 2);
    if (trace >= r(0, 0) && trace >= r(1, 1) && trace >= r(2, 2)) {
        const double s = std::sqrt(1.0 + trace) * 2.0;  // 4w
        q.w = 0.25 * s;
        q.x = (r(2, 1) - r(1, 2)) / s;
        q.y = (r(0, 2) - r(2, 0)) / s;
        q.z = (r(1, 0) - r(0, 1)) / s;
    } else if (r(0, 0) >= r(1, 1) && r(0, 0) >= r(2, 2)) {
        const double s = std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2)) * 2.0;  // 4x
        q.w = (r(2, 1) - r(1, 2)) / s;
        q.x = 0.25 * s;
        q.y = (r(0, 1) + r(1, 0)) / s;
        q.z = (r(0, 2) + r(2, 0)) / s;
    } else if (r(1, 1) >= r(2, 2)) {
        const double s = std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2)) * 2.0;  // 4y
        q.w = (r(0, 2) - r(2, 0)) / s;
        q.x = (r(0, 1) + r(1, 0)) / s;
        q.y = 0.25 * s;
        q.z = (r(1, 2) + r(2, 1)) / s;
    } else {
        const double s = std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1)) * 2.0;  // 4z
        q.w = (r(1, 0) - r(0, 1)) / s;
        q.x = (r(0, 2) + r(2, 0)) / s;
        q.y = (r(1, 2) + r(2, 1)) / s;
        q.z = 0.25 * s;
    }
    return canonical_sign(q.normalized());
}

void polar_decompose(const Mat3& f, Mat3& r_out, Mat3& s_out) {
    const double det = f.determinant();
    if (!(det > 0.0)) {
        throw ValidationError("polar_decompose requires det(F) > 0");
    }

    // Higham's scaled Newton iteration R <- (g R + (g R)^-T) / 2.
    Mat3 r = f;
    for (int iter = 0; iter < 64; ++iter) {
        const Mat3 r_inv_t = r.inverse().transpose();
        const double g = std::sqrt(std::sqrt(r_inv_t.squaredNorm() / r.squaredNorm()));
        const Mat3 next = 0.5 * (g * r + (1.0 / g) * r_inv_t);
        const double delta = (next - r).norm();
        r = next;
        if (delta < 1e-14 * r.norm()) break;
    }
    r_out = r;
    const Mat3 s = r.transpose() * f;
    s_out = 0.5 * (s + s.transpose());
}

void sym_eigen_descending(const Mat3& sigma, Mat3& q_out, Vec3& eigenvalues_out,
                          double eigenvalue_floor, int* clamped) {
    if (!sigma.allFinite()) {
        throw ValidationError("sym_eigen_descending: non-finite matrix");
    }

    const double scale = std::max(sigma.cwiseAbs().maxCoeff(), 1e-300);
    // Isotropic input short-circuits to the identity convention.
    const double iso = (sigma - (sigma.trace() / 3.0) * Mat3::Identity()).cwiseAbs().maxCoeff();
    if (iso <= 1e-13 * scale) {
        q_out = Mat3::Identity();
        double lam = sigma.trace() / 3.0;
        if (lam < eigenvalue_floor) {
            lam = eigenvalue_floor;
            if (clamped) *clamped += 3;
        }
        eigenvalues_out = Vec3::Constant(lam);
        return;
    }

    Eigen::SelfAdjointEigenSolver<Mat3> solver(sigma);
    if (solver.info() != Eigen::Success) {
        throw ValidationError("sym_eigen_descending: eigendecomposition failed to converge");
    }

    // Eigen sorts ascending; reverse to descending.
    Vec3 lam(solver.eigenvalues()(2), solver.eigenvalues()(1), solver.eigenvalues()(0));
    Mat3 q;
    q.col(0) = solver.eigenvectors().col(2);
    q.col(1) = solver.eigenvectors().col(1);
    q.col(2) = solver.eigenvectors().col(0);

    for (int i = 0; i < 3; ++i) {
        if (lam(i) < eigenvalue_floor) {
            lam(i) = eigenvalue_floor;
            if (clamped) ++*clamped;
        }
    }

    // Canonical column signs: make the dominant component of the first two
    // axes positive, then take the cross product so det(Q) = +1.
    for (int c = 0; c < 2; ++c) {
        int dominant = 0;
        q.col(c).cwiseAbs().maxCoeff(&dominant);
        if (q(dominant, c) < 0.0) q.col(c) = -q.col(c);
    }
    q.col(2) = q.col(0).cross(q.col(1));

    q_out = q;
    eigenvalues_out = lam;
}

}  // namespace gsmpm
