#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "jshm/common.hpp"
#include "jshm/model.hpp"

namespace jshm {

using Matrix12d = Eigen::Matrix<double, 12, 12>;

struct ElementMatrices {
    Matrix12d stiffness;  // global coordinates, damage-scaled
    Matrix12d mass;       // global coordinates, never damage-scaled
};

namespace detail {

/// Local axes of a two-node member: x along the member; the auxiliary
/// vector is global z, or global x for near-vertical members.
inline Eigen::Matrix3d local_axes(const Eigen::Vector3d& pa, const Eigen::Vector3d& pb) {
    const Eigen::Vector3d dx = pb - pa;
    const double len = dx.norm();
    if (!(len > 0.0)) throw ConfigError("element: zero length");
    const Eigen::Vector3d x = dx / len;
    Eigen::Vector3d ref(0.0, 0.0, 1.0);
    if (std::abs(x.dot(ref)) > 0.99) ref = Eigen::Vector3d(1.0, 0.0, 0.0);
    const Eigen::Vector3d y = ref.cross(x).normalized();
    const Eigen::Vector3d z = x.cross(y);
    Eigen::Matrix3d lam;
    lam.row(0) = x;
    lam.row(1) = y;
    lam.row(2) = z;
    return lam;
}

/// 12-DOF local stiffness of a 3D Euler-Bernoulli member.
/// DOF order per node: (ux, uy, uz, rx, ry, rz), x axial.
inline Matrix12d local_stiffness(double EA, double GJ, double EIy, double EIz, double L) {
    Matrix12d k = Matrix12d::Zero();
    const double L2 = L * L, L3 = L2 * L;

    const double a = EA / L;
    k(0, 0) = k(6, 6) = a;
    k(0, 6) = k(6, 0) = -a;

    const double t = GJ / L;
    k(3, 3) = k(9, 9) = t;
    k(3, 9) = k(9, 3) = -t;

    // bending in the x-y plane (uy, rz)
    {
        const double c = EIz / L3;
        const int i[4] = {1, 5, 7, 11};
        const double kb[4][4] = {{12 * c, 6 * c * L, -12 * c, 6 * c * L},
                                 {6 * c * L, 4 * c * L2, -6 * c * L, 2 * c * L2},
                                 {-12 * c, -6 * c * L, 12 * c, -6 * c * L},
                                 {6 * c * L, 2 * c * L2, -6 * c * L, 4 * c * L2}};
        for (int r = 0; r < 4; ++r)
            for (int s = 0; s < 4; ++s) k(i[r], i[s]) = kb[r][s];
    }
    // bending in the x-z plane (uz, ry); rotation coupling flips sign
    {
        const double c = EIy / L3;
        const int i[4] = {2, 4, 8, 10};
        const double kb[4][4] = {{12 * c, -6 * c * L, -12 * c, -6 * c * L},
                                 {-6 * c * L, 4 * c * L2, 6 * c * L, 2 * c * L2},
                                 {-12 * c, 6 * c * L, 12 * c, 6 * c * L},
                                 {-6 * c * L, 2 * c * L2, 6 * c * L, 4 * c * L2}};
        for (int r = 0; r < 4; ++r)
            for (int s = 0; s < 4; ++s) k(i[r], i[s]) = kb[r][s];
    }
    return k;
}

/// Consistent mass including rotary-inertia terms; rhoIx is the polar
/// inertia per unit length, rg2 the radius of gyration squared I/A.
inline Matrix12d local_mass(double rhoA, double rhoIx, double rg2y, double rg2z, double L) {
    Matrix12d m = Matrix12d::Zero();
    const double L2 = L * L;

    const double ax = rhoA * L;
    m(0, 0) = m(6, 6) = ax / 3.0;
    m(0, 6) = m(6, 0) = ax / 6.0;

    const double tj = rhoIx * L;
    m(3, 3) = m(9, 9) = tj / 3.0;
    m(3, 9) = m(9, 3) = tj / 6.0;

    auto fill_bending = [&](const int idx[4], double rg2, double sign) {
        const double c = rhoA * L;
        const double r = rg2 / L2;
        double mb[4][4] = {
            {13.0 / 35 + 6.0 / 5 * r, (11 * L / 210 + L / 10 * r), 9.0 / 70 - 6.0 / 5 * r, -(13 * L / 420 - L / 10 * r)},
            {0, (L2 / 105 + 2 * L2 / 15 * r), (13 * L / 420 - L / 10 * r), -(L2 / 140 + L2 / 30 * r)},
            {0, 0, 13.0 / 35 + 6.0 / 5 * r, -(11 * L / 210 + L / 10 * r)},
            {0, 0, 0, (L2 / 105 + 2 * L2 / 15 * r)}};
        for (int a2 = 0; a2 < 4; ++a2)
            for (int b2 = a2; b2 < 4; ++b2) {
                double v = c * mb[a2][b2];
                // rotation-coupled entries change sign between bending planes
                const bool rot_a = (a2 == 1 || a2 == 3), rot_b = (b2 == 1 || b2 == 3);
                if (rot_a != rot_b) v *= sign;
                m(idx[a2], idx[b2]) += v;
                if (a2 != b2) m(idx[b2], idx[a2]) += v;
            }
    };
    const int iy[4] = {1, 5, 7, 11};  // x-y plane (uy, rz)
    const int iz[4] = {2, 4, 8, 10};  // x-z plane (uz, ry)
    fill_bending(iy, rg2z, +1.0);
    fill_bending(iz, rg2y, -1.0);
    return m;
}

inline Matrix12d transform_to_global(const Matrix12d& local, const Eigen::Matrix3d& lam) {
    Matrix12d T = Matrix12d::Zero();
    for (int b = 0; b < 4; ++b) T.block<3, 3>(3 * b, 3 * b) = lam;
    return T.transpose() * local * T;
}

}  // namespace detail

/// Damage-scaled global element matrices: stiffness is multiplied by
/// (1 - alpha); mass is unchanged.
inline ElementMatrices element_matrices(const Eigen::Vector3d& pa, const Eigen::Vector3d& pb,
                                        const Material& mat, const PipeSection& sec,
                                        double alpha = 0.0) {
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw ConfigError("element: damage ratio must lie in [0, 1)");
    const SectionProperties p = section_properties(sec);
    const double L = (pb - pa).norm();
    const Eigen::Matrix3d lam = detail::local_axes(pa, pb);

    const double E = mat.elastic_modulus, G = mat.shear_modulus(), rho = mat.density;
    Matrix12d k_local =
        detail::local_stiffness(E * p.area, G * p.torsion_constant, E * p.bending_inertia,
                                E * p.bending_inertia, L);
    const double rg2 = p.bending_inertia / p.area;
    Matrix12d m_local = detail::local_mass(rho * p.area, rho * p.torsion_constant, rg2, rg2, L);

    ElementMatrices out;
    out.stiffness = (1.0 - alpha) * detail::transform_to_global(k_local, lam);
    out.mass = detail::transform_to_global(m_local, lam);
    out.stiffness = 0.5 * (out.stiffness + out.stiffness.transpose()).eval();
    out.mass = 0.5 * (out.mass + out.mass.transpose()).eval();
    return out;
}

inline ElementMatrices element_matrices(const JacketModel& model, int element_index,
                                        double alpha = 0.0) {
    const ElementRef& e = model.elements[element_index];
    return element_matrices(model.nodes[e.node_a], model.nodes[e.node_b],
                            model.materials[e.material_id], model.sections[e.section_id], alpha);
}

}  // namespace jshm
