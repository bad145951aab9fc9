#pragma once

#include "gdm/gd_core.hpp"
#include "gdm/mesh.hpp"
#include "gdm/viscosity.hpp"

namespace gdm::hfv {

/// Hybrid finite volume gradient discretisation: one unknown per cell and per
/// face (vector-valued for velocity, scalar for temperature), one pressure per
/// cell. Nodes are ordered cells first, then faces.
///
/// On each sub-cell K_sigma (the cone from x_K over sigma, |K_sigma| = |sigma| d_{K,sigma} / d):
///
///     grad_{K,sigma} v = grad_K v + (sqrt(d) / d_{K,sigma}) R_{K,sigma}(v) (x) n_{K,sigma}
///     grad_K v         = 1/|K| sum_sigma |sigma| (v_sigma - v_K) (x) n_{K,sigma}
///     R_{K,sigma}(v)   = v_sigma - v_K - grad_K v (x_sigma - x_K)
///
/// Pi_D v = v_K and div_D v = trace(grad_K v) on K.
GradientDiscretisation build_hfv(const Mesh& mesh, const MeshGeometry& geometry);

/// Convenience overload computing the geometry.
GradientDiscretisation build_hfv(const Mesh& mesh);

/// Skew-symmetrised cell-reconstruction convection:
///   A_D(w; u, v) = 1/2 [a(w,u,v) - a(w,v,u)],  a(w,u,v) = sum_K |K| v_K . (grad_K u) w_K
///   B_D(u, s, r) = 1/2 [b(u,s,r) - b(u,r,s)],  b(u,s,r) = sum_K |K| r_K (u_K . grad_K s)
class Convection final : public ConvectionForms {
public:
    Convection(const Mesh& mesh, const MeshGeometry& geometry);

    [[nodiscard]] double velocity_form(const Vector& w, const Vector& u, const Vector& v) const override;
    [[nodiscard]] SparseMatrix velocity_matrix(const Vector& w) const override;
    [[nodiscard]] double scalar_form(const Vector& u, const Vector& s, const Vector& r) const override;
    [[nodiscard]] SparseMatrix scalar_matrix(const Vector& u) const override;

private:
    struct CellFace {
        Index node;    // face node
        Point flux;    // |sigma| n_{K,sigma}
    };
    [[nodiscard]] double unsymmetric_velocity(const Vector& w, const Vector& u, const Vector& v) const;
    [[nodiscard]] double unsymmetric_scalar(const Vector& u, const Vector& s, const Vector& r) const;

    std::vector<std::vector<CellFace>> cells_;
};

/// sum_K sum_sigma |K_sigma| V(tPi S|_K) grad_{K,sigma} u : grad_{K,sigma} v over
/// the full velocity layout. Throws Error{ViscosityRange} if V leaves [a1, a2].
SparseMatrix assemble_viscous(const GradientDiscretisation& gd, const Vector& scalar_dofs, const ViscosityModel& viscosity);

double conv_A(const GradientDiscretisation& gd, const Vector& w, const Vector& u, const Vector& v);
double conv_B(const GradientDiscretisation& gd, const Vector& u, const Vector& s, const Vector& r);

} // namespace gdm::hfv
