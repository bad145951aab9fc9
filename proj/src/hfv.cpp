#include "gdm/hfv.hpp"

#include "gdm/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

namespace gdm::hfv {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

Index face_node(const Mesh& mesh, Index face) { return mesh.num_cells() + face; }

} // namespace

GradientDiscretisation build_hfv(const Mesh& mesh, const MeshGeometry& geometry)
{
    constexpr int d = 2;
    const Index nc = mesh.num_cells();
    const Index nf = mesh.num_faces();
    const Index nodes = nc + nf;

    GradientDiscretisation gd;
    gd.dimension = d;
    gd.pressure_size = nc;

    DofLayout layout;
    layout.nodes.reserve(static_cast<std::size_t>(nodes));
    layout.on_boundary.reserve(static_cast<std::size_t>(nodes));
    for (Index c = 0; c < nc; ++c) {
        layout.nodes.push_back(geometry.cell_center[static_cast<std::size_t>(c)]);
        layout.on_boundary.push_back(false);
    }
    for (Index f = 0; f < nf; ++f) {
        layout.nodes.push_back(geometry.face_center[static_cast<std::size_t>(f)]);
        layout.on_boundary.push_back(mesh.faces()[static_cast<std::size_t>(f)].is_boundary());
    }
    gd.scalar = layout;
    gd.scalar.components = 1;
    gd.scalar.finalize();
    gd.velocity = std::move(layout);
    gd.velocity.components = d;
    gd.velocity.finalize();

    Index points = 0;
    for (Index c = 0; c < nc; ++c)
        points += static_cast<Index>(mesh.cell_faces(c).size());

    Triplets pi_u, pi_s, chi, div, grad_u, grad_s;
    Vector cell_w(nc), cell_w_u(d * nc), point_w_u(d * d * points), point_w_s(d * points);
    gd.gradient_point_value_row.reserve(static_cast<std::size_t>(points));

    const double stab = std::sqrt(static_cast<double>(d));
    Index s = 0;
    for (Index c = 0; c < nc; ++c) {
        const auto cu = static_cast<std::size_t>(c);
        const double vol = geometry.cell_volume[cu];
        const Point& xk = geometry.cell_center[cu];
        const auto& faces = mesh.cell_faces(c);
        const auto m = static_cast<Index>(faces.size());

        cell_w[c] = vol;
        gd.value_points.push_back(xk);
        chi.emplace_back(c, c, 1.0);
        pi_s.emplace_back(c, c, 1.0);
        for (int j = 0; j < d; ++j) {
            pi_u.emplace_back(d * c + j, d * c + j, 1.0);
            cell_w_u[d * c + j] = vol;
        }

        // Local stencil over nodes [K, sigma_1, ..., sigma_m].
        std::vector<Index> local(static_cast<std::size_t>(m) + 1);
        local[0] = c;
        Eigen::MatrixXd gk = Eigen::MatrixXd::Zero(d, m + 1);
        for (Index k = 0; k < m; ++k) {
            const auto f = static_cast<std::size_t>(faces[static_cast<std::size_t>(k)]);
            local[static_cast<std::size_t>(k) + 1] = face_node(mesh, static_cast<Index>(f));
            const Point flux = geometry.face_measure[f] * geometry.outward_normal(mesh, c, static_cast<std::size_t>(k)) / vol;
            gk.col(k + 1) += flux;
            gk.col(0) -= flux;
        }

        for (int i = 0; i < d; ++i)
            for (Index l = 0; l <= m; ++l)
                if (gk(i, l) != 0.0)
                    div.emplace_back(c, d * local[static_cast<std::size_t>(l)] + i, gk(i, l));

        for (Index k = 0; k < m; ++k, ++s) {
            const auto f = static_cast<std::size_t>(faces[static_cast<std::size_t>(k)]);
            const Point n = geometry.outward_normal(mesh, c, static_cast<std::size_t>(k));
            const double dist = geometry.face_distance[cu][static_cast<std::size_t>(k)];
            const Point dx = geometry.face_center[f] - xk;

            Eigen::RowVectorXd residual = -(dx.transpose() * gk);
            residual[0] -= 1.0;
            residual[k + 1] += 1.0;
            const Eigen::MatrixXd gsub = gk + (stab / dist) * n * residual;

            const double sub_volume = geometry.face_measure[f] * dist / d;
            gd.gradient_point_value_row.push_back(c);
            for (int i = 0; i < d; ++i) {
                point_w_s[d * s + i] = sub_volume;
                for (int j = 0; j < d; ++j)
                    point_w_u[d * d * s + d * j + i] = sub_volume;
                for (Index l = 0; l <= m; ++l) {
                    const double a = gsub(i, l);
                    if (a == 0.0)
                        continue;
                    const Index node = local[static_cast<std::size_t>(l)];
                    grad_s.emplace_back(d * s + i, node, a);
                    for (int j = 0; j < d; ++j)
                        grad_u.emplace_back(d * d * s + d * j + i, d * node + j, a);
                }
            }
        }
    }

    auto make = [](Index rows, Index cols, const Triplets& t, Vector w) {
        Reconstruction r;
        r.matrix.resize(rows, cols);
        r.matrix.setFromTriplets(t.begin(), t.end());
        r.weights = std::move(w);
        return r;
    };
    gd.velocity_value = make(d * nc, d * nodes, pi_u, cell_w_u);
    gd.velocity_gradient = make(d * d * points, d * nodes, grad_u, point_w_u);
    gd.divergence = make(nc, d * nodes, div, cell_w);
    gd.pressure_value = make(nc, nc, chi, cell_w);
    gd.scalar_value = make(nc, nodes, pi_s, cell_w);
    gd.scalar_gradient = make(d * points, nodes, grad_s, point_w_s);
    gd.convection = std::make_shared<Convection>(mesh, geometry);
    return gd;
}

GradientDiscretisation build_hfv(const Mesh& mesh) { return build_hfv(mesh, compute_geometry(mesh)); }

Convection::Convection(const Mesh& mesh, const MeshGeometry& geometry)
{
    cells_.resize(static_cast<std::size_t>(mesh.num_cells()));
    for (Index c = 0; c < mesh.num_cells(); ++c) {
        const auto& faces = mesh.cell_faces(c);
        auto& out = cells_[static_cast<std::size_t>(c)];
        for (std::size_t k = 0; k < faces.size(); ++k) {
            const auto f = static_cast<std::size_t>(faces[k]);
            out.push_back({face_node(mesh, faces[k]), geometry.face_measure[f] * geometry.outward_normal(mesh, c, k)});
        }
    }
}

double Convection::unsymmetric_velocity(const Vector& w, const Vector& u, const Vector& v) const
{
    double total = 0.0;
    for (std::size_t c = 0; c < cells_.size(); ++c) {
        const auto k = static_cast<Index>(c);
        const Point wk = w.segment<2>(2 * k);
        const Point uk = u.segment<2>(2 * k);
        Point transported = Point::Zero(); // |K| (grad_K u) w_K
        for (const auto& cf : cells_[c])
            transported += cf.flux.dot(wk) * (u.segment<2>(2 * cf.node) - uk);
        total += transported.dot(v.segment<2>(2 * k));
    }
    return total;
}

double Convection::velocity_form(const Vector& w, const Vector& u, const Vector& v) const
{
    return 0.5 * (unsymmetric_velocity(w, u, v) - unsymmetric_velocity(w, v, u));
}

SparseMatrix Convection::velocity_matrix(const Vector& w) const
{
    Triplets t;
    for (std::size_t c = 0; c < cells_.size(); ++c) {
        const auto k = static_cast<Index>(c);
        const Point wk = w.segment<2>(2 * k);
        for (const auto& cf : cells_[c]) {
            const double a = 0.5 * cf.flux.dot(wk);
            if (a == 0.0)
                continue;
            for (Index j = 0; j < 2; ++j) {
                const Index rk = 2 * k + j;
                const Index rs = 2 * cf.node + j;
                // 1/2 (T - T^T) with T(rk, rs) = a, T(rk, rk) = -a
                t.emplace_back(rk, rs, a);
                t.emplace_back(rs, rk, -a);
            }
        }
    }
    const Index n = w.size();
    SparseMatrix m(n, n);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

double Convection::unsymmetric_scalar(const Vector& u, const Vector& s, const Vector& r) const
{
    double total = 0.0;
    for (std::size_t c = 0; c < cells_.size(); ++c) {
        const auto k = static_cast<Index>(c);
        const Point uk = u.segment<2>(2 * k);
        double transported = 0.0;
        for (const auto& cf : cells_[c])
            transported += cf.flux.dot(uk) * (s[cf.node] - s[k]);
        total += transported * r[k];
    }
    return total;
}

double Convection::scalar_form(const Vector& u, const Vector& s, const Vector& r) const
{
    return 0.5 * (unsymmetric_scalar(u, s, r) - unsymmetric_scalar(u, r, s));
}

SparseMatrix Convection::scalar_matrix(const Vector& u) const
{
    Triplets t;
    Index n = 0;
    for (std::size_t c = 0; c < cells_.size(); ++c) {
        const auto k = static_cast<Index>(c);
        const Point uk = u.segment<2>(2 * k);
        for (const auto& cf : cells_[c]) {
            n = std::max(n, cf.node + 1);
            const double a = 0.5 * cf.flux.dot(uk);
            if (a == 0.0)
                continue;
            t.emplace_back(k, cf.node, a);
            t.emplace_back(cf.node, k, -a);
        }
    }
    n = std::max(n, static_cast<Index>(u.size() / 2));
    SparseMatrix m(n, n);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

SparseMatrix assemble_viscous(const GradientDiscretisation& gd, const Vector& scalar_dofs, const ViscosityModel& viscosity)
{
    const Vector cell_values = gd.scalar_value.apply(scalar_dofs);
    const int block = gd.dimension * gd.dimension;
    Vector factor(gd.velocity_gradient.matrix.rows());
    for (Index s = 0; s < gd.num_gradient_points(); ++s) {
        const double arg = cell_values[gd.gradient_point_value_row[static_cast<std::size_t>(s)]];
        const double v = viscosity(arg);
        if (!(v >= viscosity.lower && v <= viscosity.upper))
            throw Error(ErrorKind::ViscosityRange, "V(" + std::to_string(arg) + ") = " + std::to_string(v) +
                                                       " outside [" + std::to_string(viscosity.lower) + ", " +
                                                       std::to_string(viscosity.upper) + "]");
        factor.segment(block * s, block).setConstant(v);
    }
    return gd.velocity_gradient.weighted_gram(factor);
}

double conv_A(const GradientDiscretisation& gd, const Vector& w, const Vector& u, const Vector& v)
{
    return gd.convection->velocity_form(w, u, v);
}

double conv_B(const GradientDiscretisation& gd, const Vector& u, const Vector& s, const Vector& r)
{
    return gd.convection->scalar_form(u, s, r);
}

} // namespace gdm::hfv
