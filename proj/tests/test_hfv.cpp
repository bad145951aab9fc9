#include "gdm/errors.hpp"
#include "gdm/hfv.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace gdm {
namespace {

using testing::random_homogeneous;
using testing::random_vector;

std::vector<Mesh> sample_meshes() { return {build_triangular(3), build_distorted(4, 0.3), build_distorted(3, 0.44)}; }

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

TEST(HybridGradient, ConstantsHaveZeroGradient)
{
    for (const Mesh& mesh : sample_meshes()) {
        const auto gd = hfv::build_hfv(mesh);
        const Vector v = interpolate_velocity(gd, [](const Point&) { return Point(0.7, -1.3); });
        EXPECT_LT(gd.velocity_gradient.apply(v).cwiseAbs().maxCoeff(), 1e-13);
        EXPECT_LT(gd.divergence.apply(v).cwiseAbs().maxCoeff(), 1e-13);
    }
}

TEST(HybridGradient, AffineFieldsHaveExactGradientAndDivergence)
{
    Eigen::Matrix2d a;
    a << 0.3, -1.2, 2.5, 0.8;
    const Point b(0.4, -0.1);
    for (const Mesh& mesh : sample_meshes()) {
        const auto gd = hfv::build_hfv(mesh);
        const Vector v = interpolate_velocity(gd, [&](const Point& x) { return Point(a * x + b); });
        const Vector grad = gd.velocity_gradient.apply(v);
        ASSERT_EQ(grad.size(), 4 * gd.num_gradient_points());
        for (Index s = 0; s < gd.num_gradient_points(); ++s)
            for (int j = 0; j < 2; ++j)
                for (int i = 0; i < 2; ++i)
                    EXPECT_NEAR(grad[4 * s + 2 * j + i], a(j, i), 1e-12);
        EXPECT_LT((gd.divergence.apply(v).array() - a.trace()).abs().maxCoeff(), 1e-12);
    }
}

TEST(HybridGradient, SubCellWeightsPartitionEachCell)
{
    const Mesh mesh = build_distorted(4, 0.3);
    const auto gd = hfv::build_hfv(mesh);
    EXPECT_NEAR(gd.scalar_gradient.weights.sum(), 2.0 * 4.0, 1e-12); // two rows per sub-cell
    EXPECT_NEAR(gd.scalar_value.weights.sum(), 4.0, 1e-12);
}

TEST(Convection, VelocityFormIsSkewSymmetric)
{
    std::mt19937_64 rng(1);
    for (const Mesh& mesh : sample_meshes()) {
        const auto gd = hfv::build_hfv(mesh);
        for (int trial = 0; trial < 50; ++trial) {
            const Vector w = random_vector(rng, gd.velocity.size());
            const Vector u = random_vector(rng, gd.velocity.size());
            const Vector v = random_vector(rng, gd.velocity.size());
            EXPECT_NEAR(hfv::conv_A(gd, u, u, u), 0.0, 1e-13);
            EXPECT_NEAR(hfv::conv_A(gd, w, u, v), -hfv::conv_A(gd, w, v, u), 1e-13);
            EXPECT_EQ(hfv::conv_A(gd, Vector::Zero(u.size()), u, v), 0.0);
        }
    }
}

TEST(Convection, ScalarFormIsSkewSymmetric)
{
    std::mt19937_64 rng(2);
    for (const Mesh& mesh : sample_meshes()) {
        const auto gd = hfv::build_hfv(mesh);
        for (int trial = 0; trial < 50; ++trial) {
            const Vector u = random_vector(rng, gd.velocity.size());
            const Vector s = random_vector(rng, gd.scalar.size());
            const Vector r = random_vector(rng, gd.scalar.size());
            EXPECT_NEAR(hfv::conv_B(gd, u, s, s), 0.0, 1e-13);
            EXPECT_NEAR(hfv::conv_B(gd, u, s, r), -hfv::conv_B(gd, u, r, s), 1e-13);
        }
    }
}

TEST(Convection, FormsAreLinearInTheTestFunction)
{
    std::mt19937_64 rng(3);
    const auto gd = hfv::build_hfv(build_distorted(4, 0.3));
    const double alpha = -1.7;
    for (int trial = 0; trial < 20; ++trial) {
        const Vector u = random_vector(rng, gd.velocity.size());
        const Vector v1 = random_vector(rng, gd.velocity.size());
        const Vector v2 = random_vector(rng, gd.velocity.size());
        EXPECT_NEAR(hfv::conv_A(gd, u, u, alpha * v1 + v2), alpha * hfv::conv_A(gd, u, u, v1) + hfv::conv_A(gd, u, u, v2), 1e-13);
        const Vector s = random_vector(rng, gd.scalar.size());
        const Vector r1 = random_vector(rng, gd.scalar.size());
        const Vector r2 = random_vector(rng, gd.scalar.size());
        EXPECT_NEAR(hfv::conv_B(gd, u, s, alpha * r1 + r2), alpha * hfv::conv_B(gd, u, s, r1) + hfv::conv_B(gd, u, s, r2), 1e-13);
    }
}

TEST(Convection, MatricesReproduceTheForms)
{
    std::mt19937_64 rng(4);
    for (const Mesh& mesh : sample_meshes()) {
        const auto gd = hfv::build_hfv(mesh);
        const Vector w = random_vector(rng, gd.velocity.size());
        const Vector u = random_vector(rng, gd.velocity.size());
        const Vector v = random_vector(rng, gd.velocity.size());
        const SparseMatrix a = gd.convection->velocity_matrix(w);
        EXPECT_NEAR(v.dot(a * u), hfv::conv_A(gd, w, u, v), 1e-13);
        EXPECT_LT(max_abs(Eigen::MatrixXd(a) + Eigen::MatrixXd(SparseMatrix(a.transpose()))), 1e-15);

        const Vector s = random_vector(rng, gd.scalar.size());
        const Vector r = random_vector(rng, gd.scalar.size());
        const SparseMatrix b = gd.convection->scalar_matrix(w);
        EXPECT_NEAR(r.dot(b * s), hfv::conv_B(gd, w, s, r), 1e-13);
    }
}

TEST(Convection, CellReconstructionOfAdvection)
{
    // For affine fields the unsymmetrised part equals |K| w_K . grad u . v_K and the
    // skew part is its antisymmetrisation; check against that closed form.
    const Mesh mesh = build_triangular(2);
    const MeshGeometry geometry = compute_geometry(mesh);
    const auto gd = hfv::build_hfv(mesh, geometry);
    const Vector w = interpolate_velocity(gd, [](const Point&) { return Point(1.0, 0.5); });
    const Vector u = interpolate_velocity(gd, [](const Point& x) { return Point(x.x(), 0.0); });
    const Vector v = interpolate_velocity(gd, [](const Point&) { return Point(1.0, 0.0); });
    // a(w,u,v) = sum_K |K| (w . grad u_1) v_1 = 4, a(w,v,u) = 0.
    EXPECT_NEAR(hfv::conv_A(gd, w, u, v), 0.5 * 4.0, 1e-13);
}

TEST(Convection, ScalarFormIsBounded)
{
    std::mt19937_64 rng(5);
    for (int n : {2, 4, 8}) {
        const auto gd = hfv::build_hfv(build_distorted(n, 0.3));
        double beta = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const Vector u = random_homogeneous(rng, gd.velocity);
            const Vector s = random_homogeneous(rng, gd.scalar);
            const Vector r = random_homogeneous(rng, gd.scalar);
            const double denom = gd.velocity_gradient.norm(u) * gd.scalar_gradient.norm(s) * gd.scalar_gradient.norm(r);
            beta = std::max(beta, std::abs(hfv::conv_B(gd, u, s, r)) / denom);
        }
        EXPECT_TRUE(std::isfinite(beta));
        EXPECT_LT(beta, 10.0);
    }
}

TEST(Viscous, UnitViscosityGivesTheGradientGram)
{
    const auto gd = hfv::build_hfv(build_distorted(3, 0.3));
    std::mt19937_64 rng(6);
    const Vector s = random_vector(rng, gd.scalar.size());
    const Eigen::MatrixXd diff =
        Eigen::MatrixXd(hfv::assemble_viscous(gd, s, ViscosityModel::constant(1.0))) - Eigen::MatrixXd(gd.velocity_gradient.gram());
    EXPECT_LT(max_abs(diff), 1e-14);
}

TEST(Viscous, SqrtModelAtZeroTemperatureIsThreeTimesTheGram)
{
    const auto gd = hfv::build_hfv(build_triangular(3));
    const Eigen::MatrixXd diff = Eigen::MatrixXd(hfv::assemble_viscous(gd, Vector::Zero(gd.scalar.size()), ViscosityModel::sqrt_coupled())) -
                                 3.0 * Eigen::MatrixXd(gd.velocity_gradient.gram());
    EXPECT_LT(max_abs(diff), 1e-13);
}

TEST(Viscous, SymmetricAndCoercive)
{
    std::mt19937_64 rng(7);
    const ViscosityModel v = ViscosityModel::sqrt_coupled();
    for (const Mesh& mesh : sample_meshes()) {
        const auto gd = hfv::build_hfv(mesh);
        const Vector s = 3.0 * random_vector(rng, gd.scalar.size());
        const SparseMatrix k = hfv::assemble_viscous(gd, s, v);
        const Eigen::MatrixXd dk(k);
        EXPECT_LT(max_abs(dk - dk.transpose()), 1e-14);
        const SparseMatrix g = gd.velocity_gradient.gram();
        for (int trial = 0; trial < 100; ++trial) {
            const Vector u = random_vector(rng, gd.velocity.size());
            EXPECT_GE(u.dot(k * u), v.lower * u.dot(g * u) * (1.0 - 1e-14));
        }
    }
}

TEST(Viscous, OutOfRangeViscosityIsReported)
{
    const auto gd = hfv::build_hfv(build_triangular(2));
    const Vector s = Vector::Constant(gd.scalar.size(), 50.0);
    try {
        (void)hfv::assemble_viscous(gd, s, ViscosityModel::sqrt_coupled(10.0));
        FAIL() << "expected ViscosityRange";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ViscosityRange);
    }
}

TEST(Coupling, MatchesCellwiseDivergence)
{
    std::mt19937_64 rng(8);
    const Mesh mesh = build_distorted(3, 0.3);
    const MeshGeometry geometry = compute_geometry(mesh);
    const auto gd = hfv::build_hfv(mesh, geometry);
    const SparseMatrix b = gd.coupling();
    for (int trial = 0; trial < 10; ++trial) {
        const Vector q = random_vector(rng, gd.pressure_size);
        const Vector v = random_vector(rng, gd.velocity.size());
        // div_K v = 1/|K| sum_sigma |sigma| (v_sigma - v_K) . n_{K,sigma}
        double expected = 0.0;
        for (Index c = 0; c < mesh.num_cells(); ++c) {
            const auto& faces = mesh.cell_faces(c);
            double flux = 0.0;
            for (std::size_t k = 0; k < faces.size(); ++k) {
                const Index node = mesh.num_cells() + faces[k];
                const Point vs(v[2 * node], v[2 * node + 1]);
                const Point vk(v[2 * c], v[2 * c + 1]);
                flux += geometry.face_measure[static_cast<std::size_t>(faces[k])] * (vs - vk).dot(geometry.outward_normal(mesh, c, k));
            }
            expected += q[c] * flux;
        }
        EXPECT_NEAR(q.dot(b * v), expected, 1e-12);
    }
}

} // namespace
} // namespace gdm
