#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace gdm {

using Index = std::ptrdiff_t;
using Point = Eigen::Vector2d;

inline constexpr Index no_cell = -1;

/// Edge of a 2D polygonal mesh. Vertices are ordered as traversed by cells[0]
/// (counterclockwise), so the outward normal of cells[0] is the right-hand normal.
struct Face {
    std::array<Index, 2> vertices{};
    std::array<Index, 2> cells{no_cell, no_cell};

    [[nodiscard]] bool is_boundary() const noexcept { return cells[1] == no_cell; }
};

/// Polygonal mesh: vertex coordinates, counterclockwise cells, and faces derived
/// from cell edges. Immutable after construction.
class Mesh {
public:
    /// Builds faces and validates topology. Throws Error{Parse} on bad indices,
    /// Error{Topology} when an edge is shared by more than two cells or twice
    /// with the same orientation.
    Mesh(std::vector<Point> vertices, std::vector<std::vector<Index>> cells);

    [[nodiscard]] int dimension() const noexcept { return 2; }
    [[nodiscard]] Index num_vertices() const noexcept { return static_cast<Index>(vertices_.size()); }
    [[nodiscard]] Index num_cells() const noexcept { return static_cast<Index>(cells_.size()); }
    [[nodiscard]] Index num_faces() const noexcept { return static_cast<Index>(faces_.size()); }

    [[nodiscard]] const std::vector<Point>& vertices() const noexcept { return vertices_; }
    [[nodiscard]] const std::vector<std::vector<Index>>& cells() const noexcept { return cells_; }
    [[nodiscard]] const std::vector<Face>& faces() const noexcept { return faces_; }

    /// Face indices of a cell, in the order of its edges (v0v1, v1v2, ...).
    [[nodiscard]] const std::vector<Index>& cell_faces(Index cell) const { return cell_faces_[static_cast<std::size_t>(cell)]; }

    /// +1 if the cell is faces[f].cells[0], -1 otherwise.
    [[nodiscard]] double orientation(Index cell, Index face) const;

    friend bool operator==(const Mesh& a, const Mesh& b)
    {
        return a.vertices_ == b.vertices_ && a.cells_ == b.cells_;
    }

private:
    std::vector<Point> vertices_;
    std::vector<std::vector<Index>> cells_;
    std::vector<Face> faces_;
    std::vector<std::vector<Index>> cell_faces_;
};

/// Geometric quantities required by the hybrid operators.
struct MeshGeometry {
    std::vector<double> cell_volume;
    std::vector<Point> cell_center;   // centroid
    std::vector<double> cell_diameter;
    std::vector<double> face_measure;
    std::vector<Point> face_center;   // midpoint
    std::vector<Point> face_normal;   // unit, outward from faces[f].cells[0]
    // Per cell, per local face: (x_sigma - x_K) . n_{K,sigma}.
    std::vector<std::vector<double>> face_distance;
    double h = 0.0;

    /// Unit normal of the local face, outward from the cell.
    [[nodiscard]] Point outward_normal(const Mesh& mesh, Index cell, std::size_t local_face) const;
};

/// n x n squares on [-1,1]^2, each split along the (i,j)-(i+1,j+1) diagonal.
Mesh build_triangular(int n);

/// n x n quadrilaterals on [-1,1]^2 with interior vertices moved by
/// amplitude * (2/n) * (sin(pi x) sin(pi y), sin(pi x) sin(pi y)).
/// Requires 0 <= amplitude < 0.45.
Mesh build_distorted(int n, double amplitude);

/// Throws Error{DegenerateCell} if a cell has non-positive area or its centroid
/// is not strictly inside every edge line.
MeshGeometry compute_geometry(const Mesh& mesh);

Mesh read_mesh(std::istream& in);
Mesh load_mesh(const std::filesystem::path& path);
void write_mesh(std::ostream& out, const Mesh& mesh);

} // namespace gdm
