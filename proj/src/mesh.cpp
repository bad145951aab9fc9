#include "gdm/mesh.hpp"

#include "gdm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>

namespace gdm {

Mesh::Mesh(std::vector<Point> vertices, std::vector<std::vector<Index>> cells)
    : vertices_(std::move(vertices)), cells_(std::move(cells))
{
    const Index nv = num_vertices();
    // key: sorted vertex pair -> face index
    std::map<std::pair<Index, Index>, Index> lookup;
    cell_faces_.resize(cells_.size());

    for (Index c = 0; c < num_cells(); ++c) {
        const auto& cell = cells_[static_cast<std::size_t>(c)];
        if (cell.size() < 3)
            throw Error(ErrorKind::Parse, "cell " + std::to_string(c) + " has fewer than 3 vertices");
        for (Index v : cell) {
            if (v < 0 || v >= nv)
                throw Error(ErrorKind::Parse, "cell " + std::to_string(c) + " references vertex " + std::to_string(v) +
                                                  " out of range [0, " + std::to_string(nv) + ")");
        }
        for (std::size_t k = 0; k < cell.size(); ++k) {
            const Index a = cell[k];
            const Index b = cell[(k + 1) % cell.size()];
            if (a == b)
                throw Error(ErrorKind::Topology, "cell " + std::to_string(c) + " repeats vertex " + std::to_string(a));
            const auto key = std::minmax(a, b);
            auto [it, inserted] = lookup.try_emplace({key.first, key.second}, num_faces());
            if (inserted) {
                Face f;
                f.vertices = {a, b};
                f.cells = {c, no_cell};
                faces_.push_back(f);
            } else {
                Face& f = faces_[static_cast<std::size_t>(it->second)];
                if (f.cells[1] != no_cell)
                    throw Error(ErrorKind::Topology, "edge (" + std::to_string(key.first) + ", " +
                                                         std::to_string(key.second) + ") has more than two adjacent cells");
                if (f.vertices[0] != b || f.vertices[1] != a)
                    throw Error(ErrorKind::Topology, "edge (" + std::to_string(key.first) + ", " +
                                                         std::to_string(key.second) +
                                                         ") traversed twice in the same direction");
                f.cells[1] = c;
            }
            cell_faces_[static_cast<std::size_t>(c)].push_back(it->second);
        }
    }
}

double Mesh::orientation(Index cell, Index face) const
{
    return faces_[static_cast<std::size_t>(face)].cells[0] == cell ? 1.0 : -1.0;
}

Point MeshGeometry::outward_normal(const Mesh& mesh, Index cell, std::size_t local_face) const
{
    const Index f = mesh.cell_faces(cell)[local_face];
    return mesh.orientation(cell, f) * face_normal[static_cast<std::size_t>(f)];
}

namespace {

Point grid_point(int i, int j, int n)
{
    return {-1.0 + 2.0 * i / n, -1.0 + 2.0 * j / n};
}

void require_positive(int n)
{
    if (n < 1)
        throw std::invalid_argument("mesh resolution must be >= 1, got " + std::to_string(n));
}

} // namespace

Mesh build_triangular(int n)
{
    require_positive(n);
    std::vector<Point> vertices;
    vertices.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            vertices.push_back(grid_point(i, j, n));

    auto id = [n](int i, int j) { return static_cast<Index>(j * (n + 1) + i); };
    std::vector<std::vector<Index>> cells;
    cells.reserve(static_cast<std::size_t>(2 * n * n));
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            cells.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    return Mesh(std::move(vertices), std::move(cells));
}

Mesh build_distorted(int n, double amplitude)
{
    require_positive(n);
    if (!(amplitude >= 0.0 && amplitude < 0.45))
        throw std::invalid_argument("distortion amplitude must lie in [0, 0.45)");

    std::vector<Point> vertices;
    vertices.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
    const double scale = amplitude * 2.0 / n;
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            Point p = grid_point(i, j, n);
            const bool boundary = i == 0 || j == 0 || i == n || j == n;
            if (!boundary && scale != 0.0) {
                const double s = std::sin(std::numbers::pi * p.x()) * std::sin(std::numbers::pi * p.y());
                p += Point(scale * s, scale * s);
            }
            vertices.push_back(p);
        }
    }

    auto id = [n](int i, int j) { return static_cast<Index>(j * (n + 1) + i); };
    std::vector<std::vector<Index>> cells;
    cells.reserve(static_cast<std::size_t>(n * n));
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});

    Mesh mesh(std::move(vertices), std::move(cells));
    compute_geometry(mesh); // validity check
    return mesh;
}

MeshGeometry compute_geometry(const Mesh& mesh)
{
    MeshGeometry g;
    const auto nc = static_cast<std::size_t>(mesh.num_cells());
    const auto nf = static_cast<std::size_t>(mesh.num_faces());
    const auto& xv = mesh.vertices();

    g.face_measure.resize(nf);
    g.face_center.resize(nf);
    g.face_normal.resize(nf);
    for (std::size_t f = 0; f < nf; ++f) {
        const Face& face = mesh.faces()[f];
        const Point& a = xv[static_cast<std::size_t>(face.vertices[0])];
        const Point& b = xv[static_cast<std::size_t>(face.vertices[1])];
        const Point e = b - a;
        g.face_measure[f] = e.norm();
        g.face_center[f] = 0.5 * (a + b);
        g.face_normal[f] = Point(e.y(), -e.x()) / g.face_measure[f];
    }

    g.cell_volume.resize(nc);
    g.cell_center.resize(nc);
    g.cell_diameter.resize(nc);
    g.face_distance.resize(nc);
    for (std::size_t c = 0; c < nc; ++c) {
        const auto& cell = mesh.cells()[c];
        // Shoelace, relative to the first vertex to limit cancellation.
        const Point& o = xv[static_cast<std::size_t>(cell[0])];
        double area2 = 0.0;
        Point moment = Point::Zero();
        for (std::size_t k = 1; k + 1 < cell.size(); ++k) {
            const Point a = xv[static_cast<std::size_t>(cell[k])] - o;
            const Point b = xv[static_cast<std::size_t>(cell[k + 1])] - o;
            const double cross = a.x() * b.y() - a.y() * b.x();
            area2 += cross;
            moment += cross * (a + b) / 3.0;
        }
        const double area = 0.5 * area2;
        if (!(area > 0.0))
            throw Error(ErrorKind::DegenerateCell, "cell " + std::to_string(c) + " has non-positive area " + std::to_string(area));
        g.cell_volume[c] = area;
        g.cell_center[c] = o + moment / area2;

        double diam = 0.0;
        for (Index a : cell)
            for (Index b : cell)
                diam = std::max(diam, (xv[static_cast<std::size_t>(a)] - xv[static_cast<std::size_t>(b)]).norm());
        g.cell_diameter[c] = diam;
        g.h = std::max(g.h, diam);

        const auto& faces = mesh.cell_faces(static_cast<Index>(c));
        g.face_distance[c].resize(faces.size());
        for (std::size_t k = 0; k < faces.size(); ++k) {
            const auto f = static_cast<std::size_t>(faces[k]);
            const double d = (g.face_center[f] - g.cell_center[c]).dot(g.outward_normal(mesh, static_cast<Index>(c), k));
            if (!(d > 0.0))
                throw Error(ErrorKind::DegenerateCell, "cell " + std::to_string(c) + " is not star-shaped w.r.t. its centroid (face " +
                                                           std::to_string(f) + ", distance " + std::to_string(d) + ")");
            g.face_distance[c][k] = d;
        }
    }
    return g;
}

Mesh read_mesh(std::istream& in)
{
    std::string raw;
    int line_no = 0;
    auto fail = [&line_no](const std::string& what) -> Error {
        return Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": " + what);
    };
    // Next non-blank line with comments stripped; false at end of input.
    auto next = [&](std::istringstream& ls) {
        while (std::getline(in, raw)) {
            ++line_no;
            if (auto hash = raw.find('#'); hash != std::string::npos)
                raw.erase(hash);
            if (raw.find_first_not_of(" \t\r") == std::string::npos)
                continue;
            ls.clear();
            ls.str(raw);
            return true;
        }
        return false;
    };
    auto expect_end = [&fail](std::istringstream& ls) {
        std::string extra;
        if (ls >> extra)
            throw fail("unexpected trailing token '" + extra + "'");
    };

    std::istringstream ls;
    std::string word;
    if (!next(ls))
        throw fail("empty mesh file");
    int dim = 0;
    if (!(ls >> word >> dim) || word != "polymesh")
        throw fail("expected header 'polymesh 2'");
    if (dim != 2)
        throw fail("only dimension 2 is supported, got " + std::to_string(dim));
    expect_end(ls);

    long long count = 0;
    if (!next(ls) || !(ls >> word >> count) || word != "vertices" || count < 0)
        throw fail("expected 'vertices N'");
    expect_end(ls);
    std::vector<Point> vertices(static_cast<std::size_t>(count));
    for (auto& v : vertices) {
        if (!next(ls) || !(ls >> v.x() >> v.y()))
            throw fail("expected vertex coordinates 'x y'");
        expect_end(ls);
    }

    if (!next(ls) || !(ls >> word >> count) || word != "cells" || count < 0)
        throw fail("expected 'cells M'");
    expect_end(ls);
    std::vector<std::vector<Index>> cells(static_cast<std::size_t>(count));
    for (auto& cell : cells) {
        long long k = 0;
        if (!next(ls) || !(ls >> k) || k < 3)
            throw fail("expected 'k i1 ... ik' with k >= 3");
        cell.resize(static_cast<std::size_t>(k));
        for (auto& v : cell) {
            long long idx = 0;
            if (!(ls >> idx))
                throw fail("expected " + std::to_string(k) + " vertex indices");
            if (idx < 0 || idx >= static_cast<long long>(vertices.size()))
                throw fail("vertex index " + std::to_string(idx) + " out of range");
            v = static_cast<Index>(idx);
        }
        expect_end(ls);
    }
    std::istringstream rest;
    if (next(rest))
        throw fail("unexpected content after cell list");

    Mesh mesh(std::move(vertices), std::move(cells));
    compute_geometry(mesh);
    return mesh;
}

Mesh load_mesh(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::Parse, "cannot open mesh file '" + path.string() + "'");
    try {
        return read_mesh(in);
    } catch (const Error& e) {
        throw e.with_context(path.string());
    }
}

void write_mesh(std::ostream& out, const Mesh& mesh)
{
    const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
    out << "polymesh 2\n";
    out << "vertices " << mesh.num_vertices() << '\n';
    for (const auto& v : mesh.vertices())
        out << v.x() << ' ' << v.y() << '\n';
    out << "cells " << mesh.num_cells() << '\n';
    for (const auto& cell : mesh.cells()) {
        out << cell.size();
        for (Index v : cell)
            out << ' ' << v;
        out << '\n';
    }
    out.precision(old_precision);
}

} // namespace gdm
