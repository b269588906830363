#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace fdc {

enum class NodeTag { Interior, Inflow, Outflow, Wall, WallCorner };

const char* tag_name(NodeTag tag);

struct BoundaryEdge {
  int a = -1;
  int b = -1;
  NodeTag tag = NodeTag::Interior;
};

/// Triangulation of the rectangular channel (0,length) x (0,height).
/// Immutable after generation; safe for concurrent reads.
struct Mesh {
  double length = 0.0;
  double height = 0.0;
  std::vector<Eigen::Vector2d> nodes;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<BoundaryEdge> boundary_edges;
  std::vector<NodeTag> node_tags;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }

  double triangle_area(int t) const;
};

/// Uniform nx x ny grid, each cell split along the lower-left to
/// upper-right diagonal. Boundary tags are assigned by coordinate;
/// the four domain corners are tagged WallCorner.
Mesh generate_channel_mesh(double length, double height, int nx, int ny);

/// Node indices carrying the given tag, sorted along the boundary part
/// (Inflow/Outflow by y, Wall by x then y).
std::vector<int> boundary_nodes(const Mesh& mesh, NodeTag tag);

void write_mesh(const Mesh& mesh, std::ostream& out);
Mesh read_mesh(std::istream& in);

void save_mesh(const Mesh& mesh, const std::string& path);
Mesh load_mesh(const std::string& path);

}  // namespace fdc
