#include "fdc/mesh.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace fdc {

const char* tag_name(NodeTag tag) {
  switch (tag) {
    case NodeTag::Interior:
      return "I";
    case NodeTag::Inflow:
      return "IN";
    case NodeTag::Outflow:
      return "OUT";
    case NodeTag::Wall:
      return "W";
    case NodeTag::WallCorner:
      return "WC";
  }
  return "?";
}

static NodeTag tag_from_name(const std::string& s) {
  if (s == "I") return NodeTag::Interior;
  if (s == "IN") return NodeTag::Inflow;
  if (s == "OUT") return NodeTag::Outflow;
  if (s == "W") return NodeTag::Wall;
  if (s == "WC") return NodeTag::WallCorner;
  throw std::invalid_argument("unknown node tag '" + s + "'");
}

double Mesh::triangle_area(int t) const {
  const auto& tri = triangles[t];
  const Eigen::Vector2d& a = nodes[tri[0]];
  const Eigen::Vector2d& b = nodes[tri[1]];
  const Eigen::Vector2d& c = nodes[tri[2]];
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

Mesh generate_channel_mesh(double length, double height, int nx, int ny) {
  if (!(length > 0.0) || !(height > 0.0))
    throw std::invalid_argument("generate_channel_mesh: dimensions must be positive");
  if (nx < 1 || ny < 1)
    throw std::invalid_argument("generate_channel_mesh: nx and ny must be positive");

  Mesh mesh;
  mesh.length = length;
  mesh.height = height;
  mesh.nodes.reserve(static_cast<size_t>(nx + 1) * (ny + 1));
  mesh.node_tags.reserve(mesh.nodes.capacity());

  auto idx = [nx](int i, int j) { return j * (nx + 1) + i; };

  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      mesh.nodes.emplace_back(length * i / nx, height * j / ny);
      const bool left = (i == 0), right = (i == nx);
      const bool bottom = (j == 0), top = (j == ny);
      NodeTag tag = NodeTag::Interior;
      if ((left || right) && (bottom || top))
        tag = NodeTag::WallCorner;
      else if (left)
        tag = NodeTag::Inflow;
      else if (right)
        tag = NodeTag::Outflow;
      else if (bottom || top)
        tag = NodeTag::Wall;
      mesh.node_tags.push_back(tag);
    }
  }

  mesh.triangles.reserve(static_cast<size_t>(2) * nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int n00 = idx(i, j), n10 = idx(i + 1, j);
      const int n01 = idx(i, j + 1), n11 = idx(i + 1, j + 1);
      // diagonal n00 -- n11
      mesh.triangles.push_back({n00, n10, n11});
      mesh.triangles.push_back({n00, n11, n01});
    }
  }

  for (int i = 0; i < nx; ++i) {
    mesh.boundary_edges.push_back({idx(i, 0), idx(i + 1, 0), NodeTag::Wall});
    mesh.boundary_edges.push_back({idx(i, ny), idx(i + 1, ny), NodeTag::Wall});
  }
  for (int j = 0; j < ny; ++j) {
    mesh.boundary_edges.push_back({idx(0, j), idx(0, j + 1), NodeTag::Inflow});
    mesh.boundary_edges.push_back({idx(nx, j), idx(nx, j + 1), NodeTag::Outflow});
  }
  return mesh;
}

std::vector<int> boundary_nodes(const Mesh& mesh, NodeTag tag) {
  std::vector<int> out;
  for (int i = 0; i < mesh.num_nodes(); ++i)
    if (mesh.node_tags[i] == tag) out.push_back(i);
  std::sort(out.begin(), out.end(), [&](int a, int b) {
    const Eigen::Vector2d& pa = mesh.nodes[a];
    const Eigen::Vector2d& pb = mesh.nodes[b];
    if (tag == NodeTag::Inflow || tag == NodeTag::Outflow)
      return pa.y() < pb.y();
    if (pa.x() != pb.x()) return pa.x() < pb.x();
    return pa.y() < pb.y();
  });
  return out;
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
  out << "mesh v1\n";
  out << mesh.num_nodes() << ' ' << mesh.num_triangles() << '\n';
  char buf[128];
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %s\n", mesh.nodes[i].x(),
                  mesh.nodes[i].y(), tag_name(mesh.node_tags[i]));
    out << buf;
  }
  for (const auto& t : mesh.triangles)
    out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

Mesh read_mesh(std::istream& in) {
  std::string header;
  std::getline(in, header);
  if (header != "mesh v1") throw std::invalid_argument("mesh file: bad header");
  int nn = 0, nt = 0;
  in >> nn >> nt;
  if (!in || nn < 3 || nt < 1) throw std::invalid_argument("mesh file: bad counts");

  Mesh mesh;
  mesh.nodes.resize(nn);
  mesh.node_tags.resize(nn);
  for (int i = 0; i < nn; ++i) {
    double x, y;
    std::string tag;
    in >> x >> y >> tag;
    if (!in) throw std::invalid_argument("mesh file: truncated node list");
    mesh.nodes[i] = {x, y};
    mesh.node_tags[i] = tag_from_name(tag);
    mesh.length = std::max(mesh.length, x);
    mesh.height = std::max(mesh.height, y);
  }
  mesh.triangles.resize(nt);
  for (int t = 0; t < nt; ++t) {
    in >> mesh.triangles[t][0] >> mesh.triangles[t][1] >> mesh.triangles[t][2];
    if (!in) throw std::invalid_argument("mesh file: truncated triangle list");
    for (int v : mesh.triangles[t])
      if (v < 0 || v >= nn) throw std::invalid_argument("mesh file: vertex index out of range");
  }

  // Recover boundary edges: edges incident to exactly one triangle,
  // tagged by which side of the rectangle they lie on.
  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& t : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      int a = t[e], b = t[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      edge_count[{a, b}]++;
    }
  }
  for (const auto& [edge, count] : edge_count) {
    if (count != 1) continue;
    const auto& pa = mesh.nodes[edge.first];
    const auto& pb = mesh.nodes[edge.second];
    NodeTag tag = NodeTag::Wall;
    if (pa.x() == 0.0 && pb.x() == 0.0)
      tag = NodeTag::Inflow;
    else if (pa.x() == mesh.length && pb.x() == mesh.length)
      tag = NodeTag::Outflow;
    mesh.boundary_edges.push_back({edge.first, edge.second, tag});
  }
  return mesh;
}

void save_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_mesh(mesh, f);
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

Mesh load_mesh(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open mesh file '" + path + "'");
  return read_mesh(f);
}

}  // namespace fdc
