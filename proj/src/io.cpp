#include "fdc/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fdc {

namespace {

std::string fmt_double(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

void write_velocity_csv(const Mesh& mesh, const VelocityField& v, std::ostream& out) {
  if (v.coeffs.size() != velocity_dofs(mesh))
    throw std::invalid_argument("write_velocity_csv: field does not conform to mesh");
  const int nvc = velocity_dofs_per_component(mesh);
  out << "node_id,ux,uy\n";
  for (int i = 0; i < mesh.num_nodes(); ++i)
    out << i << ',' << fmt_double(v.coeffs[i]) << ',' << fmt_double(v.coeffs[nvc + i]) << '\n';
}

VelocityField read_velocity_csv(const Mesh& mesh, std::istream& in) {
  std::string line;
  std::getline(in, line);
  if (line != "node_id,ux,uy") throw std::invalid_argument("velocity csv: bad header");
  VelocityField v = VelocityField::zero(mesh);
  const int nvc = velocity_dofs_per_component(mesh);
  int count = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int id;
    double ux, uy;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf", &id, &ux, &uy) != 3)
      throw std::invalid_argument("velocity csv: malformed row '" + line + "'");
    if (id < 0 || id >= mesh.num_nodes())
      throw std::invalid_argument("velocity csv: node_id out of range");
    v.coeffs[id] = ux;
    v.coeffs[nvc + id] = uy;
    ++count;
  }
  if (count != mesh.num_nodes())
    throw std::invalid_argument("velocity csv: row count does not match mesh");
  return v;
}

void write_pressure_csv(const Mesh& mesh, const PressureField& p, std::ostream& out) {
  if (p.coeffs.size() != mesh.num_nodes())
    throw std::invalid_argument("write_pressure_csv: field does not conform to mesh");
  out << "node_id,p\n";
  for (int i = 0; i < mesh.num_nodes(); ++i) out << i << ',' << fmt_double(p.coeffs[i]) << '\n';
}

PressureField read_pressure_csv(const Mesh& mesh, std::istream& in) {
  std::string line;
  std::getline(in, line);
  if (line != "node_id,p") throw std::invalid_argument("pressure csv: bad header");
  PressureField p = PressureField::zero(mesh);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int id;
    double val;
    if (std::sscanf(line.c_str(), "%d,%lf", &id, &val) != 2)
      throw std::invalid_argument("pressure csv: malformed row '" + line + "'");
    if (id < 0 || id >= mesh.num_nodes())
      throw std::invalid_argument("pressure csv: node_id out of range");
    p.coeffs[id] = val;
  }
  return p;
}

const char* kReportCsvHeader =
    "method,alpha,residual_l2,err_u_l2,err_u_h1,err_p_l2,div_h,iters,seconds";

void write_report_row(const FilterReport& r, std::ostream& out) {
  out << r.method << ',' << fmt_double(r.alpha) << ',' << fmt_double(r.residual_l2) << ','
      << fmt_double(r.err_u_l2) << ',' << fmt_double(r.err_u_h1) << ',' << fmt_double(r.err_p_l2)
      << ',' << fmt_double(r.div_h) << ',' << r.iters << ',' << fmt_double(r.seconds) << '\n';
}

void atomic_write_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open '" + tmp + "' for writing");
    f << content;
    if (!f) throw std::runtime_error("write to '" + tmp + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

void save_velocity_csv(const Mesh& mesh, const VelocityField& v, const std::string& path) {
  std::ostringstream ss;
  write_velocity_csv(mesh, v, ss);
  atomic_write_file(path, ss.str());
}

VelocityField load_velocity_csv(const Mesh& mesh, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open field file '" + path + "'");
  return read_velocity_csv(mesh, f);
}

void save_pressure_csv(const Mesh& mesh, const PressureField& p, const std::string& path) {
  std::ostringstream ss;
  write_pressure_csv(mesh, p, ss);
  atomic_write_file(path, ss.str());
}

}  // namespace fdc
