#pragma once

#include <iosfwd>
#include <string>

#include "fdc/fem.hpp"
#include "fdc/filters.hpp"

namespace fdc {

/// Velocity CSV `node_id,ux,uy` (P1 part only, bubbles are internal).
void write_velocity_csv(const Mesh& mesh, const VelocityField& v, std::ostream& out);
VelocityField read_velocity_csv(const Mesh& mesh, std::istream& in);

/// Pressure CSV `node_id,p`.
void write_pressure_csv(const Mesh& mesh, const PressureField& p, std::ostream& out);
PressureField read_pressure_csv(const Mesh& mesh, std::istream& in);

extern const char* kReportCsvHeader;  // method,alpha,residual_l2,...
void write_report_row(const FilterReport& report, std::ostream& out);

/// Whole-file atomic write: writes to <path>.tmp, then renames.
void atomic_write_file(const std::string& path, const std::string& content);

void save_velocity_csv(const Mesh& mesh, const VelocityField& v, const std::string& path);
VelocityField load_velocity_csv(const Mesh& mesh, const std::string& path);
void save_pressure_csv(const Mesh& mesh, const PressureField& p, const std::string& path);

}  // namespace fdc
