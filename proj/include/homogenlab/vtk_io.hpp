#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "homogenlab/analysis.hpp"
#include "homogenlab/grid.hpp"

namespace homogen {

/// Legacy VTK STRUCTURED_POINTS writer, ASCII with 17 significant digits so
/// every double round-trips exactly. Cell-centered data is emitted as point
/// data at the cell centers (origin shifted by half a spacing).
void write_vtk_scalar(const std::string& path, const std::string& name,
                      const ScalarField& field);
void write_vtk_vector(const std::string& path, const std::string& name,
                      const VectorFieldMAC& field);

ScalarField read_vtk_scalar(const std::string& path);
std::array<ScalarField, 3> read_vtk_vector(const std::string& path);

/// Sweep report as RFC-4180 CSV with the frozen header
/// eps,r_eps,n,err_theta_L2,err_u_L2,gap_phi1,gap_phi2,gap_phi3,
/// ratio17,ratio18,ratio19,ratio_p24,picard_iters,seconds.
void write_convergence_csv(const std::string& path, const ConvergenceReport& report);
ConvergenceReport read_convergence_csv(const std::string& path);

/// Manifest of key=value lines, sorted by key.
void write_manifest(const std::string& path,
                    std::vector<std::pair<std::string, std::string>> entries);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace homogen
