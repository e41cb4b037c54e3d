#include "homogenlab/vtk_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "homogenlab/operators.hpp"

namespace homogen {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

void write_vtk_header(std::ostream& os, const std::string& title, const GridSpec& g) {
    os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\n";
    os << "DATASET STRUCTURED_POINTS\n";
    os << "DIMENSIONS " << g.n[0] << " " << g.n[1] << " " << g.n[2] << "\n";
    os << "ORIGIN " << format_double(g.box.lo[0] + 0.5 * g.h[0]) << " "
       << format_double(g.box.lo[1] + 0.5 * g.h[1]) << " "
       << format_double(g.box.lo[2] + 0.5 * g.h[2]) << "\n";
    os << "SPACING " << format_double(g.h[0]) << " " << format_double(g.h[1]) << " "
       << format_double(g.h[2]) << "\n";
    os << "POINT_DATA " << g.cell_count() << "\n";
}

GridSpec read_vtk_header(std::istream& is, std::string& data_line) {
    std::string line;
    Int3 n{0, 0, 0};
    Vec3 origin{}, spacing{};
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "DIMENSIONS") {
            ls >> n[0] >> n[1] >> n[2];
        } else if (tag == "ORIGIN") {
            ls >> origin[0] >> origin[1] >> origin[2];
        } else if (tag == "SPACING") {
            ls >> spacing[0] >> spacing[1] >> spacing[2];
        } else if (tag == "SCALARS" || tag == "VECTORS") {
            data_line = line;
            break;
        }
    }
    if (n[0] < 1) throw Error("vtk: missing DIMENSIONS");
    BoxDomain box;
    for (int d = 0; d < 3; ++d) {
        box.lo[d] = origin[d] - 0.5 * spacing[d];
        box.hi[d] = box.lo[d] + n[d] * spacing[d];
    }
    return GridSpec(box, n);
}

}  // namespace

void write_vtk_scalar(const std::string& path, const std::string& name,
                      const ScalarField& field) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path + " for writing");
    write_vtk_header(os, name, field.grid);
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (double v : field.values) os << format_double(v) << "\n";
}

void write_vtk_vector(const std::string& path, const std::string& name,
                      const VectorFieldMAC& field) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path + " for writing");
    write_vtk_header(os, name, field.grid);
    std::array<ScalarField, 3> c = mac_to_center(field);
    os << "VECTORS " << name << " double\n";
    for (long q = 0; q < field.grid.cell_count(); ++q)
        os << format_double(c[0].values[q]) << " " << format_double(c[1].values[q])
           << " " << format_double(c[2].values[q]) << "\n";
}

ScalarField read_vtk_scalar(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open " + path);
    std::string data_line;
    GridSpec g = read_vtk_header(is, data_line);
    if (data_line.rfind("SCALARS", 0) != 0) throw Error("vtk: expected SCALARS data");
    std::string lookup;
    std::getline(is, lookup);
    ScalarField f(g);
    for (long q = 0; q < g.cell_count(); ++q)
        if (!(is >> f.values[q])) throw Error("vtk: truncated scalar data");
    return f;
}

std::array<ScalarField, 3> read_vtk_vector(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open " + path);
    std::string data_line;
    GridSpec g = read_vtk_header(is, data_line);
    if (data_line.rfind("VECTORS", 0) != 0) throw Error("vtk: expected VECTORS data");
    std::array<ScalarField, 3> f{ScalarField(g), ScalarField(g), ScalarField(g)};
    for (long q = 0; q < g.cell_count(); ++q)
        if (!(is >> f[0].values[q] >> f[1].values[q] >> f[2].values[q]))
            throw Error("vtk: truncated vector data");
    return f;
}

static const char* kCsvHeader =
    "eps,r_eps,n,err_theta_L2,err_u_L2,gap_phi1,gap_phi2,gap_phi3,"
    "ratio17,ratio18,ratio19,ratio_p24,picard_iters,seconds";

void write_convergence_csv(const std::string& path, const ConvergenceReport& report) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path + " for writing");
    os << kCsvHeader << "\r\n";
    for (const ConvergenceRow& r : report.rows) {
        os << format_double(r.eps) << "," << format_double(r.r_eps) << "," << r.n
           << "," << format_double(r.err_theta_l2) << ","
           << format_double(r.err_u_l2);
        for (int q = 0; q < 3; ++q) os << "," << format_double(r.gap_phi[q]);
        os << "," << format_double(r.ratio17) << "," << format_double(r.ratio18)
           << "," << format_double(r.ratio19) << "," << format_double(r.ratio_p24)
           << "," << r.picard_iters << "," << format_double(r.seconds) << "\r\n";
    }
}

ConvergenceReport read_convergence_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open " + path);
    std::string line;
    if (!std::getline(is, line)) throw Error("csv: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader) throw Error("csv: unexpected header");
    ConvergenceReport rep;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        std::vector<std::string> cells;
        while (std::getline(ls, tok, ',')) cells.push_back(tok);
        if (cells.size() != 14) throw Error("csv: bad row width");
        ConvergenceRow r;
        r.eps = std::stod(cells[0]);
        r.r_eps = std::stod(cells[1]);
        r.n = std::stoi(cells[2]);
        r.err_theta_l2 = std::stod(cells[3]);
        r.err_u_l2 = std::stod(cells[4]);
        for (int q = 0; q < 3; ++q) r.gap_phi[q] = std::stod(cells[5 + q]);
        r.ratio17 = std::stod(cells[8]);
        r.ratio18 = std::stod(cells[9]);
        r.ratio19 = std::stod(cells[10]);
        r.ratio_p24 = std::stod(cells[11]);
        r.picard_iters = std::stoi(cells[12]);
        r.seconds = std::stod(cells[13]);
        rep.rows.push_back(r);
    }
    return rep;
}

void write_manifest(const std::string& path,
                    std::vector<std::pair<std::string, std::string>> entries) {
    std::sort(entries.begin(), entries.end());
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path + " for writing");
    for (const auto& [k, v] : entries) os << k << "=" << v << "\n";
}

}  // namespace homogen
