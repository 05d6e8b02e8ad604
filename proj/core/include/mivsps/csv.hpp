#pragma once

#include "mivsps/eoa.hpp"
#include "mivsps/mc.hpp"
#include "mivsps/model.hpp"
#include "mivsps/regression.hpp"
#include "mivsps/sps.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

// CSV dialect: comma separated, '.' decimal point, LF line endings, a
// mandatory header row. Doubles are written in shortest round-trip form so a
// reload reproduces every value bit for bit.
namespace mivsps::csv {

std::string format_double(double value);
double parse_double(const std::string& text);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 when absent
};

Table read_table(std::istream& in, const std::string& source = "<stream>");
Table read_table(const std::filesystem::path& path);
void write_table(std::ostream& out, const Table& table);

void write_matrix(std::ostream& out, const Matrix& m, const std::vector<std::string>& header);
void write_matrix(const std::filesystem::path& path, const Matrix& m,
                  const std::vector<std::string>& header);
Matrix read_matrix(const std::filesystem::path& path, std::vector<std::string>* header = nullptr);

// Columns k, x1..x_dx, u1..u_du, r1..r_dr, w1..w_dx; row n carries x_n only
// (inputs empty).
void write_trajectory(const std::filesystem::path& path, const Trajectory& traj);
Trajectory read_trajectory(const std::filesystem::path& path);

// Y.csv, Phi.csv and Psi.csv (when present) in `dir`. Phi columns are
// x1.., then u1.. (direct) or r1.. (indirect); Psi columns xbar1.., r1...
void write_regression(const std::filesystem::path& dir, const RegressionData& data);
RegressionData read_regression(const std::filesystem::path& dir);

// Long format `kind,i,k,value`: kind=pi rows give pi(i); kind=sign rows give
// the sign alpha_{i,k} for perturbation i in 1..m-1 and sample k.
void write_randomness(const std::filesystem::path& path, const SpsRandomness& randomness);
SpsRandomness read_randomness(const std::filesystem::path& path);

// Long format `section,row,col,value` with sections center, map, radius_sq, bounded.
void write_ellipsoid(const std::filesystem::path& path, const Ellipsoid& ellipsoid);
Ellipsoid read_ellipsoid(const std::filesystem::path& path);

inline const char* kReportHeader =
    "dim,params,method,noise,mode,epsilon,n,s,hits,invalid,p_hat,median_radius_sq,wall_ms,block_size";

void write_report(std::ostream& out, const CoverageReport& report);
void write_report(const std::filesystem::path& path, const CoverageReport& report);
CoverageReport read_report(const std::filesystem::path& path);

void write_benchmark(std::ostream& out, const std::vector<BenchmarkRow>& rows);

std::string format_dim(Dim dim);
Dim parse_dim(const std::string& text);

}  // namespace mivsps::csv
