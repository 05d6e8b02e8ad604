#include "mivsps/csv.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace mivsps::csv {

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
    if (text == "nan" || text.empty()) return std::numeric_limits<double>::quiet_NaN();
    if (text == "inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw Error("csv: cannot parse number '" + text + "'");
    }
    return value;
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("csv: cannot open '" + path.string() + "' for writing");
    return out;
}

int to_int(const std::string& text) {
    int value = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw Error("csv: cannot parse integer '" + text + "'");
    }
    return value;
}

std::vector<std::string> numbered(const std::string& prefix, int count) {
    std::vector<std::string> out;
    for (int i = 1; i <= count; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

int count_prefix(const std::vector<std::string>& header, const std::string& prefix) {
    int count = 0;
    for (const auto& name : header) {
        if (name.rfind(prefix, 0) == 0 && name.size() > prefix.size() &&
            std::isdigit(static_cast<unsigned char>(name[prefix.size()]))) {
            ++count;
        }
    }
    return count;
}

}  // namespace

int Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
}

Table read_table(std::istream& in, const std::string& source) {
    Table table;
    std::string line;
    if (!std::getline(in, line)) throw Error("csv: '" + source + "' is empty (header row required)");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    table.header = split(line);
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split(line);
        if (fields.size() != table.header.size()) {
            std::ostringstream msg;
            msg << "csv: " << source << ":" << lineno << ": expected " << table.header.size()
                << " fields, found " << fields.size();
            throw Error(msg.str());
        }
        table.rows.push_back(std::move(fields));
    }
    return table;
}

Table read_table(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("csv: cannot open '" + path.string() + "'");
    return read_table(in, path.string());
}

void write_table(std::ostream& out, const Table& table) {
    const auto emit = [&](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i > 0) out << ',';
            out << fields[i];
        }
        out << '\n';
    };
    emit(table.header);
    for (const auto& row : table.rows) emit(row);
}

void write_matrix(std::ostream& out, const Matrix& m, const std::vector<std::string>& header) {
    if (static_cast<Eigen::Index>(header.size()) != m.cols()) {
        throw DimensionError("csv: header width does not match matrix columns");
    }
    Table table;
    table.header = header;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        std::vector<std::string> row;
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(format_double(m(i, j)));
        table.rows.push_back(std::move(row));
    }
    write_table(out, table);
}

void write_matrix(const std::filesystem::path& path, const Matrix& m,
                  const std::vector<std::string>& header) {
    auto out = open_out(path);
    write_matrix(out, m, header);
}

Matrix read_matrix(const std::filesystem::path& path, std::vector<std::string>* header) {
    const Table table = read_table(path);
    Matrix m(table.rows.size(), table.header.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        for (std::size_t j = 0; j < table.header.size(); ++j) m(i, j) = parse_double(table.rows[i][j]);
    }
    if (header != nullptr) *header = table.header;
    return m;
}

void write_trajectory(const std::filesystem::path& path, const Trajectory& traj) {
    const int n = traj.length();
    const int dx = static_cast<int>(traj.x.front().size());
    const int du = n > 0 ? static_cast<int>(traj.u.front().size()) : 0;
    const int dr = n > 0 ? static_cast<int>(traj.r.front().size()) : 0;
    Table table;
    table.header.push_back("k");
    for (const auto& prefix : {std::pair{"x", dx}, std::pair{"u", du}, std::pair{"r", dr}, std::pair{"w", dx}}) {
        const auto names = numbered(prefix.first, prefix.second);
        table.header.insert(table.header.end(), names.begin(), names.end());
    }
    for (int k = 0; k <= n; ++k) {
        std::vector<std::string> row{std::to_string(k)};
        for (int j = 0; j < dx; ++j) row.push_back(format_double(traj.x[k](j)));
        const auto put = [&](const std::vector<Vector>& seq, int width) {
            for (int j = 0; j < width; ++j) row.push_back(k < n ? format_double(seq[k](j)) : "");
        };
        put(traj.u, du);
        put(traj.r, dr);
        put(traj.w, dx);
        table.rows.push_back(std::move(row));
    }
    auto out = open_out(path);
    write_table(out, table);
}

Trajectory read_trajectory(const std::filesystem::path& path) {
    const Table table = read_table(path);
    const int dx = count_prefix(table.header, "x");
    const int du = count_prefix(table.header, "u");
    const int dr = count_prefix(table.header, "r");
    if (dx < 1 || table.rows.empty()) throw Error("csv: '" + path.string() + "' is not a trajectory");
    Trajectory traj;
    const int n = static_cast<int>(table.rows.size()) - 1;
    const auto block = [&](const std::vector<std::string>& row, int offset, int width) {
        Vector v(width);
        for (int j = 0; j < width; ++j) v(j) = parse_double(row[offset + j]);
        return v;
    };
    for (int k = 0; k <= n; ++k) {
        const auto& row = table.rows[k];
        traj.x.push_back(block(row, 1, dx));
        if (k < n) {
            traj.u.push_back(block(row, 1 + dx, du));
            traj.r.push_back(block(row, 1 + dx + du, dr));
            traj.w.push_back(block(row, 1 + dx + du + dr, dx));
        }
    }
    return traj;
}

void write_regression(const std::filesystem::path& dir, const RegressionData& data) {
    std::filesystem::create_directories(dir);
    const int dx = data.state_dim;
    const int du = data.input_dim;
    const std::string input = data.mode == Mode::Direct ? "u" : "r";
    write_matrix(dir / "Y.csv", data.Y, numbered("y", data.outputs()));
    auto phi = numbered("x", dx);
    const auto inputs = numbered(input, du);
    phi.insert(phi.end(), inputs.begin(), inputs.end());
    write_matrix(dir / "Phi.csv", data.Phi, phi);
    if (data.has_instruments()) {
        auto psi = numbered("xbar", dx);
        const auto refs = numbered("r", du);
        psi.insert(psi.end(), refs.begin(), refs.end());
        write_matrix(dir / "Psi.csv", data.Psi, psi);
    }
}

RegressionData read_regression(const std::filesystem::path& dir) {
    RegressionData data;
    std::vector<std::string> header;
    data.Y = read_matrix(dir / "Y.csv");
    data.Phi = read_matrix(dir / "Phi.csv", &header);
    data.state_dim = count_prefix(header, "x");
    data.input_dim = static_cast<int>(header.size()) - data.state_dim;
    data.mode = count_prefix(header, "r") > 0 ? Mode::Indirect : Mode::Direct;
    if (std::filesystem::exists(dir / "Psi.csv")) data.Psi = read_matrix(dir / "Psi.csv");
    validate(data, data.has_instruments());
    return data;
}

void write_randomness(const std::filesystem::path& path, const SpsRandomness& randomness) {
    auto out = open_out(path);
    out << "kind,i,k,value\n";
    for (int i = 0; i < randomness.m(); ++i) out << "pi," << i << ",0," << randomness.pi[i] << '\n';
    for (Eigen::Index i = 0; i < randomness.signs.rows(); ++i) {
        for (Eigen::Index k = 0; k < randomness.signs.cols(); ++k) {
            out << "sign," << i + 1 << ',' << k << ',' << static_cast<int>(randomness.signs(i, k)) << '\n';
        }
    }
}

SpsRandomness read_randomness(const std::filesystem::path& path) {
    const Table table = read_table(path);
    if (table.header != std::vector<std::string>{"kind", "i", "k", "value"}) {
        throw Error("csv: '" + path.string() + "' is not a randomness file");
    }
    std::vector<std::pair<int, int>> pis;
    int max_i = 0;
    int max_k = -1;
    for (const auto& row : table.rows) {
        if (row[0] == "pi") {
            pis.emplace_back(to_int(row[1]), to_int(row[3]));
        } else {
            max_i = std::max(max_i, to_int(row[1]));
            max_k = std::max(max_k, to_int(row[2]));
        }
    }
    SpsRandomness out;
    out.pi.assign(pis.size(), 0);
    for (const auto& [i, v] : pis) out.pi.at(i) = v;
    out.signs = SignMatrix::Zero(max_i, max_k + 1);
    for (const auto& row : table.rows) {
        if (row[0] == "sign") {
            out.signs(to_int(row[1]) - 1, to_int(row[2])) = static_cast<std::int8_t>(to_int(row[3]));
        }
    }
    validate(out, out.m(), out.n());
    return out;
}

void write_ellipsoid(const std::filesystem::path& path, const Ellipsoid& ellipsoid) {
    auto out = open_out(path);
    out << "section,row,col,value\n";
    const auto emit = [&](const char* name, const Matrix& m) {
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                out << name << ',' << i << ',' << j << ',' << format_double(m(i, j)) << '\n';
    };
    emit("center", ellipsoid.center);
    emit("map", ellipsoid.map);
    out << "radius_sq,0,0," << format_double(ellipsoid.radius_sq) << '\n';
    out << "bounded,0,0," << (ellipsoid.bounded ? 1 : 0) << '\n';
}

Ellipsoid read_ellipsoid(const std::filesystem::path& path) {
    const Table table = read_table(path);
    if (table.header != std::vector<std::string>{"section", "row", "col", "value"}) {
        throw Error("csv: '" + path.string() + "' is not an ellipsoid file");
    }
    int center_rows = 0, center_cols = 0, map_rows = 0;
    for (const auto& row : table.rows) {
        if (row[0] == "center") {
            center_rows = std::max(center_rows, to_int(row[1]) + 1);
            center_cols = std::max(center_cols, to_int(row[2]) + 1);
        } else if (row[0] == "map") {
            map_rows = std::max(map_rows, to_int(row[1]) + 1);
        }
    }
    Ellipsoid e;
    e.center = Matrix::Zero(center_rows, center_cols);
    e.map = Matrix::Zero(map_rows, map_rows);
    for (const auto& row : table.rows) {
        const double value = parse_double(row[3]);
        if (row[0] == "center") {
            e.center(to_int(row[1]), to_int(row[2])) = value;
        } else if (row[0] == "map") {
            e.map(to_int(row[1]), to_int(row[2])) = value;
        } else if (row[0] == "radius_sq") {
            e.radius_sq = value;
        } else if (row[0] == "bounded") {
            e.bounded = value != 0.0;
        } else {
            throw Error("csv: unknown ellipsoid section '" + row[0] + "'");
        }
    }
    return e;
}

std::string format_dim(Dim dim) {
    if (dim.dx == dim.du) return std::to_string(dim.dx);
    return std::to_string(dim.dx) + "x" + std::to_string(dim.du);
}

Dim parse_dim(const std::string& text) {
    const auto x = text.find('x');
    if (x == std::string::npos) {
        const int d = to_int(text);
        return Dim{d, d};
    }
    return Dim{to_int(text.substr(0, x)), to_int(text.substr(x + 1))};
}

void write_report(std::ostream& out, const CoverageReport& report) {
    out << kReportHeader << '\n';
    for (const auto& row : report.rows) {
        out << format_dim(row.dim) << ',' << row.dim.params() << ',' << to_string(row.method) << ','
            << row.noise << ',' << to_string(row.mode) << ',' << format_double(row.epsilon) << ','
            << row.n << ',' << row.trials << ',' << row.hits << ',' << row.invalid << ','
            << format_double(row.p_hat) << ',' << format_double(row.median_radius_sq) << ','
            << format_double(row.wall_ms) << ',' << row.block_size << '\n';
    }
}

void write_report(const std::filesystem::path& path, const CoverageReport& report) {
    auto out = open_out(path);
    write_report(out, report);
}

CoverageReport read_report(const std::filesystem::path& path) {
    const Table table = read_table(path);
    std::ostringstream expected;
    write_table(expected, Table{split(kReportHeader), {}});
    std::ostringstream actual;
    write_table(actual, Table{table.header, {}});
    if (expected.str() != actual.str()) throw Error("csv: '" + path.string() + "' has an unexpected header");
    CoverageReport report;
    for (const auto& f : table.rows) {
        CoverageRow row;
        row.dim = parse_dim(f[0]);
        const auto method = parse_method(f[2]);
        if (!method) throw Error("csv: unknown method '" + f[2] + "'");
        row.method = *method;
        row.noise = f[3];
        row.mode = f[4] == "indirect" ? Mode::Indirect : Mode::Direct;
        row.epsilon = parse_double(f[5]);
        row.n = to_int(f[6]);
        row.trials = to_int(f[7]);
        row.hits = to_int(f[8]);
        row.invalid = to_int(f[9]);
        row.p_hat = parse_double(f[10]);
        row.median_radius_sq = parse_double(f[11]);
        row.wall_ms = parse_double(f[12]);
        row.block_size = to_int(f[13]);
        report.rows.push_back(std::move(row));
    }
    return report;
}

void write_benchmark(std::ostream& out, const std::vector<BenchmarkRow>& rows) {
    out << "dim,params,block_miv,block_iv,time_miv_ms,time_iv_ms,rel_time\n";
    for (const auto& row : rows) {
        out << format_dim(row.dim) << ',' << row.params << ',' << row.block_miv << ',' << row.block_iv
            << ',' << format_double(row.time_miv_ms) << ',' << format_double(row.time_iv_ms) << ','
            << format_double(row.relative_time) << '\n';
    }
}

}  // namespace mivsps::csv
