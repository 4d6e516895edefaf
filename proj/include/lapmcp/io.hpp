#pragma once

// File formats.
//   graph:      {"n": int, "edges": [[i, j, w], ...]}, 0-based, any endpoint order
//   covariance: Matrix Market, coordinate or array, real/integer, symmetric or general
//   raw data:   CSV, k rows (samples) x n columns, optional header line
//   report:     JSON, see report_to_json

#include "lapmcp/core.hpp"
#include "lapmcp/graph.hpp"
#include "lapmcp/report.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lapmcp {

using Json = nlohmann::json;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return in;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    return out;
}

inline std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// %.17g round-trips doubles exactly.
inline std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline bool parse_double(const std::string& tok, double& out) {
    const std::string t = trim(tok);
    if (t.empty()) return false;
    try {
        std::size_t pos = 0;
        out = std::stod(t, &pos);
        return pos == t.size();
    } catch (const std::exception&) {
        return false;
    }
}

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

}  // namespace detail

// ---- graphs ---------------------------------------------------------------

inline Json graph_to_json(const EdgeGraph& g) {
    Json edges = Json::array();
    for (std::size_t k = 0; k < g.num_edges(); ++k) {
        const Edge& e = g.edges()[k];
        edges.push_back({e.i, e.j, g.has_weights() ? g.weights()[k] : 1.0});
    }
    return Json{{"n", g.n()}, {"edges", std::move(edges)}};
}

inline EdgeGraph graph_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("n") || !j.contains("edges")) {
        throw IoError("graph JSON: expected an object with \"n\" and \"edges\"");
    }
    if (!j["n"].is_number_integer()) throw IoError("graph JSON: \"n\" must be an integer");
    const int n = j["n"].get<int>();
    EdgeList edges;
    std::vector<double> weights;
    for (const Json& e : j["edges"]) {
        if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() || !e[1].is_number_integer() ||
            !e[2].is_number()) {
            throw IoError("graph JSON: each edge must be [i, j, weight]");
        }
        int a = e[0].get<int>();
        int b = e[1].get<int>();
        if (a > b) std::swap(a, b);
        edges.push_back({a, b});
        weights.push_back(e[2].get<double>());
    }
    try {
        return EdgeGraph(n, std::move(edges), std::move(weights));
    } catch (const std::invalid_argument& ex) {
        throw IoError(std::string("graph JSON: ") + ex.what());
    }
}

inline EdgeGraph read_graph(const std::string& path) {
    auto in = detail::open_in(path);
    Json j;
    try {
        in >> j;
    } catch (const Json::parse_error& ex) {
        throw IoError("'" + path + "': " + ex.what());
    }
    return graph_from_json(j);
}

inline void write_graph(const std::string& path, const EdgeGraph& g) {
    auto out = detail::open_out(path);
    out << graph_to_json(g).dump(1) << '\n';
}

// ---- Matrix Market ----------------------------------------------------------

inline Matrix read_matrix_market(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("Matrix Market: empty input");
    std::istringstream hs(detail::lower(line));
    std::string banner, object, format, field, symmetry;
    hs >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%matrixmarket" || object != "matrix") throw IoError("Matrix Market: bad banner");
    if (format != "coordinate" && format != "array") throw IoError("Matrix Market: unknown format '" + format + "'");
    if (field != "real" && field != "integer" && field != "double") {
        throw IoError("Matrix Market: unsupported field '" + field + "'");
    }
    if (symmetry != "general" && symmetry != "symmetric") {
        throw IoError("Matrix Market: unsupported symmetry '" + symmetry + "'");
    }
    const bool sym = symmetry == "symmetric";

    do {
        if (!std::getline(in, line)) throw IoError("Matrix Market: missing size line");
    } while (detail::trim(line).empty() || line[0] == '%');
    std::istringstream ss(line);
    long long rows = 0, cols = 0, nnz = 0;
    ss >> rows >> cols;
    if (format == "coordinate") ss >> nnz;
    if (!ss || rows < 0 || cols < 0 || nnz < 0) throw IoError("Matrix Market: bad size line");
    if (sym && rows != cols) throw IoError("Matrix Market: symmetric matrix must be square");

    Matrix m = Matrix::Zero(rows, cols);
    auto next_value = [&](double& v) {
        std::string tok;
        if (!(in >> tok)) return false;
        if (!detail::parse_double(tok, v)) throw IoError("Matrix Market: bad number '" + tok + "'");
        if (std::isnan(v)) throw IoError("Matrix Market: NaN entry");
        return true;
    };
    if (format == "coordinate") {
        for (long long k = 0; k < nnz; ++k) {
            long long i = 0, j = 0;
            double v = 0.0;
            if (!(in >> i >> j) || !next_value(v)) throw IoError("Matrix Market: truncated entry list");
            if (i < 1 || i > rows || j < 1 || j > cols) throw IoError("Matrix Market: index out of range");
            m(i - 1, j - 1) = v;
            if (sym) m(j - 1, i - 1) = v;
        }
    } else {
        // Column-major; symmetric arrays store the lower triangle only.
        for (long long j = 0; j < cols; ++j) {
            for (long long i = sym ? j : 0; i < rows; ++i) {
                double v = 0.0;
                if (!next_value(v)) throw IoError("Matrix Market: truncated array");
                m(i, j) = v;
                if (sym) m(j, i) = v;
            }
        }
    }
    return m;
}

inline Matrix read_matrix_market(const std::string& path) {
    auto in = detail::open_in(path);
    try {
        return read_matrix_market(in);
    } catch (const IoError& ex) {
        throw IoError("'" + path + "': " + ex.what());
    }
}

/// Array format; the symmetric variant when m is exactly symmetric.
inline void write_matrix_market(std::ostream& out, const Matrix& m) {
    const bool sym = m.rows() == m.cols() && m == m.transpose();
    out << "%%MatrixMarket matrix array real " << (sym ? "symmetric" : "general") << '\n';
    out << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = sym ? j : 0; i < m.rows(); ++i) out << detail::fmt(m(i, j)) << '\n';
    }
}

inline void write_matrix_market(const std::string& path, const Matrix& m) {
    auto out = detail::open_out(path);
    write_matrix_market(out, m);
}

/// Square symmetric matrix from Matrix Market, symmetrized as (S + S^T)/2.
inline Matrix read_covariance(const std::string& path) {
    const Matrix s = read_matrix_market(path);
    if (s.rows() != s.cols()) throw IoError("'" + path + "': covariance must be square");
    if (s.rows() == 0) throw IoError("'" + path + "': covariance is empty");
    return symmetrized(s);
}

// ---- raw data ---------------------------------------------------------------

/// k x n samples from CSV. A first line that does not parse as numbers is
/// taken as a header.
inline Matrix read_data_matrix(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    std::size_t width = 0;
    long long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split(line, ',');
        std::vector<double> row(cells.size());
        bool numeric = true;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::string t = detail::lower(detail::trim(cells[c]));
            if (t == "nan" || t == "na" || t == "-nan") {
                throw IoError("data CSV line " + std::to_string(lineno) +
                              ": missing value (missing-data covariance is not supported)");
            }
            if (!detail::parse_double(cells[c], row[c])) {
                numeric = false;
                break;
            }
        }
        if (!numeric) {
            if (first) {
                first = false;
                continue;
            }
            throw IoError("data CSV line " + std::to_string(lineno) + ": non-numeric cell");
        }
        first = false;
        if (rows.empty()) width = row.size();
        if (row.size() != width) throw IoError("data CSV line " + std::to_string(lineno) + ": ragged row");
        rows.push_back(std::move(row));
    }
    Matrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < width; ++c) x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
    return x;
}

inline Matrix read_data_matrix(const std::string& path) {
    auto in = detail::open_in(path);
    try {
        return read_data_matrix(in);
    } catch (const IoError& ex) {
        throw IoError("'" + path + "': " + ex.what());
    }
}

/// Columns mean-centred, S = (1/k) X^T X.
inline Matrix covariance_from_data(const Matrix& x) {
    if (x.rows() < 2) throw std::invalid_argument("covariance_from_data: need at least 2 samples");
    if (x.cols() < 1) throw std::invalid_argument("covariance_from_data: no variables");
    if (x.hasNaN()) throw std::invalid_argument("covariance_from_data: NaN entry");
    const Matrix c = x.rowwise() - x.colwise().mean();
    return symmetrized((c.transpose() * c) / static_cast<double>(x.rows()));
}

// ---- reports ----------------------------------------------------------------

inline Json report_to_json(const SolveReport& r) {
    Json edges = Json::array();
    for (std::size_t k = 0; k < r.edges.size(); ++k) {
        edges.push_back({r.edges[k].i, r.edges[k].j, r.w[static_cast<Eigen::Index>(k)]});
    }
    Json history = Json::array();
    for (const DcaIteration& h : r.history) {
        history.push_back({{"k", h.k},
                           {"objective", h.objective},
                           {"sigma", h.sigma},
                           {"step_norm", h.step_norm},
                           {"ssn_iterations", h.ssn_iterations},
                           {"certificate_retries", h.certificate_retries},
                           {"residual_norm", h.residual_norm},
                           {"delta_norm", h.delta_norm},
                           {"stop_rhs", h.stop_rhs},
                           {"certificate_ratio", h.certificate_ratio},
                           {"certificate_bound", h.certificate_bound},
                           {"descent_margin", h.descent_margin}});
    }
    Json admm = Json::array();
    for (const AdmmTrace& t : r.admm_history) {
        admm.push_back({{"iteration", t.iteration},
                        {"eta_p", t.eta_p},
                        {"eta_d", t.eta_d},
                        {"eta_g", t.eta_g},
                        {"pobj", t.pobj},
                        {"sigma", t.sigma}});
    }
    Json j{{"model", r.model},
           {"n", r.n},
           {"objective", r.objective},
           {"termination", to_string(r.termination)},
           {"iterations", r.iterations},
           {"wall_time_s", r.wall_time_s},
           {"edges", std::move(edges)},
           {"history", std::move(history)},
           {"admm_history", std::move(admm)}};
    if (r.model == "cgl-mcp") {
        j["warm_start"] = {{"iterations", r.warm_start.iterations},
                           {"termination", to_string(r.warm_start.termination)},
                           {"kkt_residual", r.warm_start.kkt_residual}};
    } else {
        j["kkt_residual"] = r.kkt_residual;
    }
    return j;
}

/// Graph stored in a report (or a plain graph file): the "edges" triples.
inline EdgeGraph graph_from_report(const Json& j) {
    if (!j.contains("n") || !j.contains("edges")) throw IoError("report JSON: missing \"n\" or \"edges\"");
    return graph_from_json(Json{{"n", j["n"]}, {"edges", j["edges"]}});
}

}  // namespace lapmcp
