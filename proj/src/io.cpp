#include "cusp/io.hpp"

#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <sstream>

namespace cusp {
namespace io {

namespace {

using nlohmann::json;

ModelSpec model_from_json(const json& doc) {
    ModelSpec m;
    const std::string sym = doc.value("symmetry", "complex-hermitian");
    if (sym == "complex-hermitian") m.symmetry = Symmetry::ComplexHermitian;
    else if (sym == "real-symmetric") m.symmetry = Symmetry::RealSymmetric;
    else throw DomainError("model file: unknown symmetry '" + sym + "'");

    if (doc.contains("family")) {
        const json& fam = doc.at("family");
        const std::string kind = fam.at("kind").get<std::string>();
        if (kind == "flat-semicircle") {
            return flat_model(doc.at("n").get<int>(), m.symmetry);
        }
        if (kind == "two-block") {
            const auto sizes = fam.at("sizes").get<std::vector<int>>();
            const auto vars = fam.at("variances").get<std::vector<double>>();
            const auto shifts = fam.at("shifts").get<std::vector<double>>();
            if (sizes.size() != 2 || vars.size() != 3 || shifts.size() != 2)
                throw DomainError("model file: two-block needs sizes[2], variances[3], shifts[2]");
            return two_block_model(sizes[0], sizes[1], vars[0], vars[1], vars[2], shifts[0],
                                   shifts[1], m.symmetry);
        }
        throw DomainError("model file: unknown family kind '" + kind + "'");
    }

    const int n = doc.at("n").get<int>();
    m.n = n;
    const auto a = doc.at("a").get<std::vector<double>>();
    if (static_cast<int>(a.size()) != n) throw DomainError("model file: a has wrong length");
    m.a = Eigen::Map<const Eigen::VectorXd>(a.data(), n);
    const auto s = doc.at("s").get<std::vector<std::vector<double>>>();
    m.s.resize(n, n);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(s[i].size()) != n)
            throw DomainError("model file: s row has wrong length");
        for (int j = 0; j < n; ++j) m.s(i, j) = s[i][j];
    }
    m.t = Eigen::MatrixXcd::Zero(n, n);
    if (doc.contains("t_re")) {
        const auto tre = doc.at("t_re").get<std::vector<std::vector<double>>>();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m.t(i, j) += tre[i][j];
    }
    if (doc.contains("t_im")) {
        const auto tim = doc.at("t_im").get<std::vector<std::vector<double>>>();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m.t(i, j) += cxd(0.0, tim[i][j]);
    }
    if (m.symmetry == Symmetry::RealSymmetric && !doc.contains("t_re")) {
        m.t = m.s.cast<cxd>();
        m.t.diagonal().setZero();
    }
    m.refresh_witnesses();
    return m;
}

}  // namespace

ModelSpec model_from_json_text(const std::string& text) {
    return model_from_json(json::parse(text));
}

ModelSpec load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("load_model: cannot open " + path);
    json doc;
    in >> doc;
    return model_from_json(doc);
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw DomainError("write_text: cannot open " + path);
    out << content;
}

void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw DomainError("write_csv: cannot open " + path);
    out << std::setprecision(12);
    for (std::size_t c = 0; c < columns.size(); ++c)
        out << columns[c] << (c + 1 < columns.size() ? ',' : '\n');
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c)
            out << row[c] << (c + 1 < row.size() ? ',' : '\n');
    }
}

std::vector<double> read_csv_column(const std::string& path, std::size_t column) {
    std::ifstream in(path);
    if (!in) throw DomainError("read_csv_column: cannot open " + path);
    std::vector<double> out;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t c = 0;
        double value = 0.0;
        bool ok = false;
        while (std::getline(ss, cell, ',')) {
            if (c == column) {
                try {
                    value = std::stod(cell);
                    ok = true;
                } catch (...) {
                    ok = false;  // header row
                }
                break;
            }
            ++c;
        }
        if (first && !ok) {
            first = false;
            continue;
        }
        first = false;
        if (ok) out.push_back(value);
    }
    return out;
}

void write_profile_csv(const std::string& path, const DensityProfile& profile) {
    std::vector<std::vector<double>> rows;
    rows.reserve(profile.grid.size());
    for (std::size_t i = 0; i < profile.grid.size(); ++i)
        rows.push_back({profile.grid[i], profile.rho[i], profile.eta_eval});
    write_csv(path, {"tau", "rho", "eta_eval"}, rows);
}

void write_svg_curves(const std::string& path, const std::string& title,
                      const std::vector<double>& x,
                      const std::vector<std::pair<std::string, std::vector<double>>>& series) {
    const int w = 720, h = 480, ml = 60, mr = 20, mt = 40, mb = 40;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (double v : x) {
        xmin = std::min(xmin, v);
        xmax = std::max(xmax, v);
    }
    for (const auto& [name, ys] : series)
        for (double v : ys) {
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    if (!(xmax > xmin)) xmax = xmin + 1.0;
    if (!(ymax > ymin)) ymax = ymin + 1.0;
    const double yspan = ymax - ymin;
    ymin -= 0.05 * yspan;
    ymax += 0.05 * yspan;
    auto px = [&](double v) { return ml + (v - xmin) / (xmax - xmin) * (w - ml - mr); };
    auto py = [&](double v) { return h - mb - (v - ymin) / (ymax - ymin) * (h - mt - mb); };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    std::ostringstream svg;
    svg << std::setprecision(8);
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h
        << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
    svg << "<text x='" << w / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title
        << "</text>\n";
    svg << "<rect x='" << ml << "' y='" << mt << "' width='" << (w - ml - mr) << "' height='"
        << (h - mt - mb) << "' fill='none' stroke='#888'/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        const double xv = xmin + (xmax - xmin) * tick / 4.0;
        const double yv = ymin + (ymax - ymin) * tick / 4.0;
        svg << "<text x='" << px(xv) << "' y='" << h - mb + 18
            << "' text-anchor='middle' font-size='11'>" << xv << "</text>\n";
        svg << "<text x='" << ml - 6 << "' y='" << py(yv) + 4
            << "' text-anchor='end' font-size='11'>" << yv << "</text>\n";
    }
    int ci = 0;
    for (const auto& [name, ys] : series) {
        svg << "<polyline fill='none' stroke='" << colors[ci % 5] << "' stroke-width='1.5' points='";
        for (std::size_t i = 0; i < x.size() && i < ys.size(); ++i)
            svg << px(x[i]) << "," << py(ys[i]) << " ";
        svg << "'/>\n";
        svg << "<text x='" << w - mr - 8 << "' y='" << mt + 16 + 16 * ci
            << "' text-anchor='end' font-size='12' fill='" << colors[ci % 5] << "'>" << name
            << "</text>\n";
        ++ci;
    }
    svg << "</svg>\n";
    write_text(path, svg.str());
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

std::string manifest_json(const std::string& command, const std::string& params_json,
                          std::uint64_t seed) {
    nlohmann::json doc;
    doc["command"] = command;
    doc["params"] = nlohmann::json::parse(params_json);
    doc["seed"] = seed;
    doc["config_hash"] = fnv1a(command + params_json + std::to_string(seed));
    doc["version"] = "1.0.0";
    return doc.dump(2);
}

}  // namespace io
}  // namespace cusp
