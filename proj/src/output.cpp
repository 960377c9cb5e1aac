#include "randman/harness.hpp"

#include "randman/errors.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace randman {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

}  // namespace

std::string results_csv(const ExperimentResult& result) {
    const bool per_k = result.config.kind != ExperimentKind::ZeroCount;
    std::ostringstream out;
    if (per_k) out << "k,";
    out << "replicate";
    for (const auto& c : result.columns) out << ',' << c;
    out << '\n';
    for (const auto& r : result.replicates) {
        if (r.excluded) continue;
        if (per_k) out << r.k << ',';
        out << r.replicate;
        for (double v : r.payload) out << ',' << fmt(v);
        out << '\n';
    }
    return out.str();
}

std::string results_svg(const ExperimentResult& result) {
    std::vector<std::size_t> series;
    if (result.config.kind == ExperimentKind::Converge) {
        series = {0, 1, 2};
    } else if (result.config.kind == ExperimentKind::LkcConverge) {
        const std::size_t m1 = result.columns.size() / 2;
        for (std::size_t j = 0; j < m1; ++j) series.push_back(m1 + j);
    } else {
        return {};
    }

    // Median per k and series; non-positive medians cannot go on a log axis.
    std::map<std::size_t, std::vector<std::pair<double, double>>> lines;
    for (int k : result.config.k_list) {
        for (std::size_t s : series) {
            std::vector<double> v;
            for (const auto& r : result.replicates)
                if (r.k == k && !r.excluded) v.push_back(r.payload[s]);
            if (v.empty()) continue;
            double med = median(v);
            if (med > 0.0) lines[s].emplace_back(std::log10(k), std::log10(med));
        }
    }
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& [s, pts] : lines)
        for (auto [x, y] : pts) {
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    if (x0 > x1) return {};
    if (x1 - x0 < 1e-9) { x0 -= 0.5; x1 += 0.5; }
    if (y1 - y0 < 1e-9) { y0 -= 0.5; y1 += 0.5; }

    const double W = 640, H = 480, L = 70, R = 150, T = 30, B = 50;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
        << "\" stroke=\"black\"/>\n";
    for (int k : result.config.k_list) {
        double x = px(std::log10(k));
        out << "<text x=\"" << x << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">" << k
            << "</text>\n";
    }
    for (int i = 0; i <= 4; ++i) {
        double y = y0 + (y1 - y0) * i / 4.0;
        out << "<text x=\"" << L - 6 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">"
            << fmt(std::pow(10.0, y)).substr(0, 8) << "</text>\n";
    }
    out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10
        << "\" text-anchor=\"middle\">k (log scale)</text>\n";
    out << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 16 "
        << (T + H - B) / 2 << ")\" text-anchor=\"middle\">median deviation (log scale)</text>\n";
    std::size_t idx = 0;
    for (const auto& [s, pts] : lines) {
        const char* colour = kPalette[idx % 5];
        out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"";
        for (auto [x, y] : pts) out << px(x) << ',' << py(y) << ' ';
        out << "\"/>\n";
        for (auto [x, y] : pts)
            out << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << colour
                << "\"/>\n";
        double ly = T + 20 + 18 * static_cast<double>(idx);
        out << "<line x1=\"" << W - R + 15 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 35
            << "\" y2=\"" << ly << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << W - R + 40 << "\" y=\"" << ly + 4 << "\">" << result.columns[s]
            << "</text>\n";
        ++idx;
    }
    out << "</svg>\n";
    return out.str();
}

void emit_outputs(const ExperimentResult& result, const ExperimentConfig& cfg) {
    if (result.replicates.empty()) throw InvalidArgument("emit_outputs: no results");
    namespace fs = std::filesystem;
    const fs::path dir(cfg.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    const std::string stem = to_string(result.config.kind);
    write_file(dir / (stem + ".csv"), results_csv(result));
    write_file(dir / (stem + "_summary.json"), result.summary.dump(2) + "\n");
    if (cfg.plot) {
        std::string svg = results_svg(result);
        if (!svg.empty()) write_file(dir / (stem + ".svg"), svg);
    }
}

}  // namespace randman
