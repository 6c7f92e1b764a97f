#include "envcontour/io.hpp"

#include <cstdio>
#include <stdexcept>

#include <json.hpp>

namespace envc {

void write_text_atomic(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    std::FILE* f = std::fopen(tmp.c_str(), "w");
    if (!f) throw std::runtime_error("cannot write " + tmp);
    if (!text.empty() && std::fwrite(text.data(), 1, text.size(), f) != text.size()) {
        std::fclose(f);
        throw std::runtime_error("short write on " + tmp);
    }
    std::fclose(f);
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

namespace {

void append_num(std::string& s, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    s += buf;
}

}  // namespace

std::string polytope_vertices_csv(const Polytope& poly) {
    std::string s;
    for (int k = 0; k < poly.dim; ++k) {
        s += "x_" + std::to_string(k + 1);
        s += (k + 1 < poly.dim) ? ',' : '\n';
    }
    std::vector<int> order;
    if (poly.dim == 2 && poly.vertices.size() >= 3) {
        order = polygon_order_2d(poly);
    } else {
        order.resize(poly.vertices.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    }
    for (int i : order) {
        for (int k = 0; k < poly.dim; ++k) {
            append_num(s, poly.vertices[i][k]);
            s += (k + 1 < poly.dim) ? ',' : '\n';
        }
    }
    return s;
}

std::string polytope_facets_json(const Polytope& poly) {
    nlohmann::json j;
    j["dim"] = poly.dim;
    j["degenerate"] = poly.degenerate;
    j["vertices"] = poly.vertices;
    auto& fl = j["facets"] = nlohmann::json::array();
    for (const PolytopeFacet& f : poly.facets) {
        nlohmann::json jf;
        jf["vertices"] = f.vertices;
        jf["normal"] = f.normal;
        jf["offset"] = f.offset;
        fl.push_back(std::move(jf));
    }
    return j.dump(2) + "\n";
}

std::string polytope_obj(const Polytope& poly) {
    if (poly.dim != 3) throw std::invalid_argument("polytope_obj: polytope is not 3D");
    std::string s;
    for (const Vec& v : poly.vertices) {
        s += "v ";
        append_num(s, v[0]);
        s += ' ';
        append_num(s, v[1]);
        s += ' ';
        append_num(s, v[2]);
        s += '\n';
    }
    for (const PolytopeFacet& f : poly.facets) {
        for (size_t k = 2; k < f.vertices.size(); ++k) {
            s += "f " + std::to_string(f.vertices[0] + 1) + ' ' +
                 std::to_string(f.vertices[k - 1] + 1) + ' ' + std::to_string(f.vertices[k] + 1) +
                 '\n';
        }
    }
    return s;
}

SvgPlot::SvgPlot(double min_x, double max_x, double min_y, double max_y, int px)
    : min_x_(min_x), max_x_(max_x), min_y_(min_y), max_y_(max_y), px_(px) {
    const double spanx = max_x_ - min_x_, spany = max_y_ - min_y_;
    min_x_ -= 0.05 * spanx;
    max_x_ += 0.05 * spanx;
    min_y_ -= 0.05 * spany;
    max_y_ += 0.05 * spany;
}

double SvgPlot::tx(double x) const { return (x - min_x_) / (max_x_ - min_x_) * px_; }
double SvgPlot::ty(double y) const { return (max_y_ - y) / (max_y_ - min_y_) * px_; }

void SvgPlot::add_points(const std::vector<Vec>& pts, const std::string& color, double radius,
                         std::size_t max_count) {
    const std::size_t step = pts.size() > max_count ? pts.size() / max_count : 1;
    for (std::size_t i = 0; i < pts.size(); i += step) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.2f\" fill=\"%s\"/>\n",
                      tx(pts[i][0]), ty(pts[i][1]), radius, color.c_str());
        body_ += buf;
    }
}

void SvgPlot::add_polyline(const std::vector<Vec>& pts, bool closed, const std::string& color,
                           double width) {
    if (pts.empty()) return;
    std::string d = "M";
    for (const Vec& p : pts) {
        char buf[64];
        std::snprintf(buf, sizeof buf, " %.2f %.2f", tx(p[0]), ty(p[1]));
        d += buf;
    }
    if (closed) d += " Z";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", width);
    body_ += "<path d=\"" + d + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" +
             buf + "\"/>\n";
}

void SvgPlot::add_band(const std::vector<Vec>& outer, const std::vector<Vec>& inner,
                       const std::string& fill, double opacity) {
    if (outer.empty() || inner.empty()) return;
    std::string d;
    for (const auto* ring : {&outer, &inner}) {
        d += "M";
        for (const Vec& p : *ring) {
            char buf[64];
            std::snprintf(buf, sizeof buf, " %.2f %.2f", tx(p[0]), ty(p[1]));
            d += buf;
        }
        d += " Z ";
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "\" fill-rule=\"evenodd\" fill=\"%s\" fill-opacity=\"%.2f\"/>\n",
                  fill.c_str(), opacity);
    body_ += "<path d=\"" + d + buf;
}

void SvgPlot::add_text(double x_px, double y_px, const std::string& text) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" font-size=\"13\">", x_px, y_px);
    body_ += buf + text + "</text>\n";
}

std::string SvgPlot::finish() const {
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(px_) +
                    "\" height=\"" + std::to_string(px_) + "\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += body_;
    s += "</svg>\n";
    return s;
}

}  // namespace envc
