#pragma once

#include <string>
#include <vector>

#include "envcontour/contour.hpp"
#include "envcontour/geometry.hpp"

namespace envc {

// Writes via a temp file in the same directory plus rename.
void write_text_atomic(const std::string& path, const std::string& text);

std::string polytope_vertices_csv(const Polytope& poly);  // 2D rows follow the polygon order
std::string polytope_facets_json(const Polytope& poly);
std::string polytope_obj(const Polytope& poly);  // 3D, facets fan-triangulated

// Simple SVG scatter/line plot with data-space coordinates, y up.
class SvgPlot {
public:
    SvgPlot(double min_x, double max_x, double min_y, double max_y, int px = 720);

    void add_points(const std::vector<Vec>& pts, const std::string& color, double radius,
                    std::size_t max_count = 4000);
    void add_polyline(const std::vector<Vec>& pts, bool closed, const std::string& color,
                      double width);
    // region between two closed curves, filled with the even-odd rule
    void add_band(const std::vector<Vec>& outer, const std::vector<Vec>& inner,
                  const std::string& fill, double opacity);
    void add_text(double x_px, double y_px, const std::string& text);

    std::string finish() const;

private:
    double tx(double x) const;
    double ty(double y) const;
    double min_x_, max_x_, min_y_, max_y_;
    int px_;
    std::string body_;
};

}  // namespace envc
