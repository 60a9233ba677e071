#pragma once

// SVG diagrams of a traced skizze: faces filled by the quadrant of P, arcs
// joined into strokes through their vertices, glyphs for roots, critical
// points and leaf slots.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "skizze/tracer.hpp"

namespace skizze {

struct RenderSpec {
  int size = 640;           // square canvas, pixels
  double box = 1.08;        // half-width of the view, in units of the trace radius
  int fill_cells = 192;     // fill raster resolution per side
  std::string red = "#c0392b";   // Im P = 0
  std::string blue = "#2467b3";  // Re P = 0
  std::array<std::string, 4> palette{"#fbe3c9", "#d8eccf", "#d3e2f4", "#ead9f0"};  // faces A..D
  double stroke_width = 2.2;
};

struct Rendering {
  std::string svg;
  int red_strokes = 0;
  int blue_strokes = 0;
  int leaves = 0;
};

namespace detail {

// Face letter from the signs of P: A is Re > 0, Im > 0, then counterclockwise.
inline int quadrant(Complex w) {
  if (w.imag() >= 0) return w.real() >= 0 ? 0 : 1;
  return w.real() < 0 ? 2 : 3;
}

struct Stroke {
  Color color;
  std::vector<Complex> points;
};

// Arcs are chained through a vertex by pairing each branch with the opposite
// one of its color, so an axis through a root or a saddle stays one stroke.
inline std::vector<Stroke> chain_arcs(const Skizze& s) {
  std::map<std::pair<int, int>, std::pair<int, bool>> at;  // (vertex, branch) -> (arc, enters at start)
  for (std::size_t a = 0; a < s.arcs.size(); ++a) {
    const auto& arc = s.arcs[a];
    at[{arc.start.id, arc.start.branch}] = {static_cast<int>(a), true};
    if (arc.end.kind == EndKind::Vertex) at[{arc.end.id, arc.end.branch}] = {static_cast<int>(a), false};
  }
  auto partner = [&](int v, int b) {
    const auto& sv = s.vertices[static_cast<std::size_t>(v)];
    std::vector<int> same;
    for (std::size_t k = 0; k < sv.branch_color.size(); ++k)
      if (sv.branch_color[k] == sv.branch_color[static_cast<std::size_t>(b)]) same.push_back(static_cast<int>(k));
    const std::size_t half = same.size() / 2;
    for (std::size_t j = 0; j < same.size(); ++j)
      if (same[j] == b) return same[(j + half) % same.size()];
    return -1;
  };

  std::vector<bool> used(s.arcs.size(), false);
  std::vector<Stroke> out;
  auto walk = [&](int a, bool forward) {
    Stroke st{s.arcs[static_cast<std::size_t>(a)].color, {}};
    while (a >= 0 && !used[static_cast<std::size_t>(a)]) {
      used[static_cast<std::size_t>(a)] = true;
      const auto& arc = s.arcs[static_cast<std::size_t>(a)];
      std::vector<Complex> pts = arc.polyline;
      if (!forward) std::reverse(pts.begin(), pts.end());
      st.points.insert(st.points.end(), pts.begin() + (st.points.empty() ? 0 : 1), pts.end());
      const ArcEnd& exit = forward ? arc.end : arc.start;
      if (exit.kind != EndKind::Vertex) break;
      int nb = partner(exit.id, exit.branch);
      auto it = at.find({exit.id, nb});
      if (nb < 0 || it == at.end()) break;
      a = it->second.first;
      forward = it->second.second;
    }
    return st;
  };
  for (std::size_t a = 0; a < s.arcs.size(); ++a)
    if (!used[a] && s.arcs[a].end.kind == EndKind::Leaf) out.push_back(walk(static_cast<int>(a), false));
  for (std::size_t a = 0; a < s.arcs.size(); ++a)
    if (!used[a]) out.push_back(walk(static_cast<int>(a), true));
  return out;
}

}  // namespace detail

inline Rendering render_svg(const Skizze& s, const RenderSpec& spec = {}) {
  Rendering r;
  const double B = spec.box * s.radius;
  const double px = spec.size / (2.0 * B);
  auto X = [&](Complex z) { return (z.real() + B) * px; };
  auto Y = [&](Complex z) { return (B - z.imag()) * px; };
  auto num = [](double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
  };
  auto pt = [&](Complex z) { return num(X(z)) + "," + num(Y(z)); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.size << "\" height=\"" << spec.size
     << "\" viewBox=\"0 0 " << spec.size << ' ' << spec.size << "\">\n";
  os << "<defs><clipPath id=\"disc\"><circle cx=\"" << num(X(0.0)) << "\" cy=\"" << num(Y(0.0)) << "\" r=\"" << num(s.radius * px) << "\"/></clipPath></defs>\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";

  // faces: one rect per run of equal quadrant along a raster row
  os << "<g clip-path=\"url(#disc)\" shape-rendering=\"crispEdges\">\n";
  const int N = spec.fill_cells;
  const double cell = 2.0 * B / N;
  for (int j = 0; j < N; ++j) {
    double y = B - (j + 0.5) * cell;
    int run_start = 0, run_q = -1;
    for (int i = 0; i <= N; ++i) {
      int q = -1;
      if (i < N) q = detail::quadrant(s.source(Complex(-B + (i + 0.5) * cell, y)));
      if (q != run_q) {
        if (run_q >= 0)
          os << "<rect class=\"face " << static_cast<char>('A' + run_q) << "\" x=\"" << num(run_start * cell * px) << "\" y=\""
             << num(j * cell * px) << "\" width=\"" << num((i - run_start) * cell * px + 0.5) << "\" height=\""
             << num(cell * px + 0.5) << "\" fill=\"" << spec.palette[static_cast<std::size_t>(run_q)] << "\"/>\n";
        run_start = i;
        run_q = q;
      }
    }
  }
  os << "</g>\n";
  os << "<circle cx=\"" << num(X(0.0)) << "\" cy=\"" << num(Y(0.0)) << "\" r=\"" << num(s.radius * px)
     << "\" fill=\"none\" stroke=\"#888888\" stroke-width=\"1\"/>\n";

  os << "<g clip-path=\"url(#disc)\">\n";
  for (const auto& st : detail::chain_arcs(s)) {
    bool red = st.color == Color::Red;
    (red ? r.red_strokes : r.blue_strokes)++;
    os << "<path class=\"stroke " << (red ? "red" : "blue") << "\" fill=\"none\" stroke=\"" << (red ? spec.red : spec.blue)
       << "\" stroke-width=\"" << spec.stroke_width << "\" stroke-linejoin=\"round\" d=\"M";
    for (std::size_t i = 0; i < st.points.size(); ++i) os << (i ? " L" : "") << pt(st.points[i]);
    os << "\"/>\n";
  }
  os << "</g>\n";

  for (std::size_t k = 0; k < s.leaf_angle.size(); ++k) {
    Complex z = std::polar(s.radius, s.leaf_angle[k]);
    os << "<circle class=\"leaf\" data-slot=\"" << k << "\" cx=\"" << num(X(z)) << "\" cy=\"" << num(Y(z))
       << "\" r=\"3.5\" fill=\"#ffffff\" stroke=\"#333333\" stroke-width=\"1.2\"/>\n";
    ++r.leaves;
  }
  for (const auto& v : s.vertices) {
    if (v.kind == VertexKind::Root) {
      os << "<circle class=\"root\" cx=\"" << num(X(v.position)) << "\" cy=\"" << num(Y(v.position)) << "\" r=\""
         << 4 + v.multiplicity << "\" fill=\"#111111\"/>\n";
      if (v.multiplicity > 1)
        os << "<text x=\"" << num(X(v.position) + 8) << "\" y=\"" << num(Y(v.position) - 8)
           << "\" font-size=\"11\" font-family=\"sans-serif\">" << v.multiplicity << "</text>\n";
    } else {
      const std::string& c = v.color == Color::Red ? spec.red : spec.blue;
      os << "<rect class=\"crit\" x=\"" << num(X(v.position) - 4) << "\" y=\"" << num(Y(v.position) - 4)
         << "\" width=\"8\" height=\"8\" fill=\"#ffffff\" stroke=\"" << c << "\" stroke-width=\"2\"/>\n";
    }
  }
  os << "</svg>\n";
  r.svg = os.str();
  return r;
}

}  // namespace skizze
