#include "scenegen/render.hpp"

#include <array>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace scenegen {

namespace {

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};

class Canvas {
 public:
  Canvas(const Bounds& b, const RenderOptions& opts) : b_(b), opts_(opts) {}

  double width() const { return (b_.xmax - b_.xmin) * opts_.pixels_per_meter + 2 * opts_.margin; }
  double height() const { return (b_.ymax - b_.ymin) * opts_.pixels_per_meter + 2 * opts_.margin; }

  // SVG y grows downwards.
  Vec2 px(const Vec2& p) const {
    return {opts_.margin + (p.x() - b_.xmin) * opts_.pixels_per_meter,
            opts_.margin + (b_.ymax - p.y()) * opts_.pixels_per_meter};
  }

  std::string coords(const Points2& pts, bool path) const {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2);
    for (Eigen::Index k = 0; k < pts.rows(); ++k) {
      const Vec2 q = px(pts.row(k).transpose());
      if (path) os << (k == 0 ? "M" : " L");
      else if (k > 0) os << ' ';
      os << q.x() << ',' << q.y();
    }
    return os.str();
  }

 private:
  Bounds b_;
  RenderOptions opts_;
};

Bounds extent(const VectorMap& map, const Scenario* sc) {
  Bounds b = map.bounds;
  if (!(b.xmax > b.xmin) || !(b.ymax > b.ymin)) b = lane_bounds(map.lanes);
  if (sc != nullptr) {
    for (const auto& a : sc->scene.agents) {
      b.xmin = std::min(b.xmin, a.x);
      b.xmax = std::max(b.xmax, a.x);
      b.ymin = std::min(b.ymin, a.y);
      b.ymax = std::max(b.ymax, a.y);
    }
  }
  return b;
}

}  // namespace

std::string render_svg(const VectorMap& map, const Scenario* scenario,
                       const std::vector<CandidateSet>* candidates, const RenderOptions& opts) {
  const Canvas cv(extent(map, scenario), opts);
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << cv.width() << "\" height=\""
     << cv.height() << "\" viewBox=\"0 0 " << cv.width() << ' ' << cv.height() << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (const auto& lane : map.lanes) {
    os << "<path class=\"lane\" d=\"" << cv.coords(lane.points, true)
       << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
  }
  if (candidates != nullptr) {
    for (std::size_t i = 0; i < candidates->size(); ++i) {
      for (const auto& c : (*candidates)[i]) {
        os << "<polyline class=\"candidate\" points=\"" << cv.coords(c.xy, false)
           << "\" fill=\"none\" stroke=\"" << kPalette[i % kPalette.size()]
           << "\" stroke-width=\"0.6\" stroke-opacity=\"0.5\"/>\n";
      }
    }
  }
  if (scenario != nullptr) {
    for (std::size_t i = 0; i < scenario->trajectories.size(); ++i) {
      os << "<path class=\"trajectory\" d=\"" << cv.coords(scenario->trajectories[i], true)
         << "\" fill=\"none\" stroke=\"" << kPalette[i % kPalette.size()]
         << "\" stroke-width=\"3\"/>\n";
    }
    for (std::size_t i = 0; i < scenario->scene.agents.size(); ++i) {
      const AgentInit& a = scenario->scene.agents[i];
      const Vec2 p = cv.px(a.position());
      const Vec2 tip = cv.px(a.position() + opts.heading_tick * Vec2(std::cos(a.theta), std::sin(a.theta)));
      const char* color = kPalette[i % kPalette.size()];
      os << "<circle class=\"agent\" cx=\"" << p.x() << "\" cy=\"" << p.y() << "\" r=\"4\" fill=\""
         << color << "\"/>\n";
      os << "<line class=\"heading\" x1=\"" << p.x() << "\" y1=\"" << p.y() << "\" x2=\"" << tip.x()
         << "\" y2=\"" << tip.y() << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace scenegen
