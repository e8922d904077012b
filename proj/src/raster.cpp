#include "roaddbn/raster.hpp"

#include <algorithm>
#include <cmath>

#include "roaddbn/errors.hpp"

namespace roaddbn {

Image::Image(int width, int height, Color fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw ArgumentError("image size must be non-negative");
  data_.resize(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < data_.size(); i += 3) {
    data_[i] = fill.r;
    data_[i + 1] = fill.g;
    data_[i + 2] = fill.b;
  }
}

Color Image::pixel(int col, int row) const {
  const std::size_t at = (static_cast<std::size_t>(row) * width_ + col) * 3;
  return {data_[at], data_[at + 1], data_[at + 2]};
}

void Image::set_pixel(int col, int row, Color color) {
  const std::size_t at = (static_cast<std::size_t>(row) * width_ + col) * 3;
  data_[at] = color.r;
  data_[at + 1] = color.g;
  data_[at + 2] = color.b;
}

bool Image::locate(const Point& p, int& col, int& row) const {
  const double c = std::round(p.x);
  const double r = std::round(static_cast<double>(height_ - 1) - p.y);
  if (c < 0 || r < 0 || c >= width_ || r >= height_) return false;
  col = static_cast<int>(c);
  row = static_cast<int>(r);
  return true;
}

double point_segment_distance(const Point& p, const Point& a, const Point& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double length2 = dx * dx + dy * dy;
  double t = 0.0;
  if (length2 > 0.0) t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / length2, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

double stroke_coverage(const Point& p, const Point& a, const Point& b, double width) {
  return std::clamp(0.5 * width + 0.5 - point_segment_distance(p, a, b), 0.0, 1.0);
}

namespace {

std::uint8_t blend(std::uint8_t under, std::uint8_t over, double alpha) {
  return static_cast<std::uint8_t>(std::lround(under + (over - under) * alpha));
}

// Pixel rectangle (inclusive) that can be touched within `reach` of the
// segment ab.
struct PixelSpan {
  int col0, col1, row0, row1;
};

PixelSpan span_for(const Image& image, const Point& a, const Point& b, double reach) {
  const double min_x = std::min(a.x, b.x) - reach;
  const double max_x = std::max(a.x, b.x) + reach;
  const double min_y = std::min(a.y, b.y) - reach;
  const double max_y = std::max(a.y, b.y) + reach;
  const int top = image.height() - 1;
  return {std::max(0, static_cast<int>(std::floor(min_x))),
          std::min(image.width() - 1, static_cast<int>(std::ceil(max_x))),
          std::max(0, static_cast<int>(std::floor(top - max_y))),
          std::min(image.height() - 1, static_cast<int>(std::ceil(top - min_y)))};
}

}  // namespace

void draw_segment(Image& image, const Point& a, const Point& b, double width, Color color) {
  const PixelSpan span = span_for(image, a, b, 0.5 * width + 1.0);
  for (int row = span.row0; row <= span.row1; ++row) {
    for (int col = span.col0; col <= span.col1; ++col) {
      const double alpha = stroke_coverage(image.center_of(col, row), a, b, width);
      if (alpha <= 0.0) continue;
      const Color under = image.pixel(col, row);
      image.set_pixel(col, row, {blend(under.r, color.r, alpha), blend(under.g, color.g, alpha),
                                 blend(under.b, color.b, alpha)});
    }
  }
}

void draw_disc(Image& image, const Point& center, double radius, Color color) {
  draw_segment(image, center, center, 2.0 * radius, color);
}

void draw_graph(Image& image, const RoadGraph& graph, double width, Color color) {
  for (const auto& [a, b] : graph.edges()) draw_segment(image, graph.vertex(a), graph.vertex(b), width, color);
}

std::vector<double> render_graph_plane(const RoadGraph& graph, double origin_x, double origin_y,
                                       int size, double width) {
  std::vector<double> plane(static_cast<std::size_t>(size) * size, 0.0);
  const double reach = 0.5 * width + 1.0;
  const double max_x = origin_x + size - 1;
  const double min_y = origin_y - (size - 1);
  for (const auto& [ia, ib] : graph.edges()) {
    const Point& a = graph.vertex(ia);
    const Point& b = graph.vertex(ib);
    const double lo_x = std::min(a.x, b.x) - reach;
    const double hi_x = std::max(a.x, b.x) + reach;
    const double lo_y = std::min(a.y, b.y) - reach;
    const double hi_y = std::max(a.y, b.y) + reach;
    if (hi_x < origin_x || lo_x > max_x || hi_y < min_y || lo_y > origin_y) continue;
    const int col0 = std::max(0, static_cast<int>(std::floor(lo_x - origin_x)));
    const int col1 = std::min(size - 1, static_cast<int>(std::ceil(hi_x - origin_x)));
    const int row0 = std::max(0, static_cast<int>(std::floor(origin_y - hi_y)));
    const int row1 = std::min(size - 1, static_cast<int>(std::ceil(origin_y - lo_y)));
    for (int row = row0; row <= row1; ++row) {
      for (int col = col0; col <= col1; ++col) {
        const Point p{origin_x + col, origin_y - row};
        double& cell = plane[static_cast<std::size_t>(row) * size + col];
        cell = std::max(cell, stroke_coverage(p, a, b, width));
      }
    }
  }
  return plane;
}

}  // namespace roaddbn
