#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "roaddbn/graph.hpp"

namespace roaddbn {

struct Color {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Color&, const Color&) = default;
};

/// 8-bit RGB raster, rows stored top to bottom.
///
/// Pixel (col, row) has its center at the mathematical position
/// (col, height - 1 - row); the y flip happens only here.
class Image {
 public:
  Image() = default;
  Image(int width, int height, Color fill = {});

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return width_ == 0 || height_ == 0; }

  Color pixel(int col, int row) const;
  void set_pixel(int col, int row, Color color);

  /// Pixel whose center is nearest to `p`; false when outside the raster.
  bool locate(const Point& p, int& col, int& row) const;

  Point center_of(int col, int row) const {
    return {static_cast<double>(col), static_cast<double>(height_ - 1 - row)};
  }

  /// Box spanned by the pixel centers.
  Box bounds() const {
    return {0.0, 0.0, static_cast<double>(width_ - 1), static_cast<double>(height_ - 1)};
  }

  const std::vector<std::uint8_t>& bytes() const { return data_; }
  std::vector<std::uint8_t>& bytes() { return data_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

double point_segment_distance(const Point& p, const Point& a, const Point& b);

/// Antialiased coverage of a pixel centered at `p` by a stroke of the given
/// width along segment ab: clamp(width/2 + 1/2 - dist, 0, 1).
double stroke_coverage(const Point& p, const Point& a, const Point& b, double width);

/// Blends a stroke into the image; fully covered pixels take `color` exactly.
void draw_segment(Image& image, const Point& a, const Point& b, double width, Color color);

void draw_disc(Image& image, const Point& center, double radius, Color color);

void draw_graph(Image& image, const RoadGraph& graph, double width, Color color);

/// Single-channel coverage plane of `graph` over a size x size window whose
/// column 0 / row 0 pixel center sits at (origin_x, origin_y) and whose rows
/// run downward in y. Values are the max coverage over edges.
std::vector<double> render_graph_plane(const RoadGraph& graph, double origin_x, double origin_y,
                                       int size, double width);

Image read_png(const std::string& path);

/// Writes an 8-bit RGB PNG; `comment` (if non-empty) goes into a tEXt chunk.
void write_png(const std::string& path, const Image& image, const std::string& comment = {});

}  // namespace roaddbn
