#pragma once

// CSV and PPM emission. Files are written to a temporary sibling and renamed
// into place, so a failed run never leaves a partial file behind.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "bowen/geometry.hpp"

namespace bowen {

// 17 significant digits, '.' separator; nan and inf spelled out.
std::string format_double(double x);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  CsvWriter& field(double x);
  CsvWriter& field(long long x);
  CsvWriter& field(std::string_view s);
  CsvWriter& empty_field();
  void end_row();
  const std::string& str() const { return text_; }

 private:
  void sep();
  std::string text_;
  std::size_t columns_ = 0, in_row_ = 0;
};

void write_file_atomic(const std::string& path, std::string_view bytes);

struct Image {
  int width = 0, height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, top row first

  Image(int w, int h);
  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b);
  std::string to_ppm() const;  // binary P6, maxval 255
};

// Bounding box of the finite points, padded by `margin` of the larger side.
Rect cloud_bounds(const PointCloud& cloud, double margin = 0.05);

// White background, black points; depth coloring runs blue (shallow) to
// red (deep). y grows upward in the viewport.
Image render_cloud(const PointCloud& cloud, const Rect& viewport, int width, int height,
                   bool depth_coloring = false);

}  // namespace bowen
