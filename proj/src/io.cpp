#include "bowen/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "bowen/errors.hpp"

namespace bowen {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
  for (const auto& h : header) field(h);
  end_row();
}

void CsvWriter::sep() {
  if (in_row_ > 0) text_ += ',';
  ++in_row_;
}

CsvWriter& CsvWriter::field(double x) {
  sep();
  text_ += format_double(x);
  return *this;
}

CsvWriter& CsvWriter::field(long long x) {
  sep();
  text_ += std::to_string(x);
  return *this;
}

CsvWriter& CsvWriter::field(std::string_view s) {
  sep();
  text_ += s;
  return *this;
}

CsvWriter& CsvWriter::empty_field() {
  sep();
  return *this;
}

void CsvWriter::end_row() {
  if (in_row_ != columns_) throw std::logic_error("csv row has the wrong number of fields");
  text_ += '\n';
  in_row_ = 0;
}

void write_file_atomic(const std::string& path, std::string_view bytes) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error("write to '" + tmp.string() + "' failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot move output into place at '" + path + "'");
  }
}

Image::Image(int w, int h) : width(w), height(h) {
  if (w <= 0 || h <= 0) throw std::invalid_argument("image dimensions must be positive");
  rgb.assign(static_cast<std::size_t>(w) * h * 3, 255);
}

void Image::set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const std::size_t k = (static_cast<std::size_t>(y) * width + x) * 3;
  rgb[k] = r;
  rgb[k + 1] = g;
  rgb[k + 2] = b;
}

std::string Image::to_ppm() const {
  std::string out = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(rgb.data()), rgb.size());
  return out;
}

Rect cloud_bounds(const PointCloud& cloud, double margin) {
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& e : cloud.points) {
    if (e.point.is_infinity()) continue;
    const Cx z = e.point.value();
    xmin = std::min(xmin, z.real());
    xmax = std::max(xmax, z.real());
    ymin = std::min(ymin, z.imag());
    ymax = std::max(ymax, z.imag());
  }
  if (!(xmin <= xmax)) return Rect{-1.0, 1.0, -1.0, 1.0};
  const double side = std::max({xmax - xmin, ymax - ymin, 1e-9});
  const double pad = margin * side;
  return Rect{xmin - pad, xmax + pad, ymin - pad, ymax + pad};
}

Image render_cloud(const PointCloud& cloud, const Rect& vp, int width, int height,
                   bool depth_coloring) {
  Image img(width, height);
  const int max_depth = std::max(cloud.meta.depth, 1);
  for (const auto& e : cloud.points) {
    if (e.point.is_infinity()) continue;
    const Cx z = e.point.value();
    const double u = (z.real() - vp.xmin) / (vp.xmax - vp.xmin);
    const double v = (vp.ymax - z.imag()) / (vp.ymax - vp.ymin);
    if (u < 0.0 || u >= 1.0 || v < 0.0 || v >= 1.0) continue;
    const int px = std::min(width - 1, static_cast<int>(u * width));
    const int py = std::min(height - 1, static_cast<int>(v * height));
    if (depth_coloring) {
      const double s = static_cast<double>(e.depth) / max_depth;
      img.set(px, py, static_cast<std::uint8_t>(std::lround(220 * s)), 0,
              static_cast<std::uint8_t>(std::lround(220 * (1.0 - s))));
    } else {
      img.set(px, py, 0, 0, 0);
    }
  }
  return img;
}

}  // namespace bowen
