#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace sea {

using Matrix = Eigen::MatrixXd;

// Interleaved 8-bit RGB raster.
struct Image {
  int h = 0;
  int w = 0;
  std::vector<std::uint8_t> rgb;  // size h*w*3

  static Image filled(int h, int w, std::uint8_t r, std::uint8_t g,
                      std::uint8_t b);

  std::uint8_t* px(int y, int x) { return rgb.data() + (y * w + x) * 3; }
  const std::uint8_t* px(int y, int x) const {
    return rgb.data() + (y * w + x) * 3;
  }
  bool empty() const { return rgb.empty(); }
};

struct GrayImage {
  int h = 0;
  int w = 0;
  std::vector<std::uint8_t> v;  // size h*w
};

// Codec round-trips (OpenCV imgcodecs behind the scenes). Throw IoError.
Image load_image(const std::filesystem::path& path);
void save_jpeg(const std::filesystem::path& path, const Image& img);
void save_png(const std::filesystem::path& path, const Image& img);
GrayImage load_gray(const std::filesystem::path& path);
void save_gray_png(const std::filesystem::path& path, const GrayImage& img);

// One RGB channel as doubles in [0,1]; (row, col) indexing.
Matrix channel_to_matrix(const Image& img, int channel);

// Bilinear resample with half-pixel centers (align_corners = false). This is
// the single resize used everywhere: encoder canonicalization, heatmap
// upsampling and metric-side resizing to GT shape.
Matrix resize_bilinear(const Matrix& src, int out_h, int out_w);
Image resize_bilinear(const Image& src, int out_h, int out_w);

// Grayscale byte image <-> [0,1] matrix (divide / multiply by 255).
Matrix gray_to_unit(const GrayImage& img);
GrayImage unit_to_gray(const Matrix& m);

// Alpha-blends a hot colormap of `heat01` (values in [0,1], any resolution)
// onto `base`; per-pixel opacity is alpha * heat.
Image overlay_heatmap(const Image& base, const Matrix& heat01, double alpha);

}  // namespace sea
