#include "sea/image.hpp"

#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <cmath>

#include "sea/errors.hpp"

namespace sea {

Image Image::filled(int h, int w, std::uint8_t r, std::uint8_t g,
                    std::uint8_t b) {
  Image img;
  img.h = h;
  img.w = w;
  img.rgb.resize(static_cast<std::size_t>(h) * w * 3);
  for (int i = 0; i < h * w; ++i) {
    img.rgb[i * 3 + 0] = r;
    img.rgb[i * 3 + 1] = g;
    img.rgb[i * 3 + 2] = b;
  }
  return img;
}

Image load_image(const std::filesystem::path& path) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw IoError("cannot read image: " + path.string());
  Image img;
  img.h = bgr.rows;
  img.w = bgr.cols;
  img.rgb.resize(static_cast<std::size_t>(img.h) * img.w * 3);
  for (int y = 0; y < img.h; ++y) {
    const auto* row = bgr.ptr<std::uint8_t>(y);
    for (int x = 0; x < img.w; ++x) {
      std::uint8_t* out = img.px(y, x);
      out[0] = row[x * 3 + 2];
      out[1] = row[x * 3 + 1];
      out[2] = row[x * 3 + 0];
    }
  }
  return img;
}

static cv::Mat to_bgr(const Image& img) {
  cv::Mat bgr(img.h, img.w, CV_8UC3);
  for (int y = 0; y < img.h; ++y) {
    auto* row = bgr.ptr<std::uint8_t>(y);
    for (int x = 0; x < img.w; ++x) {
      const std::uint8_t* in = img.px(y, x);
      row[x * 3 + 0] = in[2];
      row[x * 3 + 1] = in[1];
      row[x * 3 + 2] = in[0];
    }
  }
  return bgr;
}

void save_jpeg(const std::filesystem::path& path, const Image& img) {
  if (img.empty()) throw IoError("refusing to write empty image");
  if (!cv::imwrite(path.string(), to_bgr(img), {cv::IMWRITE_JPEG_QUALITY, 95}))
    throw IoError("cannot write image: " + path.string());
}

void save_png(const std::filesystem::path& path, const Image& img) {
  if (img.empty()) throw IoError("refusing to write empty image");
  if (!cv::imwrite(path.string(), to_bgr(img)))
    throw IoError("cannot write image: " + path.string());
}

GrayImage load_gray(const std::filesystem::path& path) {
  cv::Mat g = cv::imread(path.string(), cv::IMREAD_GRAYSCALE);
  if (g.empty()) throw IoError("cannot read image: " + path.string());
  GrayImage img;
  img.h = g.rows;
  img.w = g.cols;
  img.v.resize(static_cast<std::size_t>(img.h) * img.w);
  for (int y = 0; y < img.h; ++y) {
    const auto* row = g.ptr<std::uint8_t>(y);
    std::copy(row, row + img.w, img.v.begin() + static_cast<std::size_t>(y) * img.w);
  }
  return img;
}

void save_gray_png(const std::filesystem::path& path, const GrayImage& img) {
  cv::Mat g(img.h, img.w, CV_8UC1);
  for (int y = 0; y < img.h; ++y)
    std::copy(img.v.begin() + static_cast<std::size_t>(y) * img.w,
              img.v.begin() + static_cast<std::size_t>(y + 1) * img.w,
              g.ptr<std::uint8_t>(y));
  if (!cv::imwrite(path.string(), g))
    throw IoError("cannot write image: " + path.string());
}

Matrix channel_to_matrix(const Image& img, int channel) {
  Matrix m(img.h, img.w);
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x)
      m(y, x) = img.px(y, x)[channel] / 255.0;
  return m;
}

Matrix resize_bilinear(const Matrix& src, int out_h, int out_w) {
  if (src.rows() <= 0 || src.cols() <= 0)
    throw ShapeError("resize_bilinear: empty source");
  if (out_h <= 0 || out_w <= 0)
    throw ShapeError("resize_bilinear: non-positive target size");
  const int in_h = static_cast<int>(src.rows());
  const int in_w = static_cast<int>(src.cols());
  Matrix out(out_h, out_w);
  const double sy = static_cast<double>(in_h) / out_h;
  const double sx = static_cast<double>(in_w) / out_w;
  for (int y = 0; y < out_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, static_cast<double>(in_h - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, in_h - 1);
    const double wy = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, static_cast<double>(in_w - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, in_w - 1);
      const double wx = fx - x0;
      out(y, x) = (1 - wy) * ((1 - wx) * src(y0, x0) + wx * src(y0, x1)) +
                  wy * ((1 - wx) * src(y1, x0) + wx * src(y1, x1));
    }
  }
  return out;
}

Image resize_bilinear(const Image& src, int out_h, int out_w) {
  Image out;
  out.h = out_h;
  out.w = out_w;
  out.rgb.resize(static_cast<std::size_t>(out_h) * out_w * 3);
  for (int c = 0; c < 3; ++c) {
    Matrix m = resize_bilinear(channel_to_matrix(src, c), out_h, out_w);
    for (int y = 0; y < out_h; ++y)
      for (int x = 0; x < out_w; ++x)
        out.px(y, x)[c] = static_cast<std::uint8_t>(
            std::clamp(std::lround(m(y, x) * 255.0), 0L, 255L));
  }
  return out;
}

Matrix gray_to_unit(const GrayImage& img) {
  Matrix m(img.h, img.w);
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x)
      m(y, x) = img.v[static_cast<std::size_t>(y) * img.w + x] / 255.0;
  return m;
}

GrayImage unit_to_gray(const Matrix& m) {
  GrayImage img;
  img.h = static_cast<int>(m.rows());
  img.w = static_cast<int>(m.cols());
  img.v.resize(static_cast<std::size_t>(img.h) * img.w);
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x)
      img.v[static_cast<std::size_t>(y) * img.w + x] =
          static_cast<std::uint8_t>(
              std::clamp(std::lround(m(y, x) * 255.0), 0L, 255L));
  return img;
}

// Three-segment hot ramp: black -> red -> yellow -> white.
static void hot_color(double v, std::uint8_t out[3]) {
  v = std::clamp(v, 0.0, 1.0);
  auto seg = [](double t) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(t * 255.0), 0L, 255L));
  };
  out[0] = seg(3.0 * v);
  out[1] = seg(3.0 * v - 1.0);
  out[2] = seg(3.0 * v - 2.0);
}

Image overlay_heatmap(const Image& base, const Matrix& heat01, double alpha) {
  Matrix heat = heat01;
  if (static_cast<int>(heat.rows()) != base.h ||
      static_cast<int>(heat.cols()) != base.w)
    heat = resize_bilinear(heat, base.h, base.w);
  Image out = base;
  for (int y = 0; y < base.h; ++y) {
    for (int x = 0; x < base.w; ++x) {
      const double v = std::clamp(heat(y, x), 0.0, 1.0);
      std::uint8_t color[3];
      hot_color(v, color);
      const double a = alpha * v;
      std::uint8_t* px = out.px(y, x);
      for (int c = 0; c < 3; ++c)
        px[c] = static_cast<std::uint8_t>(
            std::clamp(std::lround((1 - a) * px[c] + a * color[c]), 0L, 255L));
    }
  }
  return out;
}

}  // namespace sea
