#pragma once

#include <algorithm>

namespace hypermaps {

struct ImageSize {
  int height = 0;
  int width = 0;

  long long area() const { return static_cast<long long>(height) * width; }
  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

struct Pixel {
  int x = 0;
  int y = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// Half-open pixel rectangle [x0, x1) x [y0, y1).
struct Rect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool empty() const { return x1 <= x0 || y1 <= y0; }
  bool contains(Pixel p) const { return p.x >= x0 && p.x < x1 && p.y >= y0 && p.y < y1; }

  Rect intersect(const Rect& o) const {
    return {std::max(x0, o.x0), std::max(y0, o.y0), std::min(x1, o.x1), std::min(y1, o.y1)};
  }
  friend bool operator==(const Rect&, const Rect&) = default;
};

inline Rect full_rect(ImageSize size) { return {0, 0, size.width, size.height}; }

}  // namespace hypermaps
