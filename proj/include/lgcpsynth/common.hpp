#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

namespace lgcp {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double dist(Point a, Point b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

// Axis-aligned rectangle, closed on all sides.
struct Rect {
  double xmin = 0.0, ymin = 0.0, xmax = 0.0, ymax = 0.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  double area() const { return width() * height(); }
  bool contains(Point p) const {
    return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
  }
  Rect grown(double margin) const {
    return {xmin - margin, ymin - margin, xmax + margin, ymax + margin};
  }
};

// An ordered set of planar locations inside a rectangular study region.
struct PointPattern {
  std::vector<Point> points;
  Rect domain;
  std::string label;

  int n() const { return static_cast<int>(points.size()); }
};

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Invalid configuration, parameters, or inputs (CLI exit code 2).
struct ConfigError : Error {
  using Error::Error;
};
// Query point outside the region a structure is defined on (CLI exit code 2).
struct OutOfDomainError : Error {
  using Error::Error;
};
// Non-finite or otherwise numerically unusable result (CLI exit code 3).
struct NumericError : Error {
  using Error::Error;
};
// A release was refused because a risk/utility ceiling is violated (exit 4).
struct ReleaseRefused : Error {
  using Error::Error;
};

// FNV-1a, used for provenance hashes of meshes, chains and manifests.
inline uint64_t fnv1a64(const void* data, size_t len, uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t hash_combine(uint64_t h, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  return fnv1a64(&bits, sizeof bits, h);
}

inline uint64_t hash_combine(uint64_t h, uint64_t v) {
  return fnv1a64(&v, sizeof v, h);
}

inline std::string hash_hex(uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace lgcp
