#ifndef SPHEREFLOW_SAMPLING_HPP
#define SPHEREFLOW_SAMPLING_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sphereflow/core.hpp"

namespace sphereflow {

enum class Ordering { RING, NESTED };

std::string to_string(Ordering o);
Ordering ordering_from_string(const std::string& s);

struct SphereCoord {
  double theta;  // colatitude, [0, pi]
  double phi;    // longitude, [0, 2*pi)
};

struct Vec3 {
  double x, y, z;
};

inline Vec3 ang2vec(double theta, double phi) {
  double st = std::sin(theta);
  return {st * std::cos(phi), st * std::sin(phi), std::cos(theta)};
}

inline double chord(const Vec3& a, const Vec3& b) {
  double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// HEALPix pixelization of the sphere: 12*n_side^2 equal-area pixels laid out
// on iso-latitude rings. Supports the RING and NESTED index conventions, the
// 4-ary NESTED hierarchy, the 8-neighbour tessellation structure, and
// NESTED-contiguous partial-sphere patches.
class HealpixSampling {
 public:
  // n_side must be a power of two in [1, 256].
  HealpixSampling(int n_side, Ordering ordering);

  int n_side() const { return n_side_; }
  std::int64_t n_pix() const { return n_pix_; }
  Ordering ordering() const { return ordering_; }
  double pixel_area() const { return 4.0 * kPi / double(n_pix_); }

  // Centre of pixel p in the sampling's own ordering.
  SphereCoord pix2ang(std::int64_t p) const;
  Vec3 center(std::int64_t p) const;

  // Pixel whose region contains (theta, phi); phi is wrapped mod 2*pi.
  std::int64_t ang2pix(double theta, double phi) const;

  // Index conversions (valid regardless of this sampling's own ordering).
  std::int64_t ring2nest(std::int64_t p) const;
  std::int64_t nest2ring(std::int64_t p) const;

  // NESTED 4-ary hierarchy. parent/children require NESTED ordering.
  std::int64_t parent(std::int64_t p) const;
  std::array<std::int64_t, 4> children(std::int64_t p) const;

  // Grid neighbours of pixel p in the HEALPix tessellation (8 in the bulk,
  // 7 or 6 at facet corners). Indices follow this sampling's ordering.
  std::vector<std::int64_t> neighbors(std::int64_t p) const;

  HealpixSampling coarsened() const;  // n_side/2, same ordering

 private:
  int n_side_;
  int order_;  // log2(n_side)
  std::int64_t n_pix_;
  std::int64_t n_cap_;
  Ordering ordering_;

  void nest2xyf(std::int64_t p, int& ix, int& iy, int& face) const;
  std::int64_t xyf2nest(int ix, int iy, int face) const;
  void ring2xyf(std::int64_t p, int& ix, int& iy, int& face) const;
  std::int64_t xyf2ring(int ix, int iy, int face) const;
  SphereCoord xyf2ang(int ix, int iy, int face) const;
  std::int64_t ang2pix_ring(double z, double tt) const;
  std::int64_t ang2pix_nest(double z, double tt) const;
};

// One of the 12*o^2 equal-area NESTED-contiguous blocks at subdivision
// order o. pixel_indices() covers [base*len, (base+1)*len) in the parent's
// NESTED indexing.
class PatchSampling {
 public:
  PatchSampling(const HealpixSampling& parent, int order, int base_index);

  const HealpixSampling& parent() const { return *parent_; }
  int order() const { return order_; }
  int base_index() const { return base_; }
  std::int64_t size() const { return len_; }
  std::int64_t first() const { return std::int64_t(base_) * len_; }
  double area_fraction() const { return 1.0 / (12.0 * double(order_) * double(order_)); }

  std::int64_t global_index(std::int64_t local) const { return first() + local; }
  Vec3 center(std::int64_t local) const { return parent_->center(global_index(local)); }

 private:
  const HealpixSampling* parent_;
  int order_;
  int base_;
  std::int64_t len_;
};

PatchSampling extract_patch(const HealpixSampling& s, int order, int base_index);

// n regularly spaced points on the unit circle, theta_j = 2*pi*j/n.
class RingSampling {
 public:
  explicit RingSampling(int n);

  int n() const { return n_; }
  double angle(int j) const { return kTwoPi * double(j) / double(n_); }
  // Point j as (cos theta, sin theta).
  std::array<double, 2> point(int j) const {
    double t = angle(j);
    return {std::cos(t), std::sin(t)};
  }

 private:
  int n_;
};

inline RingSampling ring_sampling(int n) { return RingSampling(n); }

}  // namespace sphereflow

#endif  // SPHEREFLOW_SAMPLING_HPP
