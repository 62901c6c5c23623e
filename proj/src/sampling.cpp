#include "sphereflow/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sphereflow {

namespace {

// Northmost ring crossed by each face and phi offset of each face centre,
// in units of n_side (rows of the rhombic-dodecahedron face layout).
constexpr int kJrll[12] = {2, 2, 2, 2, 3, 3, 3, 3, 4, 4, 4, 4};
constexpr int kJpll[12] = {1, 3, 5, 7, 0, 2, 4, 6, 1, 3, 5, 7};

std::uint64_t spread_bits(std::uint64_t v) {
  v &= 0xffffffffULL;
  v = (v | (v << 16)) & 0x0000ffff0000ffffULL;
  v = (v | (v << 8)) & 0x00ff00ff00ff00ffULL;
  v = (v | (v << 4)) & 0x0f0f0f0f0f0f0f0fULL;
  v = (v | (v << 2)) & 0x3333333333333333ULL;
  v = (v | (v << 1)) & 0x5555555555555555ULL;
  return v;
}

std::uint64_t compress_bits(std::uint64_t v) {
  v &= 0x5555555555555555ULL;
  v = (v | (v >> 1)) & 0x3333333333333333ULL;
  v = (v | (v >> 2)) & 0x0f0f0f0f0f0f0f0fULL;
  v = (v | (v >> 4)) & 0x00ff00ff00ff00ffULL;
  v = (v | (v >> 8)) & 0x0000ffff0000ffffULL;
  v = (v | (v >> 16)) & 0x00000000ffffffffULL;
  return v;
}

std::int64_t isqrt64(std::int64_t v) {
  auto r = std::int64_t(std::sqrt(double(v) + 0.5));
  while (r * r > v) --r;
  while ((r + 1) * (r + 1) <= v) ++r;
  return r;
}

double wrap_phi(double phi) {
  double p = std::fmod(phi, kTwoPi);
  if (p < 0.0) p += kTwoPi;
  return p;
}

// Colatitude of a polar-cap ring: z = 1 - nr^2/(3 n_side^2), via atan2 for
// precision near the pole.
double cap_theta(std::int64_t nr, std::int64_t n_side) {
  double tmp = double(nr * nr) / (3.0 * double(n_side) * double(n_side));
  return std::atan2(std::sqrt(tmp * (2.0 - tmp)), 1.0 - tmp);
}

}  // namespace

std::string to_string(Ordering o) { return o == Ordering::RING ? "RING" : "NESTED"; }

Ordering ordering_from_string(const std::string& s) {
  if (s == "RING") return Ordering::RING;
  if (s == "NESTED") return Ordering::NESTED;
  throw std::invalid_argument("unknown ordering: " + s);
}

HealpixSampling::HealpixSampling(int n_side, Ordering ordering)
    : n_side_(n_side), ordering_(ordering) {
  if (n_side < 1 || n_side > 256 || (n_side & (n_side - 1)) != 0) {
    throw std::invalid_argument("n_side must be a power of two in [1, 256]");
  }
  order_ = 0;
  while ((1 << order_) < n_side_) ++order_;
  n_pix_ = 12LL * n_side_ * n_side_;
  n_cap_ = 2LL * n_side_ * (n_side_ - 1);
}

void HealpixSampling::nest2xyf(std::int64_t p, int& ix, int& iy, int& face) const {
  std::int64_t npface = std::int64_t(n_side_) * n_side_;
  face = int(p >> (2 * order_));
  std::uint64_t within = std::uint64_t(p & (npface - 1));
  ix = int(compress_bits(within));
  iy = int(compress_bits(within >> 1));
}

std::int64_t HealpixSampling::xyf2nest(int ix, int iy, int face) const {
  return (std::int64_t(face) << (2 * order_)) +
         std::int64_t(spread_bits(std::uint64_t(ix)) | (spread_bits(std::uint64_t(iy)) << 1));
}

void HealpixSampling::ring2xyf(std::int64_t p, int& ix, int& iy, int& face) const {
  std::int64_t n = n_side_;
  std::int64_t nl2 = 2 * n;
  std::int64_t iring, iphi, kshift, nr;

  if (p < n_cap_) {  // north polar cap
    iring = (1 + isqrt64(1 + 2 * p)) / 2;
    iphi = p + 1 - 2 * iring * (iring - 1);
    kshift = 0;
    nr = iring;
    face = 0;
    std::int64_t tmp = iphi - 1;
    if (tmp >= 2 * iring) {
      face = 2;
      tmp -= 2 * iring;
    }
    if (tmp >= iring) ++face;
  } else if (p < n_pix_ - n_cap_) {  // equatorial belt
    std::int64_t ip = p - n_cap_;
    iring = ip / (4 * n) + n;
    iphi = ip % (4 * n) + 1;
    kshift = (iring + n) & 1;
    nr = n;
    std::int64_t ire = iring - n + 1;
    std::int64_t irm = nl2 + 2 - ire;
    std::int64_t ifm = (iphi - ire / 2 + n - 1) / n;
    std::int64_t ifp = (iphi - irm / 2 + n - 1) / n;
    if (ifp == ifm) {
      face = int(ifp == 4 ? 4 : ifp + 4);
    } else if (ifp < ifm) {
      face = int(ifp);
    } else {
      face = int(ifm + 8);
    }
  } else {  // south polar cap
    std::int64_t ip = n_pix_ - p;
    iring = (1 + isqrt64(2 * ip - 1)) / 2;
    iphi = 4 * iring + 1 - (ip - 2 * iring * (iring - 1));
    kshift = 0;
    nr = iring;
    iring = 2 * nl2 - iring;
    face = 8;
    std::int64_t tmp = iphi - 1;
    if (tmp >= 2 * nr) {
      face = 10;
      tmp -= 2 * nr;
    }
    if (tmp >= nr) ++face;
  }

  std::int64_t irt = iring - kJrll[face] * n + 1;
  std::int64_t ipt = 2 * iphi - kJpll[face] * nr - kshift - 1;
  if (ipt >= nl2) ipt -= 8 * n;

  ix = int((ipt - irt) >> 1);
  iy = int((-(ipt + irt)) >> 1);
}

std::int64_t HealpixSampling::xyf2ring(int ix, int iy, int face) const {
  std::int64_t n = n_side_;
  std::int64_t nl4 = 4 * n;
  std::int64_t jr = kJrll[face] * n - ix - iy - 1;

  std::int64_t nr, kshift, n_before;
  if (jr < n) {
    nr = jr;
    n_before = 2 * nr * (nr - 1);
    kshift = 0;
  } else if (jr > 3 * n) {
    nr = nl4 - jr;
    n_before = n_pix_ - 2 * (nr + 1) * nr;
    kshift = 0;
  } else {
    nr = n;
    n_before = n_cap_ + (jr - n) * nl4;
    kshift = (jr - n) & 1;
  }

  std::int64_t jp = (kJpll[face] * nr + ix - iy + 1 + kshift) / 2;
  if (jp > nl4) {
    jp -= nl4;
  } else if (jp < 1) {
    jp += nl4;
  }
  return n_before + jp - 1;
}

SphereCoord HealpixSampling::xyf2ang(int ix, int iy, int face) const {
  std::int64_t n = n_side_;
  std::int64_t nl4 = 4 * n;
  std::int64_t jr = kJrll[face] * n - ix - iy - 1;

  std::int64_t nr, kshift;
  double theta;
  if (jr < n) {
    nr = jr;
    theta = cap_theta(nr, n);
    kshift = 0;
  } else if (jr > 3 * n) {
    nr = nl4 - jr;
    theta = kPi - cap_theta(nr, n);
    kshift = 0;
  } else {
    nr = n;
    theta = std::acos(double(2 * n - jr) * (2.0 / (3.0 * double(n))));
    kshift = (jr - n) & 1;
  }

  std::int64_t jp = (kJpll[face] * nr + ix - iy + 1 + kshift) / 2;
  if (jp > nl4) jp -= nl4;
  if (jp < 1) jp += nl4;

  double phi = (double(jp) - (double(kshift) + 1.0) * 0.5) * (kHalfPi / double(nr));
  return {theta, phi};
}

SphereCoord HealpixSampling::pix2ang(std::int64_t p) const {
  if (p < 0 || p >= n_pix_) throw std::out_of_range("pixel index out of range");
  if (ordering_ == Ordering::NESTED) {
    int ix, iy, face;
    nest2xyf(p, ix, iy, face);
    return xyf2ang(ix, iy, face);
  }

  std::int64_t n = n_side_;
  if (p < n_cap_) {  // north polar cap
    std::int64_t iring = (1 + isqrt64(1 + 2 * p)) / 2;
    std::int64_t iphi = p + 1 - 2 * iring * (iring - 1);
    return {cap_theta(iring, n), (double(iphi) - 0.5) * kHalfPi / double(iring)};
  }
  if (p < n_pix_ - n_cap_) {  // equatorial belt
    std::int64_t ip = p - n_cap_;
    std::int64_t iring = ip / (4 * n) + n;
    std::int64_t iphi = ip % (4 * n) + 1;
    double fodd = ((iring + n) & 1) ? 1.0 : 0.5;
    double z = double(2 * n - iring) * (2.0 / (3.0 * double(n)));
    return {std::acos(z), (double(iphi) - fodd) * kPi / double(2 * n)};
  }
  // south polar cap
  std::int64_t ip = n_pix_ - p;
  std::int64_t iring = (1 + isqrt64(2 * ip - 1)) / 2;
  std::int64_t iphi = 4 * iring + 1 - (ip - 2 * iring * (iring - 1));
  return {kPi - cap_theta(iring, n), (double(iphi) - 0.5) * kHalfPi / double(iring)};
}

Vec3 HealpixSampling::center(std::int64_t p) const {
  SphereCoord c = pix2ang(p);
  return ang2vec(c.theta, c.phi);
}

std::int64_t HealpixSampling::ang2pix_ring(double z, double tt) const {
  std::int64_t n = n_side_;
  double za = std::fabs(z);

  if (za <= 2.0 / 3.0) {  // equatorial belt
    double temp1 = double(n) * (0.5 + tt);
    double temp2 = double(n) * z * 0.75;
    auto jp = std::int64_t(std::floor(temp1 - temp2));  // ascending edge line
    auto jm = std::int64_t(std::floor(temp1 + temp2));  // descending edge line

    std::int64_t ir = n + 1 + jp - jm;  // in {1, 2n+1}
    std::int64_t kshift = 1 - (ir & 1);
    std::int64_t ip = (jp + jm - n + kshift + 1) / 2;
    ip = ((ip % (4 * n)) + 4 * n) % (4 * n);
    return n_cap_ + (ir - 1) * 4 * n + ip;
  }

  // polar caps
  double tp = tt - std::floor(tt);
  double tmp = double(n) * std::sqrt(3.0 * (1.0 - za));
  auto jp = std::int64_t(tp * tmp);
  auto jm = std::int64_t((1.0 - tp) * tmp);
  std::int64_t ir = jp + jm + 1;  // ring counted from the nearest pole
  auto ip = std::int64_t(tt * double(ir));
  ip = ((ip % (4 * ir)) + 4 * ir) % (4 * ir);
  return (z > 0) ? 2 * ir * (ir - 1) + ip : n_pix_ - 2 * ir * (ir + 1) + ip;
}

std::int64_t HealpixSampling::ang2pix_nest(double z, double tt) const {
  std::int64_t n = n_side_;
  double za = std::fabs(z);
  int face, ix, iy;

  if (za <= 2.0 / 3.0) {
    double temp1 = double(n) * (0.5 + tt);
    double temp2 = double(n) * z * 0.75;
    auto jp = std::int64_t(std::floor(temp1 - temp2));
    auto jm = std::int64_t(std::floor(temp1 + temp2));
    std::int64_t ifp = jp >> order_;
    std::int64_t ifm = jm >> order_;
    if (ifp == ifm) {
      face = int(ifp == 4 ? 4 : ifp + 4);
    } else if (ifp < ifm) {
      face = int(ifp);
    } else {
      face = int(ifm + 8);
    }
    ix = int(jm & (n - 1));
    iy = int(n - (jp & (n - 1)) - 1);
  } else {
    int ntt = int(tt);
    if (ntt >= 4) ntt = 3;
    double tp = tt - ntt;
    double tmp = double(n) * std::sqrt(3.0 * (1.0 - za));
    auto jp = std::int64_t(tp * tmp);
    auto jm = std::int64_t((1.0 - tp) * tmp);
    if (jp >= n) jp = n - 1;  // points exactly on a face boundary
    if (jm >= n) jm = n - 1;
    if (z >= 0) {
      face = ntt;
      ix = int(n - jm - 1);
      iy = int(n - jp - 1);
    } else {
      face = ntt + 8;
      ix = int(jp);
      iy = int(jm);
    }
  }
  return xyf2nest(ix, iy, face);
}

std::int64_t HealpixSampling::ang2pix(double theta, double phi) const {
  if (std::isnan(theta) || std::isnan(phi)) {
    throw std::invalid_argument("ang2pix: NaN input");
  }
  if (theta < 0.0 || theta > kPi) {
    throw std::invalid_argument("ang2pix: theta outside [0, pi]");
  }
  double z = std::cos(theta);
  double tt = wrap_phi(phi) / kHalfPi;  // in [0, 4)
  return ordering_ == Ordering::RING ? ang2pix_ring(z, tt) : ang2pix_nest(z, tt);
}

std::int64_t HealpixSampling::ring2nest(std::int64_t p) const {
  if (p < 0 || p >= n_pix_) throw std::out_of_range("pixel index out of range");
  int ix, iy, face;
  ring2xyf(p, ix, iy, face);
  return xyf2nest(ix, iy, face);
}

std::int64_t HealpixSampling::nest2ring(std::int64_t p) const {
  if (p < 0 || p >= n_pix_) throw std::out_of_range("pixel index out of range");
  int ix, iy, face;
  nest2xyf(p, ix, iy, face);
  return xyf2ring(ix, iy, face);
}

std::int64_t HealpixSampling::parent(std::int64_t p) const {
  if (ordering_ != Ordering::NESTED) throw OrderingError("parent: requires NESTED ordering");
  if (n_side_ < 2) throw std::invalid_argument("parent: n_side must be >= 2");
  if (p < 0 || p >= n_pix_) throw std::out_of_range("pixel index out of range");
  return p >> 2;
}

std::array<std::int64_t, 4> HealpixSampling::children(std::int64_t p) const {
  if (ordering_ != Ordering::NESTED) throw OrderingError("children: requires NESTED ordering");
  if (p < 0 || p >= n_pix_) throw std::out_of_range("pixel index out of range");
  return {4 * p, 4 * p + 1, 4 * p + 2, 4 * p + 3};
}

std::vector<std::int64_t> HealpixSampling::neighbors(std::int64_t p) const {
  if (p < 0 || p >= n_pix_) throw std::out_of_range("pixel index out of range");

  static const int xoffset[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
  static const int yoffset[8] = {0, 1, 1, 1, 0, -1, -1, -1};
  // Face reached when stepping off face f in each of the 9 grid directions
  // (S, SE, E, SW, centre, NE, W, NW, N); -1 where no face touches.
  static const int facearray[9][12] = {
      {8, 9, 10, 11, -1, -1, -1, -1, 10, 11, 8, 9},    // S
      {5, 6, 7, 4, 8, 9, 10, 11, 9, 10, 11, 8},        // SE
      {-1, -1, -1, -1, 5, 6, 7, 4, -1, -1, -1, -1},    // E
      {4, 5, 6, 7, 11, 8, 9, 10, 11, 8, 9, 10},        // SW
      {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11},          // centre
      {1, 2, 3, 0, 0, 1, 2, 3, 5, 6, 7, 4},            // NE
      {-1, -1, -1, -1, 7, 4, 5, 6, -1, -1, -1, -1},    // W
      {3, 0, 1, 2, 3, 0, 1, 2, 4, 5, 6, 7},            // NW
      {2, 3, 0, 1, -1, -1, -1, -1, 0, 1, 2, 3}};       // N
  // Bit 0: mirror x, bit 1: mirror y, bit 2: swap x/y on the target face.
  static const int swaparray[9][12] = {
      {0, 0, 0, 0, 0, 0, 0, 0, 3, 3, 3, 3},  // S
      {0, 0, 0, 0, 0, 0, 0, 0, 6, 6, 6, 6},  // SE
      {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},  // E
      {0, 0, 0, 0, 0, 0, 0, 0, 5, 5, 5, 5},  // SW
      {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},  // centre
      {5, 5, 5, 5, 0, 0, 0, 0, 0, 0, 0, 0},  // NE
      {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},  // W
      {6, 6, 6, 6, 0, 0, 0, 0, 0, 0, 0, 0},  // NW
      {3, 3, 3, 3, 0, 0, 0, 0, 0, 0, 0, 0}}; // N

  int ix, iy, face;
  if (ordering_ == Ordering::RING) {
    ring2xyf(p, ix, iy, face);
  } else {
    nest2xyf(p, ix, iy, face);
  }

  std::vector<std::int64_t> result;
  result.reserve(8);
  const int nsm1 = n_side_ - 1;
  for (int m = 0; m < 8; ++m) {
    int x = ix + xoffset[m];
    int y = iy + yoffset[m];
    if (x >= 0 && x <= nsm1 && y >= 0 && y <= nsm1) {
      result.push_back(ordering_ == Ordering::RING ? xyf2ring(x, y, face)
                                                   : xyf2nest(x, y, face));
      continue;
    }
    int nbnum = 4;
    if (x < 0) {
      x += n_side_;
      nbnum -= 1;
    } else if (x >= n_side_) {
      x -= n_side_;
      nbnum += 1;
    }
    if (y < 0) {
      y += n_side_;
      nbnum -= 3;
    } else if (y >= n_side_) {
      y -= n_side_;
      nbnum += 3;
    }
    int f = facearray[nbnum][face];
    if (f < 0) continue;  // facet corner: no neighbour in this direction
    if (swaparray[nbnum][face] & 1) x = n_side_ - x - 1;
    if (swaparray[nbnum][face] & 2) y = n_side_ - y - 1;
    if (swaparray[nbnum][face] & 4) std::swap(x, y);
    result.push_back(ordering_ == Ordering::RING ? xyf2ring(x, y, f) : xyf2nest(x, y, f));
  }

  std::sort(result.begin(), result.end());
  result.erase(std::unique(result.begin(), result.end()), result.end());
  result.erase(std::remove(result.begin(), result.end(), p), result.end());
  return result;
}

HealpixSampling HealpixSampling::coarsened() const {
  if (n_side_ < 2) throw std::invalid_argument("coarsened: n_side must be >= 2");
  return HealpixSampling(n_side_ / 2, ordering_);
}

PatchSampling::PatchSampling(const HealpixSampling& parent, int order, int base_index)
    : parent_(&parent), order_(order), base_(base_index) {
  if (parent.ordering() != Ordering::NESTED) {
    throw OrderingError("PatchSampling: parent must use NESTED ordering");
  }
  if (order < 1 || (order & (order - 1)) != 0 || order > parent.n_side()) {
    throw std::invalid_argument("PatchSampling: order must be a power of two dividing the hierarchy");
  }
  std::int64_t n_patches = 12LL * order * order;
  if (base_index < 0 || base_index >= n_patches) {
    throw std::invalid_argument("PatchSampling: base_index out of range");
  }
  len_ = parent.n_pix() / n_patches;
}

PatchSampling extract_patch(const HealpixSampling& s, int order, int base_index) {
  return PatchSampling(s, order, base_index);
}

RingSampling::RingSampling(int n) : n_(n) {
  if (n < 3) throw std::invalid_argument("RingSampling: n must be >= 3");
}

}  // namespace sphereflow
