#ifndef SPHEREFLOW_HARMONICS_HPP
#define SPHEREFLOW_HARMONICS_HPP

#include <cstdint>
#include <memory>
#include <mutex>
#include <vector>

#include "sphereflow/linalg.hpp"
#include "sphereflow/sampling.hpp"

namespace sphereflow {

// Real spherical-harmonic coefficients, degrees 0..ell_max, orders -l..l,
// flattened as index(l, m) = l^2 + l + m.
struct Alm {
  int ell_max = 0;
  std::vector<double> coeffs;

  Alm() = default;
  explicit Alm(int ell_max_)
      : ell_max(ell_max_),
        coeffs(std::size_t(ell_max_ + 1) * std::size_t(ell_max_ + 1), 0.0) {}

  static std::size_t index(int l, int m) { return std::size_t(l) * std::size_t(l) + std::size_t(l + m); }
  double& at(int l, int m) { return coeffs[index(l, m)]; }
  double at(int l, int m) const { return coeffs[index(l, m)]; }
  std::size_t size() const { return coeffs.size(); }
};

// Real fully-normalized spherical harmonics evaluated on a point set, with a
// least-squares analysis operator. Analysis/synthesis round-trips are exact
// (to solver tolerance) on band-limited signals.
class HarmonicBasis {
 public:
  HarmonicBasis(const std::vector<SphereCoord>& points, int ell_max);

  int ell_max() const { return ell_max_; }
  std::size_t n_points() const { return y_.rows(); }
  const Matrix& matrix() const { return y_; }

  Alm analysis(const std::vector<double>& x) const;
  std::vector<double> synthesis(const Alm& a) const;

  // max |Y^T Y * (4 pi / n) - I| entry; near-orthogonality diagnostic for
  // equal-area samplings.
  double gram_deviation() const;

 private:
  const QrFactor& qr() const;  // built on first analysis

  int ell_max_;
  Matrix y_;  // n x (ell_max+1)^2
  mutable std::shared_ptr<std::mutex> qr_mutex_ = std::make_shared<std::mutex>();
  mutable std::shared_ptr<const QrFactor> qr_;
};

// Row of harmonic values at one point, same layout as Alm.
std::vector<double> harmonic_row(double theta, double phi, int ell_max);

HarmonicBasis eval_harmonics(const HealpixSampling& s, int ell_max);
HarmonicBasis eval_harmonics(const PatchSampling& patch, int ell_max);

// Per-degree power: C_l = sum_m a_lm^2 / (2l+1).
std::vector<double> psd(const Alm& a);

// Rotation about the z axis by angle phi0 (harmonic domain, norm-preserving).
Alm rotate_z(const Alm& a, double phi0);

// Gaussian random field: a_lm ~ Normal(0, C_l) i.i.d., then synthesis.
// Degrees beyond the provided spectrum get zero power.
std::vector<double> synthesize_grf(const HarmonicBasis& b, const std::vector<double>& spectrum,
                                   std::uint64_t seed);
Alm grf_alm(int ell_max, const std::vector<double>& spectrum, std::uint64_t seed);

}  // namespace sphereflow

#endif  // SPHEREFLOW_HARMONICS_HPP
