#ifndef SPHEREFLOW_CHEB_HPP
#define SPHEREFLOW_CHEB_HPP

#include <functional>
#include <vector>

#include "sphereflow/core.hpp"
#include "sphereflow/graph.hpp"

namespace sphereflow {

// Chebyshev polynomial filter coefficients mapping f_in input channels to
// f_out output channels: y_o = sum_i sum_k theta(k, i, o) T_k(L~) x_i,
// where L~ = (2/lambda_max) L - I.
struct ChebFilterBank {
  int order = 1;  // number of coefficients K
  std::size_t f_in = 1;
  std::size_t f_out = 1;
  std::vector<double> theta;  // indexed (k, f_in, f_out)

  ChebFilterBank() = default;
  ChebFilterBank(int k, std::size_t fin, std::size_t fout)
      : order(k), f_in(fin), f_out(fout),
        theta(std::size_t(k) * fin * fout, 0.0) {}

  double& coeff(int k, std::size_t i, std::size_t o) {
    return theta[(std::size_t(k) * f_in + i) * f_out + o];
  }
  double coeff(int k, std::size_t i, std::size_t o) const {
    return theta[(std::size_t(k) * f_in + i) * f_out + o];
  }

  // Single-channel filter from spectral-domain coefficients.
  static ChebFilterBank from_coeffs(const std::vector<double>& coeffs);
  // i.i.d. Normal(0, 1/(K*F_in)) initialization.
  static ChebFilterBank random_init(int k, std::size_t fin, std::size_t fout, Rng& rng);
};

// Scaled Laplacian L~ = (2/lambda_max) L - I as an implicit operator; no
// matrix is formed, spectrum lies in [-1, 1].
struct ScaledLaplacian {
  const SphereGraph* graph;
  void apply(const double* x, double* y) const { graph->apply_scaled(x, y); }
};

inline ScaledLaplacian scale_laplacian(const SphereGraph& g) { return ScaledLaplacian{&g}; }

// Forward filtering: K sparse applies per input channel, O(K |E|) work.
MapSignal cheb_apply(const ChebFilterBank& bank, const SphereGraph& g, const MapSignal& x);

struct ChebGrad {
  std::vector<double> d_theta;  // same layout as ChebFilterBank::theta
  MapSignal d_x;
};

// Analytic gradients: d_theta(k,i,o) = <T_k(L~) x_i, dy_o>; d_x via the same
// recurrence applied to dy (L~ is symmetric).
ChebGrad cheb_grad(const ChebFilterBank& bank, const SphereGraph& g, const MapSignal& x,
                   const MapSignal& dy);

// Chebyshev interpolation coefficients of h on [0, lambda_max]: the returned
// c satisfy sum_k c_k T_k((2 lambda / lambda_max) - 1) ~= h(lambda).
std::vector<double> chebyshev_fit(const std::function<double(double)>& h, int order,
                                  double lambda_max);

}  // namespace sphereflow

#endif  // SPHEREFLOW_CHEB_HPP
