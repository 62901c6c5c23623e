#include "sphereflow/cheb.hpp"

#include <cmath>

namespace sphereflow {

ChebFilterBank ChebFilterBank::from_coeffs(const std::vector<double>& coeffs) {
  ChebFilterBank bank(int(coeffs.size()), 1, 1);
  for (std::size_t k = 0; k < coeffs.size(); ++k) bank.theta[k] = coeffs[k];
  return bank;
}

ChebFilterBank ChebFilterBank::random_init(int k, std::size_t fin, std::size_t fout, Rng& rng) {
  ChebFilterBank bank(k, fin, fout);
  double sd = std::sqrt(1.0 / (double(k) * double(fin)));
  for (double& t : bank.theta) t = sd * rng.normal();
  return bank;
}

MapSignal cheb_apply(const ChebFilterBank& bank, const SphereGraph& g, const MapSignal& x) {
  if (x.n != g.n()) throw ShapeError("cheb_apply: signal length != vertex count");
  if (x.channels != bank.f_in) throw ShapeError("cheb_apply: channel count != f_in");

  const std::size_t n = x.n;
  MapSignal y(n, bank.f_out);
  std::vector<double> t0(n), t1(n), t2(n);

  for (std::size_t i = 0; i < bank.f_in; ++i) {
    const double* xi = x.channel(i);
    std::copy(xi, xi + n, t0.begin());
    for (std::size_t o = 0; o < bank.f_out; ++o) {
      double c = bank.coeff(0, i, o);
      if (c == 0.0) continue;
      double* yo = y.channel(o);
      for (std::size_t v = 0; v < n; ++v) yo[v] += c * t0[v];
    }
    if (bank.order == 1) continue;

    g.apply_scaled(t0.data(), t1.data());
    for (std::size_t o = 0; o < bank.f_out; ++o) {
      double c = bank.coeff(1, i, o);
      if (c == 0.0) continue;
      double* yo = y.channel(o);
      for (std::size_t v = 0; v < n; ++v) yo[v] += c * t1[v];
    }
    for (int k = 2; k < bank.order; ++k) {
      g.apply_scaled(t1.data(), t2.data());
      for (std::size_t v = 0; v < n; ++v) t2[v] = 2.0 * t2[v] - t0[v];
      for (std::size_t o = 0; o < bank.f_out; ++o) {
        double c = bank.coeff(k, i, o);
        if (c == 0.0) continue;
        double* yo = y.channel(o);
        for (std::size_t v = 0; v < n; ++v) yo[v] += c * t2[v];
      }
      std::swap(t0, t1);
      std::swap(t1, t2);
    }
  }
  return y;
}

ChebGrad cheb_grad(const ChebFilterBank& bank, const SphereGraph& g, const MapSignal& x,
                   const MapSignal& dy) {
  if (x.n != g.n() || dy.n != g.n()) throw ShapeError("cheb_grad: signal length != vertex count");
  if (x.channels != bank.f_in) throw ShapeError("cheb_grad: x channels != f_in");
  if (dy.channels != bank.f_out) throw ShapeError("cheb_grad: dy channels != f_out");

  const std::size_t n = x.n;
  ChebGrad grad;
  grad.d_theta.assign(bank.theta.size(), 0.0);
  grad.d_x = MapSignal(n, bank.f_in);
  std::vector<double> t0(n), t1(n), t2(n);

  // d_theta: Chebyshev basis of each input channel dotted with each dy.
  for (std::size_t i = 0; i < bank.f_in; ++i) {
    const double* xi = x.channel(i);
    std::copy(xi, xi + n, t0.begin());
    for (int k = 0; k < bank.order; ++k) {
      if (k == 1) {
        g.apply_scaled(t0.data(), t1.data());
      } else if (k >= 2) {
        g.apply_scaled(t1.data(), t2.data());
        for (std::size_t v = 0; v < n; ++v) t2[v] = 2.0 * t2[v] - t0[v];
        std::swap(t0, t1);
        std::swap(t1, t2);
      }
      const double* tk = (k == 0) ? t0.data() : t1.data();
      for (std::size_t o = 0; o < bank.f_out; ++o) {
        const double* dyo = dy.channel(o);
        double acc = 0.0;
        for (std::size_t v = 0; v < n; ++v) acc += tk[v] * dyo[v];
        grad.d_theta[(std::size_t(k) * bank.f_in + i) * bank.f_out + o] = acc;
      }
    }
  }

  // d_x: transpose recurrence; L~ symmetric, so reuse the forward one on dy.
  for (std::size_t o = 0; o < bank.f_out; ++o) {
    const double* dyo = dy.channel(o);
    std::copy(dyo, dyo + n, t0.begin());
    for (int k = 0; k < bank.order; ++k) {
      if (k == 1) {
        g.apply_scaled(t0.data(), t1.data());
      } else if (k >= 2) {
        g.apply_scaled(t1.data(), t2.data());
        for (std::size_t v = 0; v < n; ++v) t2[v] = 2.0 * t2[v] - t0[v];
        std::swap(t0, t1);
        std::swap(t1, t2);
      }
      const double* tk = (k == 0) ? t0.data() : t1.data();
      for (std::size_t i = 0; i < bank.f_in; ++i) {
        double c = bank.coeff(k, i, o);
        if (c == 0.0) continue;
        double* dxi = grad.d_x.channel(i);
        for (std::size_t v = 0; v < n; ++v) dxi[v] += c * tk[v];
      }
    }
  }
  return grad;
}

std::vector<double> chebyshev_fit(const std::function<double(double)>& h, int order,
                                  double lambda_max) {
  std::vector<double> f(std::size_t(order), 0.0);
  for (int j = 0; j < order; ++j) {
    double xj = std::cos(kPi * (j + 0.5) / order);
    f[std::size_t(j)] = h((xj + 1.0) * 0.5 * lambda_max);
  }
  std::vector<double> c(std::size_t(order), 0.0);
  for (int k = 0; k < order; ++k) {
    double acc = 0.0;
    for (int j = 0; j < order; ++j) {
      acc += f[std::size_t(j)] * std::cos(kPi * k * (j + 0.5) / order);
    }
    c[std::size_t(k)] = 2.0 * acc / order;
  }
  c[0] *= 0.5;
  return c;
}

}  // namespace sphereflow
