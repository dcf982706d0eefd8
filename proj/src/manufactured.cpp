#include "surfpf/manufactured.hpp"

#include <cmath>

namespace surfpf::manufactured {

namespace {

struct Harmonic {
  double y;       // Y = x1 x2 on the sphere
  double grad2;   // |grad_Gamma Y|^2 = x1^2 + x2^2 - 4 Y^2
};

Harmonic harmonic(const Vec3& x) {
  const Vec3 p = x / x.norm();
  const double y = p[0] * p[1];
  return {y, p[0] * p[0] + p[1] * p[1] - 4.0 * y * y};
}

}  // namespace

double time_factor(double t) { return 1.0 - 0.8 * std::exp(-0.4 * t); }
double time_factor_rate(double t) { return 0.32 * std::exp(-0.4 * t); }

double exact(const Vec3& x, double t) { return 0.5 * time_factor(t) * (harmonic(x).y + 1.0); }

double exact_rate(const Vec3& x, double t) { return 0.5 * time_factor_rate(t) * (harmonic(x).y + 1.0); }

double ac_forcing(const Vec3& x, double t, const ModelParams& params) {
  const double a = time_factor(t);
  const double y = harmonic(x).y;
  const double u = 0.5 * a * (y + 1.0);
  const double ee = params.epsilon * params.epsilon;
  return 0.5 * time_factor_rate(t) * (y + 1.0) + params.alpha * f0_prime(u, params.xi) +
         3.0 * params.alpha * ee * a * y;
}

double ch_potential(const Vec3& x, double t, const ModelParams& params) {
  return ch_forcing_and_potential(x, t, params).potential;
}

double ch_forcing(const Vec3& x, double t, const ModelParams& params) {
  return ch_forcing_and_potential(x, t, params).forcing;
}

ChSample ch_forcing_and_potential(const Vec3& x, double t, const ModelParams& params) {
  const double a = time_factor(t);
  const Harmonic h = harmonic(x);
  const double c = 0.5 * a * (h.y + 1.0);
  const double ee = params.epsilon * params.epsilon;
  const double xi = params.xi;

  // mu = F(c) + 3 eps^2 a Y with F = f0', so grad mu = G grad Y.
  const double F1 = f0_double_prime(c, xi);
  const double F2 = 0.5 * xi * (12.0 * c - 6.0);
  const double G = 0.5 * a * F1 + 3.0 * ee * a;
  const double dG = 0.25 * a * a * F2;  // grad G = dG grad Y

  const double m = c * (1.0 - c);
  const double dm = 0.5 * a * (1.0 - 2.0 * c);  // grad M = dm grad Y

  const double div = m * (G * (-6.0 * h.y) + dG * h.grad2) + dm * G * h.grad2;
  const double rate = 0.5 * time_factor_rate(t) * (h.y + 1.0);
  return {params.rho * rate - div, f0_prime(c, xi) + 3.0 * ee * a * h.y};
}

}  // namespace surfpf::manufactured
