#pragma once

#include "surfpf/models.hpp"

namespace surfpf {

/// Smooth exact solution on the unit sphere centered at the origin,
/// u*(x, t) = a(t) (Y + 1) / 2 with a(t) = 1 - 0.8 exp(-0.4 t) and
/// Y = x1 x2, a degree-2 spherical harmonic (Laplace-Beltrami eigenvalue -6).
/// Off the sphere every quantity is the constant normal extension
/// x -> x/|x|.
namespace manufactured {

double time_factor(double t);
double time_factor_rate(double t);

double exact(const Vec3& x, double t);
double exact_rate(const Vec3& x, double t);

/// Source of u_t + alpha f0'(u) - alpha eps^2 Lap u = g for u = u*.
double ac_forcing(const Vec3& x, double t, const ModelParams& params);

/// mu* = f0'(c*) - eps^2 Lap c*.
double ch_potential(const Vec3& x, double t, const ModelParams& params);

/// Source of rho c_t - div(M(c) grad mu) = g with mu = mu*, in closed form.
double ch_forcing(const Vec3& x, double t, const ModelParams& params);

struct ChSample {
  double forcing;
  double potential;
};
ChSample ch_forcing_and_potential(const Vec3& x, double t, const ModelParams& params);

}  // namespace manufactured

}  // namespace surfpf
