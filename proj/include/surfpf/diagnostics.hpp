#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "surfpf/models.hpp"

namespace surfpf {

/// int_{Gamma_h} I_h f0(u) ds + (eps^2/2) u^T A u.
double lyapunov_energy(const Operators& ops, const Eigen::VectorXd& u, const ModelParams& params);

/// Numerical energy of the Allen-Cahn scheme:
/// alpha [int I_h f0(u_k) + (eps^2/2) u_k^T A u_k + beta_s int |u_k - u_km1|^2]
/// + eps^2 h u_k^T S u_k.
double numerical_energy_ac(const Operators& ops, const Eigen::VectorXd& u_k, const Eigen::VectorXd& u_km1,
                           const ModelParams& params);

/// int_{Gamma_h} c_h ds.
double total_mass(const Operators& ops, const Eigen::VectorXd& c);

/// ||u_h - u*||_{L2(Gamma_h)} with u* evaluated at the surface quadrature points.
double l2_error(const TraceSpace& space, const Eigen::VectorXd& u_h, const TraceSpace::SpaceFn& exact,
                int quadrature_order = 4);

/// Running discrete L-infinity(L2) and L2(L2) norms over time levels k >= 1.
class ErrorNorms {
 public:
  void add(double dt, double error_l2);
  double linf_l2() const { return max_; }
  /// (T^{-1} sum dt_k e_k^2)^{1/2} with T the accumulated time.
  double l2_l2() const;
  int samples() const { return samples_; }

 private:
  double max_ = 0.0;
  double sum_ = 0.0;
  double time_ = 0.0;
  int samples_ = 0;
};

/// Fraction of the area of Gamma_h on which the P1 trace of u exceeds the
/// threshold, computed exactly per triangle.
double phase_area_fraction(const TraceSpace& space, const Eigen::VectorXd& u, double threshold = 0.5);

/// Area of {lo < u <= hi} on Gamma_h.
double band_area(const TraceSpace& space, const Eigen::VectorXd& u, double lo, double hi);

/// Length of the level line {u = level} on Gamma_h.
double contour_length(const TraceSpace& space, const Eigen::VectorXd& u, double level = 0.5);

/// area{0.05 < u < 0.95} / length{u = 0.5}. Throws NoInterface when either
/// is zero.
double interface_width_estimate(const TraceSpace& space, const Eigen::VectorXd& u);

struct TimeSeriesRecord {
  double t = 0.0;
  double lyapunov_energy = 0.0;
  std::optional<double> numerical_energy;
  std::optional<double> total_mass;
  double phase_area_fraction = 0.0;
  double min_u = 0.0;
  double max_u = 0.0;
  std::optional<double> interface_width;
  int solver_iters = 0;
};

/// Writes diagnostics.csv rows. Values use round-trip precision so repeated
/// runs compare bit-identically; absent optional fields are left empty.
class DiagnosticsWriter {
 public:
  static constexpr const char* kHeader = "t,E_lyap,E_num,mass,phase_frac,min_u,max_u,iface_width,solver_iters";

  explicit DiagnosticsWriter(const std::string& path);
  void write(const TimeSeriesRecord& record);
  const std::vector<TimeSeriesRecord>& records() const { return records_; }

 private:
  std::string path_;
  std::vector<TimeSeriesRecord> records_;
};

std::string format_record(const TimeSeriesRecord& record);

/// Record of the current state of a stepper (the interface width is left
/// empty when no interface exists).
TimeSeriesRecord make_record(const Stepper& stepper, const TraceSpace& space, const Operators& ops,
                             int solver_iters);

}  // namespace surfpf
