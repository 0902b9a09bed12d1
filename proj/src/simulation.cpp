#include "fbcom/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "fbcom/errors.hpp"

namespace fbcom {

PackedState pack(const MeanFieldState& m, const CovarianceMatrix& v) {
  PackedState y;
  y[0] = m.alpha.real();
  y[1] = m.alpha.imag();
  y[2] = m.beta.real();
  y[3] = m.beta.imag();
  Eigen::Map<Mat4>(y.data() + 4) = v.entries;
  return y;
}

MeanFieldState unpack_mean_field(const PackedState& y, double t) {
  return {t, {y[0], y[1]}, {y[2], y[3]}};
}

CovarianceMatrix unpack_covariance(const PackedState& y) {
  CovarianceMatrix v;
  v.entries = Eigen::Map<const Mat4>(y.data() + 4);
  return v;
}

PackedState coupled_rhs(double t, const PackedState& y, const SystemParams& p,
                        const DiffusionMatrix& d) {
  const MeanFieldState m = unpack_mean_field(y, t);
  const MeanFieldDerivative dm = mean_field_rhs(m, p);
  const DriftMatrix a = build_drift_matrix(m, p);
  const Mat4 v = Eigen::Map<const Mat4>(y.data() + 4);
  PackedState dy;
  dy[0] = dm.d_alpha.real();
  dy[1] = dm.d_alpha.imag();
  dy[2] = dm.d_beta.real();
  dy[3] = dm.d_beta.imag();
  Eigen::Map<Mat4>(dy.data() + 4) = covariance_rhs(a.entries, v, d);
  return dy;
}

PackedState initial_state(const SystemParams& p, InitialCondition ic) {
  if (ic == InitialCondition::quiescent) {
    return pack(MeanFieldState{}, CovarianceMatrix::thermal(p.n_a, p.n_b));
  }
  const DerivedParams d = derive(p);
  const cplx alpha0 = d.t_b * p.E / cplx(d.kappa_fb, d.delta_fb);
  return pack(MeanFieldState{0.0, alpha0, {}}, CovarianceMatrix::vacuum());
}

namespace {

void symmetrize_packed(PackedState& y) {
  Eigen::Map<Mat4> v(y.data() + 4);
  const Mat4 sym = 0.5 * (v + v.transpose());
  v = sym;
}

struct RhsFunctor {
  SystemParams params;
  DiffusionMatrix diffusion;
  PackedState operator()(double t, const PackedState& y) const {
    return coupled_rhs(t, y, params, diffusion);
  }
};

StepControl control_from(const IntegratorSettings& s) {
  StepControl c;
  c.rtol = s.rtol;
  c.atol = s.atol;
  c.max_step = s.max_step;
  c.max_steps = s.max_steps;
  return c;
}

}  // namespace

struct CoupledEvolution::Impl {
  DormandPrince<kStateSize, RhsFunctor> stepper;
  double covariance_blowup = 1e8;
  std::optional<std::chrono::steady_clock::time_point> deadline;
  long since_clock_check = 0;
};

CoupledEvolution::CoupledEvolution(const SystemParams& params, const IntegratorSettings& settings)
    : CoupledEvolution(params, settings, 0.0, initial_state(params, settings.initial)) {}

CoupledEvolution::CoupledEvolution(const SystemParams& params, const IntegratorSettings& settings,
                                   double t0, const PackedState& y0)
    : impl_(std::make_unique<Impl>(Impl{
          DormandPrince<kStateSize, RhsFunctor>(RhsFunctor{params, build_diffusion_matrix(params)},
                                                t0, y0, control_from(settings)),
          settings.covariance_blowup, std::nullopt, 0})) {
  validate(params);
}

CoupledEvolution::~CoupledEvolution() = default;
CoupledEvolution::CoupledEvolution(CoupledEvolution&&) noexcept = default;
CoupledEvolution& CoupledEvolution::operator=(CoupledEvolution&&) noexcept = default;

void CoupledEvolution::advance_to(double t) {
  Impl& impl = *impl_;
  impl.stepper.advance_to(t, [&impl](PackedState& y) {
    symmetrize_packed(y);
    if (y.tail<16>().cwiseAbs().maxCoeff() > impl.covariance_blowup) {
      throw DivergenceError("covariance matrix running away");
    }
    if (impl.deadline && ++impl.since_clock_check >= 1024) {
      impl.since_clock_check = 0;
      if (std::chrono::steady_clock::now() > *impl.deadline) {
        throw NotConvergedError("wall-time budget exhausted");
      }
    }
    return false;  // symmetrisation is below the FSAL slope's sensitivity
  });
}

void CoupledEvolution::set_deadline(std::chrono::steady_clock::time_point deadline) {
  impl_->deadline = deadline;
}

double CoupledEvolution::time() const { return impl_->stepper.time(); }
const PackedState& CoupledEvolution::state() const { return impl_->stepper.state(); }
const PackedState& CoupledEvolution::derivative() const { return impl_->stepper.derivative(); }
TrajectorySample CoupledEvolution::sample() const { return {time(), state(), derivative()}; }
long CoupledEvolution::steps() const { return impl_->stepper.accepted_steps(); }

std::vector<MeanFieldState> Trajectory::mean_field() const {
  std::vector<MeanFieldState> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(unpack_mean_field(s.y, s.t));
  return out;
}

std::vector<CovarianceMatrix> Trajectory::covariance() const {
  std::vector<CovarianceMatrix> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(unpack_covariance(s.y));
  return out;
}

PackedState Trajectory::interpolate(double t) const {
  if (samples.empty()) throw DomainError("empty trajectory");
  if (t < samples.front().t || t > samples.back().t) {
    throw DomainError("interpolation time outside the stored trajectory");
  }
  auto it = std::lower_bound(samples.begin(), samples.end(), t,
                             [](const TrajectorySample& s, double x) { return s.t < x; });
  if (it == samples.begin()) return it->y;
  const TrajectorySample& hi = *it;
  const TrajectorySample& lo = *(it - 1);
  const double h = hi.t - lo.t;
  const double s = (t - lo.t) / h;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  const double h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s);
  const double h11 = s * s * (s - 1);
  return h00 * lo.y + h10 * h * lo.dy + h01 * hi.y + h11 * h * hi.dy;
}

Trajectory integrate(const SystemParams& params, double t_end, double stride,
                     const IntegratorSettings& settings) {
  if (!(t_end > 0.0)) throw DomainError("t_end must be positive");
  if (!(stride > 0.0)) throw DomainError("sample stride must be positive");
  CoupledEvolution evo(params, settings);
  Trajectory traj;
  traj.samples.push_back(evo.sample());
  const auto n = static_cast<long>(std::ceil(t_end / stride - 1e-12));
  for (long k = 1; k <= n; ++k) {
    evo.advance_to(std::min(t_end, static_cast<double>(k) * stride));
    traj.samples.push_back(evo.sample());
  }
  return traj;
}

}  // namespace fbcom
