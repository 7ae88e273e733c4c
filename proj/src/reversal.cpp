#include "retrovert/reversal.hpp"

#include <optional>
#include <span>

#include "retrovert/error.hpp"
#include "retrovert/kernels.hpp"

namespace retrovert {

namespace {

using cd = std::complex<double>;

void require_output_dims(const ForwardModel& model) {
  const Eigen::Index n = model.states();
  const Eigen::Index p = model.inputs();
  if (model.A.rows() != model.A.cols() || model.B.rows() != n || model.C.cols() != n ||
      model.C.rows() == 0 || model.D.rows() != model.C.rows() || model.D.cols() != p) {
    throw DimensionMismatch("model dimensions are inconsistent");
  }
}

}  // namespace

ReversalResult reverse_discrete(const ForwardModel& model) {
  if (model.time_domain != TimeDomain::kDiscrete) {
    throw Error("reverse_discrete: model is not a discrete-time model");
  }
  require_output_dims(model);
  ReversalResult r;
  r.forward = model;
  r.extension = build_allpass_discrete(model.A, model.B);
  const Matrix& P = r.extension.gramian.P;

  BackwardModel& b = r.backward;
  b.time_domain = TimeDomain::kDiscrete;
  b.gauge = std::string(kDiscreteGauge);
  b.Abar = model.A.transpose();
  b.Bbar = r.extension.Bbar;
  b.Cbar = model.C * P * model.A.transpose() + model.D * model.B.transpose();
  b.Dbar = model.C * P * r.extension.Bbar + model.D * r.extension.J.transpose();
  return r;
}

ReversalResult reverse_continuous(const ForwardModel& model) {
  if (model.time_domain != TimeDomain::kContinuous) {
    throw Error("reverse_continuous: model is not a continuous-time model");
  }
  require_output_dims(model);
  ReversalResult r;
  r.forward = model;
  r.extension = build_allpass_continuous(model.A, model.B);
  const Matrix& P = r.extension.gramian.P;

  BackwardModel& b = r.backward;
  b.time_domain = TimeDomain::kContinuous;
  b.gauge = std::string(kContinuousGauge);
  b.Abar = model.A.transpose();
  b.Bbar = r.extension.Bbar;
  b.Cbar = model.C * P + model.D * model.B.transpose();
  b.Dbar = model.D;
  return r;
}

ReversalResult reverse(const ForwardModel& model) {
  return model.time_domain == TimeDomain::kDiscrete ? reverse_discrete(model)
                                                    : reverse_continuous(model);
}

Matrix uncorrected_dbar(const ReversalResult& result) {
  if (result.forward.time_domain == TimeDomain::kDiscrete) {
    return result.forward.D * result.extension.J.transpose();
  }
  return result.forward.D;
}

ComplexMatrix eval_forward_tf(const ForwardModel& model, cd point) {
  const ComplexMatrix D = model.D.cast<cd>();
  if (!std::isfinite(point.real()) || !std::isfinite(point.imag())) return D;
  return model.C.cast<cd>() * resolvent_solve(model.A, point, model.B) + D;
}

ComplexMatrix eval_backward_tf(const BackwardModel& model, cd point) {
  const ComplexMatrix D = model.Dbar.cast<cd>();
  if (model.time_domain == TimeDomain::kDiscrete) {
    const cd w = cd(1.0) / point;
    if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) return D;
    return model.Cbar.cast<cd>() * resolvent_solve(model.Abar, w, model.Bbar) + D;
  }
  if (!std::isfinite(point.real()) || !std::isfinite(point.imag())) return D;
  return model.Cbar.cast<cd>() * resolvent_solve(-model.Abar, point, model.Bbar) + D;
}

namespace {

template <bool Parallel>
FactorizationCheck factorization_sweep(const ForwardModel& model, const ReversalResult& result,
                                       std::size_t grid_size) {
  if (grid_size < 2) throw Error("check_factorization_grid: grid size must be at least 2");
  const auto grid = boundary_grid(model.time_domain, model.A, grid_size);
  auto deviation = [&](cd z) -> std::optional<double> {
    try {
      const ComplexMatrix W = eval_forward_tf(model, z);
      const ComplexMatrix Wbar = eval_backward_tf(result.backward, z);
      const ComplexMatrix U = eval_structural(result.extension, z);
      return (W - Wbar * U).norm();
    } catch (const SingularResolvent&) {
      return std::nullopt;
    }
  };
  kernels::SweepResult r;
  if constexpr (Parallel) {
    r = kernels::sweep_max(std::span<const cd>(grid), deviation);
  } else {
    r = kernels::sweep_max_reference(std::span<const cd>(grid), deviation);
  }
  return {r.max_deviation, r.evaluated, r.skipped};
}

}  // namespace

FactorizationCheck check_factorization_grid(const ForwardModel& model,
                                            const ReversalResult& result,
                                            std::size_t grid_size) {
  return factorization_sweep<true>(model, result, grid_size);
}

FactorizationCheck check_factorization_grid_reference(const ForwardModel& model,
                                                      const ReversalResult& result,
                                                      std::size_t grid_size) {
  return factorization_sweep<false>(model, result, grid_size);
}

ForwardModel reversed_time_view(const BackwardModel& backward) {
  ForwardModel m;
  m.time_domain = backward.time_domain;
  m.A = backward.Abar;
  m.B = backward.Bbar;
  m.C = backward.time_domain == TimeDomain::kDiscrete ? backward.Cbar
                                                      : Matrix(-backward.Cbar);
  m.D = backward.Dbar;
  return m;
}

ComplexMatrix output_spectral_density(const ForwardModel& model, cd point) {
  const ComplexMatrix W = eval_forward_tf(model, point);
  return W * W.adjoint();
}

}  // namespace retrovert
