#pragma once

#include <complex>
#include <cstddef>

#include "retrovert/allpass.hpp"
#include "retrovert/model.hpp"

namespace retrovert {

/// A forward model together with its reverse-time realization.
///
/// Discrete:   Cbar = C P A' + D B',  Dbar = C P Bbar + D J'
/// Continuous: Cbar = C P + D B',     Dbar = D
///
/// Dbar in discrete time carries the C P Bbar term, which comes from
/// substituting x(t) = P A' xbar(t) + P Bbar ubar(t) into the output equation.
/// Dropping it (Dbar = D J') breaks W = Wbar U whenever C P Bbar != 0.
struct ReversalResult {
  ForwardModel forward;
  BackwardModel backward;
  AllPassExtension extension;

  const GramianFactorization& gramian() const { return extension.gramian; }
};

ReversalResult reverse_discrete(const ForwardModel& model);
ReversalResult reverse_continuous(const ForwardModel& model);
ReversalResult reverse(const ForwardModel& model);

/// Dbar without the C P Bbar correction: D J' (discrete) or D (continuous).
Matrix uncorrected_dbar(const ReversalResult& result);

/// W(z) = C (zI - A)^{-1} B + D; the same formula in s for continuous time.
ComplexMatrix eval_forward_tf(const ForwardModel& model, std::complex<double> point);

/// Wbar(z) = Cbar (z^{-1} I - A')^{-1} Bbar + Dbar (discrete),
/// Wbar(s) = Cbar (sI + A')^{-1} Bbar + Dbar (continuous).
/// Wbar has anti-stable poles; this is pointwise rational evaluation.
ComplexMatrix eval_backward_tf(const BackwardModel& model, std::complex<double> point);

struct FactorizationCheck {
  double max_deviation = 0.0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
};

/// max ||W - Wbar U||_F over the boundary grid of the model's domain. Points
/// where any resolvent is numerically singular are skipped and counted.
FactorizationCheck check_factorization_grid(const ForwardModel& model,
                                            const ReversalResult& result,
                                            std::size_t grid_size);
FactorizationCheck check_factorization_grid_reference(const ForwardModel& model,
                                                      const ReversalResult& result,
                                                      std::size_t grid_size);

/// The backward model read as a forward model in the reversed time variable
/// tau = -t: (A', Bbar, Cbar, Dbar) in discrete time and (A', Bbar, -Cbar, Dbar)
/// in continuous time. Reversing that model again returns a realization of
/// the original output process.
ForwardModel reversed_time_view(const BackwardModel& backward);

/// W(point) W(point)^H, the output spectral density on the boundary.
ComplexMatrix output_spectral_density(const ForwardModel& model, std::complex<double> point);

}  // namespace retrovert
