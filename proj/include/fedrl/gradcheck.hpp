#pragma once

#include <functional>
#include <span>

#include "fedrl/autodiff.hpp"
#include "fedrl/rng.hpp"

namespace fedrl {

struct GradCheckReport {
  bool pass = false;
  double max_rel_err = 0.0;
  int coords_checked = 0;
};

// Central-difference validation of analytic gradients.
//
//   loss_fn    scalar objective of the current parameter values; must be
//              deterministic and side-effect free (fixed noise, no stat
//              updates)
//   grad_fn    zeroes grads, runs forward+backward once, leaves analytic
//              gradients in each parameter's grad buffer
//   params     parameters whose coordinates are eligible for sampling
//
// Samples num_coords coordinates uniformly over the flattened trainable
// parameter vector, perturbs each by +-h, and compares (f+ - f-) / 2h against
// the analytic entry. Relative error uses denominator max(1, |num|, |ana|) so
// near-zero gradients are judged on absolute error instead of noise ratio.
GradCheckReport finite_diff_grad_check(const std::function<double()>& loss_fn,
                                       const std::function<void()>& grad_fn,
                                       std::span<Parameter* const> params, double tolerance,
                                       RngStream& rng, int num_coords = 50, double h = 1e-4);

}  // namespace fedrl
