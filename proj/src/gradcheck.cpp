#include "fedrl/gradcheck.hpp"

#include <cmath>
#include <cstdint>

namespace fedrl {

GradCheckReport finite_diff_grad_check(const std::function<double()>& loss_fn,
                                       const std::function<void()>& grad_fn,
                                       std::span<Parameter* const> params, double tolerance,
                                       RngStream& rng, int num_coords, double h) {
  GradCheckReport report;

  std::int64_t total = 0;
  for (const Parameter* p : params)
    if (p->trainable) total += p->value.numel();
  if (total == 0) return report;

  grad_fn();

  for (int i = 0; i < num_coords; ++i) {
    std::int64_t flat = static_cast<std::int64_t>(rng.next_u64() % static_cast<std::uint64_t>(total));
    Parameter* target = nullptr;
    int idx = 0;
    for (Parameter* p : params) {
      if (!p->trainable) continue;
      if (flat < p->value.numel()) {
        target = p;
        idx = static_cast<int>(flat);
        break;
      }
      flat -= p->value.numel();
    }

    const double saved = target->value.data[idx];
    target->value.data[idx] = saved + h;
    const double f_plus = loss_fn();
    target->value.data[idx] = saved - h;
    const double f_minus = loss_fn();
    target->value.data[idx] = saved;

    const double numeric = (f_plus - f_minus) / (2.0 * h);
    const double analytic = target->grad.data[idx];
    const double denom = std::max({1.0, std::abs(numeric), std::abs(analytic)});
    const double rel = std::abs(numeric - analytic) / denom;
    report.max_rel_err = std::max(report.max_rel_err, rel);
    ++report.coords_checked;
  }

  report.pass = report.max_rel_err < tolerance;
  return report;
}

}  // namespace fedrl
