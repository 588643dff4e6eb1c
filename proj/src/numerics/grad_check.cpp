#include "dtgi/numerics/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "dtgi/common/error.hpp"

namespace dtgi::num {

GradCheckReport grad_check(const LossFn& f, ParamStore<double>& params, const GradCheckOptions& opts) {
  params.zero_grad();
  const double base = f(params, true);
  const double again = f(params, false);
  if (base != again) {
    throw ContractError("grad_check: computation is not deterministic (" + std::to_string(base) + " vs " +
                        std::to_string(again) + ")");
  }

  GradCheckReport report;
  Rng rng(opts.seed);
  for (auto& [name, p] : params) {
    if (p.frozen) continue;
    if (name.compare(0, opts.prefix.size(), opts.prefix) != 0) continue;
    const std::size_t n = p.numel();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    if (n > opts.samples_per_tensor) {
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(opts.samples_per_tensor);
    }
    for (std::size_t i : idx) {
      double& slot = p.value.data()[i];
      const double saved = slot;
      slot = saved + opts.step;
      const double fp = f(params, false);
      slot = saved - opts.step;
      const double fm = f(params, false);
      slot = saved;
      const double numeric = (fp - fm) / (2.0 * opts.step);
      const double analytic = p.grad.data()[i];
      const double rel = std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
      ++report.coords_checked;
      if (report.worst_param.empty() || rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = name;
        report.worst_index = i;
      }
    }
  }
  return report;
}

}  // namespace dtgi::num
