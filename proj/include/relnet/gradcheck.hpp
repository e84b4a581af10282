#pragma once

#include <functional>

#include "relnet/param.hpp"
#include "relnet/tape.hpp"

namespace relnet {

struct GradCheckResult {
    double max_rel_error = 0.0;
    int64_t entries_checked = 0;
    /// Entries skipped because a relu input changed sign between the two
    /// perturbed evaluations (the loss is not differentiable there).
    int64_t kink_entries_skipped = 0;
};

/// Central-difference verification of the analytic gradients.
///
/// `build_loss` must construct the scalar loss on the given tape from the
/// current parameter values and nothing else; it is evaluated twice up front
/// and a DeterminismError is raised if the two values differ. Reported error
/// is max over parameter entries of |analytic - fd| / max(1, |analytic|).
/// Leaves all parameter gradients zeroed.
GradCheckResult finite_diff_check(ParameterStore& params,
                                  const std::function<Tensor(Tape&)>& build_loss, double step);

}  // namespace relnet
