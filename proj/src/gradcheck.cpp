#include "relnet/gradcheck.hpp"

#include <cmath>
#include <cstring>

#include "relnet/errors.hpp"

namespace relnet {

GradCheckResult finite_diff_check(ParameterStore& params,
                                  const std::function<Tensor(Tape&)>& build_loss, double step) {
    if (!(step > 0.0 && step <= 1e-2)) {
        throw ContractError("finite_diff_check: step must lie in (0, 1e-2]");
    }

    auto evaluate = [&](std::vector<uint8_t>* pattern) {
        Tape tape;
        Tensor loss = build_loss(tape);
        if (loss.numel() != 1) {
            throw ContractError("finite_diff_check: loss builder must return a scalar");
        }
        if (pattern != nullptr) {
            *pattern = tape.relu_pattern();
        }
        return loss.value();
    };

    std::vector<uint8_t> base_pattern;
    const double v0 = evaluate(&base_pattern);
    const double v0_again = evaluate(nullptr);
    if (std::memcmp(&v0, &v0_again, sizeof(double)) != 0) {
        throw DeterminismError("finite_diff_check: loss builder is not deterministic");
    }

    // Analytic gradients at the unperturbed point.
    params.zero_grad();
    {
        Tape tape;
        Tensor loss = build_loss(tape);
        tape.backward(loss);
    }
    std::vector<std::vector<double>> analytic;
    for (Parameter* p : params.all()) {
        analytic.push_back(p->grad);
    }
    params.zero_grad();

    GradCheckResult result;
    std::vector<uint8_t> plus_pattern, minus_pattern;
    auto all_params = params.all();
    for (size_t pi = 0; pi < all_params.size(); ++pi) {
        Parameter& p = *all_params[pi];
        for (size_t k = 0; k < p.value.size(); ++k) {
            const double saved = p.value[k];
            p.value[k] = saved + step;
            const double v_plus = evaluate(&plus_pattern);
            p.value[k] = saved - step;
            const double v_minus = evaluate(&minus_pattern);
            p.value[k] = saved;

            if (plus_pattern != minus_pattern) {
                ++result.kink_entries_skipped;
                continue;
            }
            const double fd = (v_plus - v_minus) / (2.0 * step);
            const double an = analytic[pi][k];
            const double rel = std::abs(an - fd) / std::max(1.0, std::abs(an));
            result.max_rel_error = std::max(result.max_rel_error, rel);
            ++result.entries_checked;
        }
    }
    return result;
}

}  // namespace relnet
