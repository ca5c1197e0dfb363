#pragma once

// The weighting measure mu_{alpha0,alpha1,T} under which the test statistic
// psi is the squared L2 norm of the path: an atom at T plus an absolutely
// continuous part on [0,T].
//   bridge: atom weight 1/(1-T), density (alpha0+alpha1-1)/(1-s)^2
//   ou:     atom weight 1,       density (alpha0+alpha1)

#include <cmath>
#include <stdexcept>

#include "bridgelrt/process.hpp"

namespace bridgelrt {

enum class DensityShape { inverse_square_gap, constant };

struct SpectralMeasure {
    ProcessKind kind = ProcessKind::bridge;
    double atom_location = 0.0;
    double atom_weight = 0.0;
    double density_coeff = 0.0;
    double support_end = 0.0;
    DensityShape shape = DensityShape::constant;

    // density at s in [0, support_end]
    double density(double s) const {
        if (shape == DensityShape::inverse_square_gap)
            return density_coeff / ((1.0 - s) * (1.0 - s));
        return density_coeff;
    }

    double total_mass() const {
        if (shape == DensityShape::inverse_square_gap)
            return atom_weight + density_coeff * support_end / (1.0 - support_end);
        return atom_weight + density_coeff * support_end;
    }
};

inline SpectralMeasure build_measure(const ProcessParams& params) {
    validate_params(params);
    SpectralMeasure mu;
    mu.kind = params.kind;
    mu.atom_location = params.horizon;
    mu.support_end = params.horizon;
    if (params.kind == ProcessKind::bridge) {
        if (!(params.alpha0 + params.alpha1 > 1.0))
            throw std::invalid_argument(
                "build_measure: bridge spectral measure needs alpha0 + alpha1 > 1 "
                "(the boundary case alpha0 + alpha1 = 1 has a degenerate density and "
                "is handled by the closed-form decision branch)");
        mu.atom_weight = 1.0 / (1.0 - params.horizon);
        mu.density_coeff = params.alpha0 + params.alpha1 - 1.0;
        mu.shape = DensityShape::inverse_square_gap;
    } else {
        mu.atom_weight = 1.0;
        mu.density_coeff = params.alpha0 + params.alpha1;
        mu.shape = DensityShape::constant;
    }
    if (!std::isfinite(mu.total_mass()))
        throw std::invalid_argument("build_measure: total mass must be finite");
    return mu;
}

}  // namespace bridgelrt
