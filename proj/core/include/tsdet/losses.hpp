#pragma once

#include "tsdet/target_coding.hpp"

namespace tsdet {

/// Focal-loss weighting. alpha weights the positive class (1 - alpha the
/// negative); gamma down-weights well-classified examples.
struct FocalParams {
  double alpha = 0.25;
  double gamma = 2.0;

  void validate() const;
};

inline constexpr double kDefaultSmoothL1Beta = 1.0 / 9.0;

/// Probabilities are clamped to [kProbEps, 1 - kProbEps] before any log.
inline constexpr double kProbEps = 1e-7;

/// -alpha_t * (1 - pt)^gamma * ln(pt), with pt = p for y = 1 and 1 - p for
/// y = 0. Throws InvalidInput for p outside [0, 1] or y not in {0, 1}.
double focal_loss(double p, int y, const FocalParams& params = {});

/// Analytic d(focal_loss)/dp, evaluated at the clamped probability.
double focal_loss_grad(double p, int y, const FocalParams& params = {});

/// Scalar smooth-L1: 0.5 d^2 / beta for |d| < beta, |d| - 0.5 beta otherwise.
double smooth_l1(double d, double beta = kDefaultSmoothL1Beta);
double smooth_l1_grad(double d, double beta = kDefaultSmoothL1Beta);

/// Smooth-L1 summed over the four delta components.
double smooth_l1(const BoxDelta& pred, const BoxDelta& target, double beta = kDefaultSmoothL1Beta);

}  // namespace tsdet
