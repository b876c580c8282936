#include "tsdet/losses.hpp"

#include <algorithm>
#include <cmath>

#include "tsdet/error.hpp"

namespace tsdet {
namespace {

void check_inputs(double p, int y) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("focal loss: probability outside [0, 1]");
  if (y != 0 && y != 1) throw InvalidInput("focal loss: label must be 0 or 1");
}

void check_beta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidConfig("smooth_l1: beta must be positive");
}

}  // namespace

void FocalParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidConfig("focal alpha must lie in (0, 1]");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw InvalidConfig("focal gamma must be >= 0");
}

double focal_loss(double p, int y, const FocalParams& params) {
  check_inputs(p, y);
  params.validate();
  const double pc = std::clamp(p, kProbEps, 1.0 - kProbEps);
  const double pt = y == 1 ? pc : 1.0 - pc;
  const double alpha_t = y == 1 ? params.alpha : 1.0 - params.alpha;
  return -alpha_t * std::pow(1.0 - pt, params.gamma) * std::log(pt);
}

double focal_loss_grad(double p, int y, const FocalParams& params) {
  check_inputs(p, y);
  params.validate();
  const double pc = std::clamp(p, kProbEps, 1.0 - kProbEps);
  const double pt = y == 1 ? pc : 1.0 - pc;
  const double alpha_t = y == 1 ? params.alpha : 1.0 - params.alpha;
  const double g = params.gamma;
  const double q = 1.0 - pt;

  // dL/dpt = alpha_t * (g q^(g-1) ln pt - q^g / pt); the first term vanishes at g = 0.
  double d_pt = -std::pow(q, g) / pt;
  if (g != 0.0) d_pt += g * std::pow(q, g - 1.0) * std::log(pt);
  d_pt *= alpha_t;
  return y == 1 ? d_pt : -d_pt;
}

double smooth_l1(double d, double beta) {
  check_beta(beta);
  const double a = std::abs(d);
  return a < beta ? 0.5 * d * d / beta : a - 0.5 * beta;
}

double smooth_l1_grad(double d, double beta) {
  check_beta(beta);
  if (std::abs(d) < beta) return d / beta;
  return d > 0.0 ? 1.0 : -1.0;
}

double smooth_l1(const BoxDelta& pred, const BoxDelta& target, double beta) {
  return smooth_l1(pred.tx - target.tx, beta) + smooth_l1(pred.ty - target.ty, beta) +
         smooth_l1(pred.tw - target.tw, beta) + smooth_l1(pred.th - target.th, beta);
}

}  // namespace tsdet
