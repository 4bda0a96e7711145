#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "dcopt/problem.hpp"

namespace dcopt {

struct GlParams {
  double tau = 10.0;    // diffuse-interface weight
  double gamma = 10.0;  // fidelity weight
  int box = 25;         // odd nonlocal window side
  int patch = 5;        // odd patch side
  double kappa = 0.0;   // similarity bandwidth; <= 0 requests self-tuning
  double convexify_c = 5.0;  // quadratic shift making the well split convex

  void validate() const;
};

// Sparse symmetric patch-similarity weights over box-neighborhood pairs.
struct GraphWeights {
  int height = 0;
  int width = 0;
  SparseMatrix w;   // zero diagonal, entries in (0, 1]
  Vector degree;    // row sums
  double kappa_sq = 0.0;  // bandwidth actually used
  int box_used = 0;       // after shrinking for small images

  Index pixels() const { return w.rows(); }
};

// Gaussian patch weights w_ij = exp(-||P_i - P_j||^2 / kappa^2) restricted to
// the box window. Patches use symmetric boundary padding; kappa self-tunes to
// the mean squared patch distance over a 1% sample of in-box pairs.
GraphWeights build_weights(const Matrix& image, const GlParams& p,
                           std::uint64_t seed);

struct PriorLabels {
  Vector mask;    // Lambda(i) in {0,1}
  Vector labels;  // y(i) in {-1,0,+1}; nonzero label implies mask = 1
};

struct GlEnergyTerms {
  double dirichlet = 0.0;
  double double_well = 0.0;
  double fidelity = 0.0;
  double total() const { return dirichlet + double_well + fidelity; }
};

// The three energy terms: ordered-pair Dirichlet sum, well 1/(4 tau) sum
// (x_i^2-1)^2, and the label fidelity.
GlEnergyTerms gl_energy_terms(const Vector& x, const GraphWeights& w,
                              const PriorLabels& prior, const GlParams& p);

// DC split with f the fidelity, g1 the Dirichlet energy plus the
// convexifying shift c/(2 tau) ||x||^2, and g2 = (c/2 ||x||^2 - W(x)) / tau.
// The shift cancels so the split evaluates to the model energy; g2 is convex
// for |x_i| <= sqrt((c+1)/3).
DcProblem build_gl_problem(std::shared_ptr<const GraphWeights> w,
                           std::shared_ptr<const PriorLabels> prior,
                           const GlParams& p);

// 2|X n Y| / (|X| + |Y|); 1 when both masks are empty.
double dice(const std::vector<bool>& seg, const std::vector<bool>& truth);
// Segmentation thresholded at x > 0 against a truth mask.
double dice_score(const Vector& x, const std::vector<bool>& truth);

struct TwoPhaseInstance {
  Matrix image;
  PriorLabels prior;
  std::vector<bool> truth;
};

// Synthetic two-phase test image: a dark blob on a bright background with
// pixel noise, plus a random prior labeling of the given fraction of pixels.
TwoPhaseInstance make_two_phase_instance(int size, double prior_fraction,
                                         double noise_std, std::uint64_t seed);

}  // namespace dcopt
