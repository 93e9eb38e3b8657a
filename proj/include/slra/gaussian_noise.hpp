#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slra/dense_matrix.hpp"
#include "slra/factor.hpp"
#include "slra/ledger.hpp"

namespace slra {

// A = lambda X + G with X a disjoint sparse rank-k signal of operator norm 1.
struct PlantedInstance {
  int n = 0, s = 0, k = 0;
  double lambda = 0.0;
  SparseRankKFactor x;
  DenseMatrix a;
  std::uint64_t seed = 0;
};

// s uniformly chosen coordinates with i.i.d. standard normal values.
std::vector<double> gen_sparse_vector(int n, int s, std::uint64_t seed);

// k disjoint s x s rank-1 blocks, tau renormalized so max |tau| = 1 (operator
// norm 1 by disjointness). Default lambda is sqrt(n).
PlantedInstance gen_planted(int n, int s, int k, double lambda, std::uint64_t seed);

struct FlatLevel {
  int s_level = 1;
  double threshold = 0.0;  // squared-value cutoff defining the level set
  int count = 0;           // entries at or above the threshold
};

// Smallest power-of-two level whose set holds at least s_level/2 entries of
// squared value >= ||v||^2 / (s_level (1 + log2 m)).
FlatLevel flat_level(const std::vector<double>& v);

struct DetectConstants {
  // Small-s scan (4-norm statistic over sampled entries).
  double alpha_c = 0.5;    // alpha = min(1, alpha_c / (s'^2 ln(s^2 k)))
  double m_c = 1.0;        // m = ceil(m_c n^2 alpha^2)
  double trials_c = 9.0;   // trials = ceil(trials_c s'^2 ln^2(s^2 k))
  double fpr_budget = 0.04;

  // Large-s branches (sampled submatrix + sparse rank-1 scan).
  double submat_c = 4.0;   // n_i multiplier
  double t_c = 1.0;        // t_i = ceil(t_c n_i s_i / n)
  double large_fpr = 0.04;
  int calib_sims = 60;     // per-configuration null simulations (Gumbel fit)
};

struct TrialStat {
  std::string branch;  // "fourth_moment", "large_frob", "small_frob"
  int level = 0;       // s' or packed (s1, s2)
  double statistic = 0.0;
  double threshold = 0.0;
  bool fired = false;
  bool skipped = false;  // enumeration over budget at this guess
};

struct DetectionReport {
  bool signal = false;
  std::string regime;  // "small_s" | "large_frob" | "small_frob"
  std::vector<TrialStat> stats;
  MeasurementLedger ledger;
};

// Algorithm for the s <= sqrt(n / k log n) regime: repeated uniform entry
// samples scored by their fourth moment against per-level null quantiles.
DetectionReport detect_small_s(const DenseMatrix& a, int s, int k, std::uint64_t seed,
                               const DetectConstants& c = {});

// Complementary regime: both Frobenius branches run over power-of-two guesses
// (s1, s2); each samples an n1 x n2 submatrix and scans t1 x t2-sparse rank-1
// directions exactly (the eps -> 0 limit of the net inner products), against
// calibrated null quantiles. A fourth-moment pass covers sparse components.
DetectionReport detect_large_s(const DenseMatrix& a, int s, int k, std::uint64_t seed,
                               const DetectConstants& c = {});

struct EstimateOptions {
  double m_c = 4.0;  // m = ceil(m_c (nsk/eps^4) ln(n/(eps s)))
};

struct EstimateResult {
  SparseRankKFactor factor;  // unit-Frobenius rank-1 per component
  int m = 0;
  bool hypothesis_ok = false;
  MeasurementLedger ledger;
};

// Theorem hypothesis sqrt(2s log(3en/(eps s))) <= eps^2 sqrt(n).
bool estimate_hypothesis_ok(int n, int s, double eps);
int estimate_min_n(int s, double eps, int max_n = 1 << 22);

// Net-argmax estimator from m Gaussian measurements: backprojects the sketch
// and maximizes the rank-1 support score exactly per support pair (pruned
// scan; exact argmax of the infinitely fine net).
EstimateResult estimate_signal(const DenseMatrix& a, int s, int k, double eps, std::uint64_t seed,
                               const EstimateOptions& opt = {});

}  // namespace slra
