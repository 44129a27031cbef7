#pragma once

// Linear-chain CRF primitives.
//
// A path n_1..n_T over d tags scores
//   s(n) = start[n_1] + sum_t l[t, n_t] + sum_t a[n_t, n_{t+1}]
// and the model assigns p(n | x) = exp s(n) / Z with Z summed over all d^T
// paths. All dynamic programs run in log space.

#include <cstddef>
#include <span>
#include <vector>

#include "mcrf/matrix.hpp"
#include "mcrf/schemes.hpp"

namespace mcrf {

// T x d emission scores for one sentence.
using EmissionSequence = Matrix;
using Path = std::vector<int>;

struct TransitionMatrix {
  Matrix a;                   // d x d, a(i, j) scores tag j following tag i
  std::vector<double> start;  // length d, scores of the first tag

  static TransitionMatrix zeros(std::size_t num_tags) {
    return {Matrix(num_tags, num_tags), std::vector<double>(num_tags, 0.0)};
  }
  std::size_t num_tags() const { return start.size(); }

  friend bool operator==(const TransitionMatrix&, const TransitionMatrix&) = default;
};

// A (emissions, gold path) pair. Holds references; the caller owns the data.
struct SampleRef {
  const EmissionSequence& emissions;
  std::span<const int> gold;
};

// Gradients of the batch-averaged negative log-likelihood.
struct CrfGradients {
  std::vector<Matrix> d_logits;  // one T_n x d matrix per sample
  Matrix d_a;
  std::vector<double> d_start;
};

struct LossAndGradients {
  double loss = 0.0;
  CrfGradients grads;
};

// Forward-backward quantities for one sentence.
struct Marginals {
  double log_z = 0.0;
  Matrix unary;                  // T x d, P(y_t = j)
  std::vector<Matrix> pairwise;  // T-1 matrices, P(y_t = i, y_{t+1} = j)
};

struct ScoredPath {
  Path path;
  double score = 0.0;
};

double path_score(const EmissionSequence& emissions, const TransitionMatrix& trans,
                  std::span<const int> path);

// Forward recursion.
double log_partition(const EmissionSequence& emissions, const TransitionMatrix& trans);
// Backward recursion; equal to log_partition up to rounding.
double log_partition_backward(const EmissionSequence& emissions, const TransitionMatrix& trans);

Marginals marginals(const EmissionSequence& emissions, const TransitionMatrix& trans);

double nll_loss(std::span<const SampleRef> batch, const TransitionMatrix& trans);
LossAndGradients loss_and_gradients(std::span<const SampleRef> batch, const TransitionMatrix& trans);

// Highest-scoring path; ties resolve to the lexicographically smallest path.
Path viterbi(const EmissionSequence& emissions, const TransitionMatrix& trans);

// Enumeration oracles. They visit every one of the d^T paths and refuse with
// SizeError above kMaxEnumeratedPaths. With restrict_to_legal they skip paths
// that `rules` rejects (P/I instead of P).
inline constexpr double kMaxEnumeratedPaths = 1e7;

double brute_force_log_partition(const EmissionSequence& emissions, const TransitionMatrix& trans,
                                 bool restrict_to_legal, const TransitionRuleSet& rules);
ScoredPath brute_force_best(const EmissionSequence& emissions, const TransitionMatrix& trans,
                            bool restrict_to_legal, const TransitionRuleSet& rules);
// Loss and gradients as exact expectations over the enumerated path set.
LossAndGradients brute_force_loss_and_gradients(std::span<const SampleRef> batch,
                                                 const TransitionMatrix& trans, bool restrict_to_legal,
                                                 const TransitionRuleSet& rules);

}  // namespace mcrf
