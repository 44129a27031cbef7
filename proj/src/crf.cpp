#include "mcrf/crf.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mcrf/error.hpp"
#include "mcrf/numeric.hpp"

namespace mcrf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_shapes(const EmissionSequence& emissions, const TransitionMatrix& trans) {
  MCRF_EXPECT(emissions.rows() >= 1, "empty emission sequence");
  const std::size_t d = trans.num_tags();
  MCRF_EXPECT(d >= 1, "transition matrix has no tags");
  MCRF_EXPECT(trans.a.rows() == d && trans.a.cols() == d, "transition matrix is not d x d");
  MCRF_EXPECT(emissions.cols() == d, "emission width differs from the number of tags");
}

// alpha(t, j): log-sum of scores of all prefixes ending in tag j at t.
Matrix forward(const EmissionSequence& l, const TransitionMatrix& trans) {
  const std::size_t T = l.rows();
  const std::size_t d = l.cols();
  Matrix alpha(T, d);
  for (std::size_t j = 0; j < d; ++j) alpha(0, j) = trans.start[j] + l(0, j);
  std::vector<double> terms(d);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t i = 0; i < d; ++i) terms[i] = alpha(t - 1, i) + trans.a(i, j);
      alpha(t, j) = l(t, j) + log_sum_exp(terms);
    }
  }
  return alpha;
}

// beta(t, i): log-sum of scores of all suffixes after position t given tag i at t.
Matrix backward(const EmissionSequence& l, const TransitionMatrix& trans) {
  const std::size_t T = l.rows();
  const std::size_t d = l.cols();
  Matrix beta(T, d);
  std::vector<double> terms(d);
  for (std::size_t t = T - 1; t-- > 0;) {
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) terms[j] = trans.a(i, j) + l(t + 1, j) + beta(t + 1, j);
      beta(t, i) = log_sum_exp(terms);
    }
  }
  return beta;
}

void check_batch(std::span<const SampleRef> batch, const TransitionMatrix& trans) {
  MCRF_EXPECT(!batch.empty(), "empty batch");
  for (const auto& s : batch) {
    check_shapes(s.emissions, trans);
    MCRF_EXPECT(s.gold.size() == s.emissions.rows(), "gold path length differs from emissions");
  }
}

// Calls fn(path) for every path of length T over d tags, in lexicographic order.
template <typename Fn>
void for_each_path(std::size_t T, std::size_t d, Fn&& fn) {
  if (std::pow(static_cast<double>(d), static_cast<double>(T)) > kMaxEnumeratedPaths) {
    throw SizeError("refusing to enumerate " + std::to_string(d) + "^" + std::to_string(T) +
                    " paths (limit 1e7)");
  }
  Path path(T, 0);
  for (;;) {
    fn(static_cast<const Path&>(path));
    std::size_t pos = T;
    while (pos > 0) {
      --pos;
      if (static_cast<std::size_t>(++path[pos]) < d) break;
      path[pos] = 0;
      if (pos == 0) return;
    }
  }
}

// Streaming log-sum-exp.
class LogAccumulator {
 public:
  void add(double x) {
    if (x == kNegInf) return;
    if (x > max_) {
      sum_ = sum_ * std::exp(max_ - x) + 1.0;
      max_ = x;
    } else {
      sum_ += std::exp(x - max_);
    }
  }
  double value() const { return sum_ == 0.0 ? kNegInf : max_ + std::log(sum_); }

 private:
  double max_ = kNegInf;
  double sum_ = 0.0;
};

}  // namespace

double path_score(const EmissionSequence& emissions, const TransitionMatrix& trans,
                  std::span<const int> path) {
  check_shapes(emissions, trans);
  MCRF_EXPECT(path.size() == emissions.rows(), "path length differs from emissions");
  const auto d = static_cast<int>(trans.num_tags());
  for (int tag : path) MCRF_EXPECT(tag >= 0 && tag < d, "tag index out of range");
  double s = trans.start[static_cast<std::size_t>(path[0])];
  for (std::size_t t = 0; t < path.size(); ++t) {
    s += emissions(t, static_cast<std::size_t>(path[t]));
    if (t + 1 < path.size()) {
      s += trans.a(static_cast<std::size_t>(path[t]), static_cast<std::size_t>(path[t + 1]));
    }
  }
  return s;
}

double log_partition(const EmissionSequence& emissions, const TransitionMatrix& trans) {
  check_shapes(emissions, trans);
  const Matrix alpha = forward(emissions, trans);
  return log_sum_exp(alpha.row(alpha.rows() - 1));
}

double log_partition_backward(const EmissionSequence& emissions, const TransitionMatrix& trans) {
  check_shapes(emissions, trans);
  const Matrix beta = backward(emissions, trans);
  const std::size_t d = trans.num_tags();
  std::vector<double> terms(d);
  for (std::size_t j = 0; j < d; ++j) terms[j] = trans.start[j] + emissions(0, j) + beta(0, j);
  return log_sum_exp(terms);
}

Marginals marginals(const EmissionSequence& emissions, const TransitionMatrix& trans) {
  check_shapes(emissions, trans);
  const std::size_t T = emissions.rows();
  const std::size_t d = emissions.cols();
  const Matrix alpha = forward(emissions, trans);
  const Matrix beta = backward(emissions, trans);

  Marginals m;
  m.log_z = log_sum_exp(alpha.row(T - 1));
  m.unary = Matrix(T, d);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t j = 0; j < d; ++j) m.unary(t, j) = std::exp(alpha(t, j) + beta(t, j) - m.log_z);
  }
  m.pairwise.reserve(T - 1);
  for (std::size_t t = 0; t + 1 < T; ++t) {
    Matrix p(d, d);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        p(i, j) = std::exp(alpha(t, i) + trans.a(i, j) + emissions(t + 1, j) + beta(t + 1, j) - m.log_z);
      }
    }
    m.pairwise.push_back(std::move(p));
  }
  return m;
}

double nll_loss(std::span<const SampleRef> batch, const TransitionMatrix& trans) {
  check_batch(batch, trans);
  double total = 0.0;
  for (const auto& s : batch) total += log_partition(s.emissions, trans) - path_score(s.emissions, trans, s.gold);
  return total / static_cast<double>(batch.size());
}

LossAndGradients loss_and_gradients(std::span<const SampleRef> batch, const TransitionMatrix& trans) {
  check_batch(batch, trans);
  const std::size_t d = trans.num_tags();
  const double scale = 1.0 / static_cast<double>(batch.size());

  LossAndGradients out;
  out.grads.d_a = Matrix(d, d);
  out.grads.d_start.assign(d, 0.0);
  out.grads.d_logits.reserve(batch.size());

  for (const auto& s : batch) {
    const std::size_t T = s.emissions.rows();
    const Marginals m = marginals(s.emissions, trans);
    out.loss += scale * (m.log_z - path_score(s.emissions, trans, s.gold));

    Matrix d_logits(T, d);
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t j = 0; j < d; ++j) d_logits(t, j) = scale * m.unary(t, j);
      d_logits(t, static_cast<std::size_t>(s.gold[t])) -= scale;
    }
    for (std::size_t j = 0; j < d; ++j) out.grads.d_start[j] += scale * m.unary(0, j);
    out.grads.d_start[static_cast<std::size_t>(s.gold[0])] -= scale;
    for (std::size_t t = 0; t + 1 < T; ++t) {
      const Matrix& p = m.pairwise[t];
      for (std::size_t k = 0; k < d * d; ++k) out.grads.d_a.values()[k] += scale * p.values()[k];
      out.grads.d_a(static_cast<std::size_t>(s.gold[t]), static_cast<std::size_t>(s.gold[t + 1])) -= scale;
    }
    out.grads.d_logits.push_back(std::move(d_logits));
  }
  return out;
}

Path viterbi(const EmissionSequence& emissions, const TransitionMatrix& trans) {
  check_shapes(emissions, trans);
  const std::size_t T = emissions.rows();
  const std::size_t d = emissions.cols();

  // best(t, j): best score of a suffix starting with tag j at t. Decoding then
  // walks left to right taking the smallest maximizing tag, which yields the
  // lexicographically smallest optimal path.
  Matrix best(T, d);
  for (std::size_t j = 0; j < d; ++j) best(T - 1, j) = emissions(T - 1, j);
  for (std::size_t t = T - 1; t-- > 0;) {
    for (std::size_t i = 0; i < d; ++i) {
      double m = kNegInf;
      for (std::size_t j = 0; j < d; ++j) m = std::max(m, trans.a(i, j) + best(t + 1, j));
      best(t, i) = emissions(t, i) + m;
    }
  }

  Path path(T);
  double top = kNegInf;
  for (std::size_t j = 0; j < d; ++j) {
    const double v = trans.start[j] + best(0, j);
    if (v > top) {
      top = v;
      path[0] = static_cast<int>(j);
    }
  }
  for (std::size_t t = 1; t < T; ++t) {
    const auto prev = static_cast<std::size_t>(path[t - 1]);
    top = kNegInf;
    for (std::size_t j = 0; j < d; ++j) {
      const double v = trans.a(prev, j) + best(t, j);
      if (v > top) {
        top = v;
        path[t] = static_cast<int>(j);
      }
    }
  }
  return path;
}

double brute_force_log_partition(const EmissionSequence& emissions, const TransitionMatrix& trans,
                                 bool restrict_to_legal, const TransitionRuleSet& rules) {
  check_shapes(emissions, trans);
  LogAccumulator acc;
  for_each_path(emissions.rows(), emissions.cols(), [&](const Path& p) {
    if (restrict_to_legal && !rules.is_legal(p)) return;
    acc.add(path_score(emissions, trans, p));
  });
  return acc.value();
}

ScoredPath brute_force_best(const EmissionSequence& emissions, const TransitionMatrix& trans,
                            bool restrict_to_legal, const TransitionRuleSet& rules) {
  check_shapes(emissions, trans);
  ScoredPath best{{}, kNegInf};
  for_each_path(emissions.rows(), emissions.cols(), [&](const Path& p) {
    if (restrict_to_legal && !rules.is_legal(p)) return;
    const double s = path_score(emissions, trans, p);
    if (best.path.empty() || s > best.score) best = {p, s};
  });
  return best;
}

LossAndGradients brute_force_loss_and_gradients(std::span<const SampleRef> batch,
                                                 const TransitionMatrix& trans, bool restrict_to_legal,
                                                 const TransitionRuleSet& rules) {
  check_batch(batch, trans);
  const std::size_t d = trans.num_tags();
  const double scale = 1.0 / static_cast<double>(batch.size());

  LossAndGradients out;
  out.grads.d_a = Matrix(d, d);
  out.grads.d_start.assign(d, 0.0);
  for (const auto& s : batch) {
    const std::size_t T = s.emissions.rows();
    const double log_z = brute_force_log_partition(s.emissions, trans, restrict_to_legal, rules);
    out.loss += scale * (log_z - path_score(s.emissions, trans, s.gold));

    Matrix d_logits(T, d);
    for_each_path(T, d, [&](const Path& p) {
      if (restrict_to_legal && !rules.is_legal(p)) return;
      const double w = scale * std::exp(path_score(s.emissions, trans, p) - log_z);
      out.grads.d_start[static_cast<std::size_t>(p[0])] += w;
      for (std::size_t t = 0; t < T; ++t) {
        d_logits(t, static_cast<std::size_t>(p[t])) += w;
        if (t + 1 < T) out.grads.d_a(static_cast<std::size_t>(p[t]), static_cast<std::size_t>(p[t + 1])) += w;
      }
    });
    out.grads.d_start[static_cast<std::size_t>(s.gold[0])] -= scale;
    for (std::size_t t = 0; t < T; ++t) {
      d_logits(t, static_cast<std::size_t>(s.gold[t])) -= scale;
      if (t + 1 < T) {
        out.grads.d_a(static_cast<std::size_t>(s.gold[t]), static_cast<std::size_t>(s.gold[t + 1])) -= scale;
      }
    }
    out.grads.d_logits.push_back(std::move(d_logits));
  }
  return out;
}

}  // namespace mcrf
