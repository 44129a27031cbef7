#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mcrf/postproc.hpp"

namespace mcrf {

// Exact-match chunk scores, micro-averaged over a corpus.
struct ChunkMetrics {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Predicted chunks split by legality and correctness.
struct IllegalStats {
  std::size_t legal_tp = 0;
  std::size_t illegal_tp = 0;
  std::size_t legal_fp = 0;
  std::size_t illegal_fp = 0;
  double ratio_illegal_tp_over_illegal = 0.0;
  double ratio_illegal_fp_over_fp = 0.0;
  double ratio_illegal_over_total = 0.0;

  std::size_t total() const { return legal_tp + illegal_tp + legal_fp + illegal_fp; }
  std::size_t illegal() const { return illegal_tp + illegal_fp; }
};

// One sentence.
ChunkMetrics chunk_prf(std::span<const Segment> gold, std::span<const Segment> pred);
// Corpus: gold[n] and pred[n] belong to sentence n.
ChunkMetrics chunk_prf(std::span<const std::vector<Segment>> gold, std::span<const std::vector<Segment>> pred);

IllegalStats illegal_stats(std::span<const Segment> gold, std::span<const Segment> pred);
IllegalStats illegal_stats(std::span<const std::vector<Segment>> gold,
                           std::span<const std::vector<Segment>> pred);

// Percentage with one decimal, e.g. "12.5%".
std::string format_percent(double ratio);

// Table with the columns legal&TP, illegal&TP, legal&FP, illegal&FP and the three ratios.
std::string format_illegal_table(const IllegalStats& stats, const std::string& row_label);
// "key=value" lines: precision, recall, f1, tp, fp, fn and the illegal counts/ratios.
std::string format_key_values(const ChunkMetrics& metrics, const IllegalStats& stats);

}  // namespace mcrf
