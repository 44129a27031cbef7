#include "mcrf/eval.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "mcrf/error.hpp"
#include "mcrf/text.hpp"

namespace mcrf {

namespace {

double safe_div(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

void check_disjoint(std::span<const Segment> segs) {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  spans.reserve(segs.size());
  for (const auto& s : segs) {
    MCRF_EXPECT(s.start < s.end, "empty segment");
    spans.emplace_back(s.start, s.end);
  }
  std::sort(spans.begin(), spans.end());
  for (std::size_t i = 1; i < spans.size(); ++i) {
    MCRF_EXPECT(spans[i].first >= spans[i - 1].second, "overlapping predicted segments");
  }
}

bool in_gold(std::span<const Segment> gold, const Segment& p) {
  return std::any_of(gold.begin(), gold.end(), [&](const Segment& g) { return g.same_span(p); });
}

void count(std::span<const Segment> gold, std::span<const Segment> pred, ChunkMetrics& m) {
  check_disjoint(pred);
  std::size_t tp = 0;
  for (const auto& p : pred) tp += in_gold(gold, p) ? 1 : 0;
  m.tp += tp;
  m.fp += pred.size() - tp;
  m.fn += gold.size() - tp;
}

void finish(ChunkMetrics& m) {
  m.precision = safe_div(static_cast<double>(m.tp), static_cast<double>(m.tp + m.fp));
  m.recall = safe_div(static_cast<double>(m.tp), static_cast<double>(m.tp + m.fn));
  m.f1 = safe_div(2.0 * m.precision * m.recall, m.precision + m.recall);
}

void count(std::span<const Segment> gold, std::span<const Segment> pred, IllegalStats& s) {
  for (const auto& p : pred) {
    const bool tp = in_gold(gold, p);
    if (p.legal()) {
      ++(tp ? s.legal_tp : s.legal_fp);
    } else {
      ++(tp ? s.illegal_tp : s.illegal_fp);
    }
  }
}

void finish(IllegalStats& s) {
  s.ratio_illegal_tp_over_illegal = safe_div(static_cast<double>(s.illegal_tp), static_cast<double>(s.illegal()));
  s.ratio_illegal_fp_over_fp =
      safe_div(static_cast<double>(s.illegal_fp), static_cast<double>(s.legal_fp + s.illegal_fp));
  s.ratio_illegal_over_total = safe_div(static_cast<double>(s.illegal()), static_cast<double>(s.total()));
}

}  // namespace

ChunkMetrics chunk_prf(std::span<const Segment> gold, std::span<const Segment> pred) {
  ChunkMetrics m;
  count(gold, pred, m);
  finish(m);
  return m;
}

ChunkMetrics chunk_prf(std::span<const std::vector<Segment>> gold, std::span<const std::vector<Segment>> pred) {
  MCRF_EXPECT(gold.size() == pred.size(), "gold and predicted corpora differ in sentence count");
  ChunkMetrics m;
  for (std::size_t n = 0; n < gold.size(); ++n) count(gold[n], pred[n], m);
  finish(m);
  return m;
}

IllegalStats illegal_stats(std::span<const Segment> gold, std::span<const Segment> pred) {
  IllegalStats s;
  count(gold, pred, s);
  finish(s);
  return s;
}

IllegalStats illegal_stats(std::span<const std::vector<Segment>> gold, std::span<const std::vector<Segment>> pred) {
  MCRF_EXPECT(gold.size() == pred.size(), "gold and predicted corpora differ in sentence count");
  IllegalStats s;
  for (std::size_t n = 0; n < gold.size(); ++n) count(gold[n], pred[n], s);
  finish(s);
  return s;
}

std::string format_percent(double ratio) { return format_fixed(100.0 * ratio, 1) + "%"; }

std::string format_illegal_table(const IllegalStats& s, const std::string& row_label) {
  std::ostringstream out;
  out << std::left << std::setw(12) << "" << std::right << std::setw(11) << "legal&TP" << std::setw(12)
      << "illegal&TP" << std::setw(11) << "legal&FP" << std::setw(12) << "illegal&FP" << std::setw(16)
      << "illegalTP/ill." << std::setw(15) << "illegalFP/FP" << std::setw(14) << "illegal/total" << "\n";
  out << std::left << std::setw(12) << row_label << std::right << std::setw(11) << s.legal_tp << std::setw(12)
      << s.illegal_tp << std::setw(11) << s.legal_fp << std::setw(12) << s.illegal_fp << std::setw(16)
      << format_percent(s.ratio_illegal_tp_over_illegal) << std::setw(15)
      << format_percent(s.ratio_illegal_fp_over_fp) << std::setw(14)
      << format_percent(s.ratio_illegal_over_total) << "\n";
  return out.str();
}

std::string format_key_values(const ChunkMetrics& m, const IllegalStats& s) {
  std::ostringstream out;
  out << "precision=" << format_fixed(100.0 * m.precision, 2) << "\n"
      << "recall=" << format_fixed(100.0 * m.recall, 2) << "\n"
      << "f1=" << format_fixed(100.0 * m.f1, 2) << "\n"
      << "tp=" << m.tp << "\nfp=" << m.fp << "\nfn=" << m.fn << "\n"
      << "legal_tp=" << s.legal_tp << "\nillegal_tp=" << s.illegal_tp << "\n"
      << "legal_fp=" << s.legal_fp << "\nillegal_fp=" << s.illegal_fp << "\n"
      << "illegal_tp_over_illegal=" << format_fixed(100.0 * s.ratio_illegal_tp_over_illegal, 1) << "\n"
      << "illegal_fp_over_fp=" << format_fixed(100.0 * s.ratio_illegal_fp_over_fp, 1) << "\n"
      << "illegal_over_total=" << format_fixed(100.0 * s.ratio_illegal_over_total, 1) << "\n";
  return out.str();
}

}  // namespace mcrf
