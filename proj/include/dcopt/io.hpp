#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "dcopt/graphgl.hpp"
#include "dcopt/solver.hpp"

namespace dcopt {

// Sparse binary-classification dataset in the usual text format:
// one sample per line, "<label> <idx>:<val> ...", 1-based increasing indices.
struct Dataset {
  std::vector<std::vector<std::pair<int, double>>> rows;  // 0-based indices
  std::vector<double> labels;                             // -1 or +1
  int features = 0;

  Index samples() const { return static_cast<Index>(rows.size()); }
  Matrix to_dense() const;
};

// Throws std::runtime_error with the offending line number on malformed
// input. Labels 0/1 map to -1/+1.
Dataset parse_libsvm(std::istream& in);

// P2/P5 PGM, maxval <= 65535, intensities scaled to [0,1].
Matrix load_pgm(std::istream& in);

// Pure white pixels carry the +1 prior, pure black the -1 prior; anything
// else is unlabeled.
PriorLabels load_mask(std::istream& in);

struct TraceMetadata {
  std::string algorithm;
  std::string profile;
  std::uint64_t seed = 0;
  std::string problem;
  std::string status;
};

struct TraceFile {
  TraceMetadata meta;
  std::vector<TraceRow> rows;
};

// CSV with a versioned metadata row, then a header row, then one row per
// iteration. Numeric fields print with round-trippable precision; absent
// values (NaN) print as empty fields. The timing column is last so
// determinism comparisons can strip it.
void write_trace(const TraceFile& t, std::ostream& out);
TraceFile read_trace(std::istream& in);

struct ReportCell {
  std::string algorithm;
  std::string termination;
  double tolerance = 0.0;
  std::string status;
  long iterations = 0;
  double wall_seconds = 0.0;
  double final_energy = 0.0;
  double extra = std::numeric_limits<double>::quiet_NaN();  // e.g. dice
};

// JSON report mirroring the algorithms-by-tolerances grid; cells that hit the
// iteration cap report "---" for the time, matching the tables' convention.
std::string write_report_json(const std::string& experiment_name,
                              const std::string& problem,
                              std::uint64_t seed,
                              const std::vector<ReportCell>& cells,
                              double setup_seconds = 0.0);

}  // namespace dcopt
