#include "dcopt/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace dcopt {

namespace {

[[noreturn]] void parse_fail(long line, const std::string& what) {
  throw std::runtime_error("parse error at line " + std::to_string(line) +
                           ": " + what);
}

double to_double(const std::string& tok, long line) {
  try {
    std::size_t pos = 0;
    double v = std::stod(tok, &pos);
    if (pos != tok.size()) parse_fail(line, "trailing characters in '" + tok + "'");
    return v;
  } catch (const std::invalid_argument&) {
    parse_fail(line, "non-numeric token '" + tok + "'");
  } catch (const std::out_of_range&) {
    parse_fail(line, "out-of-range token '" + tok + "'");
  }
}

}  // namespace

Matrix Dataset::to_dense() const {
  Matrix m = Matrix::Zero(samples(), features);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (const auto& [j, v] : rows[i]) m(static_cast<Index>(i), j) = v;
  return m;
}

Dataset parse_libsvm(std::istream& in) {
  Dataset d;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;  // blank line

    double label = to_double(tok, lineno);
    if (label == 0.0) label = -1.0;
    if (label != 1.0 && label != -1.0)
      parse_fail(lineno, "label must be one of -1, 0, +1");

    std::vector<std::pair<int, double>> row;
    int prev_idx = 0;
    while (ls >> tok) {
      auto colon = tok.find(':');
      if (colon == std::string::npos)
        parse_fail(lineno, "expected idx:value, got '" + tok + "'");
      double idx_d = to_double(tok.substr(0, colon), lineno);
      int idx = static_cast<int>(idx_d);
      if (idx_d != idx || idx < 1) parse_fail(lineno, "bad feature index");
      if (idx <= prev_idx) parse_fail(lineno, "feature indices not increasing");
      double val = to_double(tok.substr(colon + 1), lineno);
      row.emplace_back(idx - 1, val);
      prev_idx = idx;
      d.features = std::max(d.features, idx);
    }
    d.rows.push_back(std::move(row));
    d.labels.push_back(label);
  }
  return d;
}

namespace {

int pgm_next_int(std::istream& in, long& line) {
  // skips whitespace and '#' comments
  for (;;) {
    int c = in.peek();
    if (c == EOF) throw std::runtime_error("truncated pgm header");
    if (c == '#') {
      std::string comment;
      std::getline(in, comment);
      ++line;
      continue;
    }
    if (std::isspace(c)) {
      if (c == '\n') ++line;
      in.get();
      continue;
    }
    break;
  }
  int v = 0;
  if (!(in >> v)) throw std::runtime_error("bad integer in pgm header");
  return v;
}

Matrix load_pgm_impl(std::istream& in) {
  char m0 = 0, m1 = 0;
  in.get(m0), in.get(m1);
  if (m0 != 'P' || (m1 != '2' && m1 != '5'))
    throw std::runtime_error("not a P2/P5 pgm stream");
  const bool binary = m1 == '5';
  long line = 1;
  int w = pgm_next_int(in, line);
  int h = pgm_next_int(in, line);
  int maxval = pgm_next_int(in, line);
  if (w <= 0 || h <= 0) throw std::runtime_error("bad pgm dimensions");
  if (maxval <= 0 || maxval > 65535) throw std::runtime_error("bad pgm maxval");

  Matrix img(h, w);
  if (binary) {
    in.get();  // single whitespace after maxval
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> buf(static_cast<std::size_t>(w) * h * bytes);
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
    if (in.gcount() != static_cast<std::streamsize>(buf.size()))
      throw std::runtime_error("truncated pgm payload");
    std::size_t p = 0;
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j) {
        int v = buf[p++];
        if (bytes == 2) v = (v << 8) | buf[p++];  // big-endian
        img(i, j) = static_cast<double>(v) / maxval;
      }
  } else {
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j) {
        int v = 0;
        if (!(in >> v)) throw std::runtime_error("truncated pgm payload");
        if (v < 0 || v > maxval) throw std::runtime_error("pgm sample out of range");
        img(i, j) = static_cast<double>(v) / maxval;
      }
  }
  return img;
}

}  // namespace

Matrix load_pgm(std::istream& in) { return load_pgm_impl(in); }

PriorLabels load_mask(std::istream& in) {
  // reparse at integer resolution: only exact white/black carry priors
  Matrix img = load_pgm_impl(in);
  PriorLabels p;
  const Index n = img.size();
  p.mask = Vector::Zero(n);
  p.labels = Vector::Zero(n);
  for (int i = 0; i < img.rows(); ++i)
    for (int j = 0; j < img.cols(); ++j) {
      Index idx = static_cast<Index>(i) * img.cols() + j;
      if (img(i, j) == 1.0) {
        p.mask[idx] = 1.0;
        p.labels[idx] = 1.0;
      } else if (img(i, j) == 0.0) {
        p.mask[idx] = 1.0;
        p.labels[idx] = -1.0;
      }
    }
  return p;
}

namespace {

std::string fmt_double(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_opt_double(const std::string& s) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::stod(s);
}

constexpr const char* kTraceMagic = "dcopt_trace";
constexpr const char* kTraceVersion = "v1";
constexpr const char* kTraceHeader =
    "n,energy,energy_xbar,lyap_a,lyap_h,d_norm,step_norm,lambda,beta,"
    "beta_next,a_n,delta_lambda,crit_residual,nu,dist_ref,wall_ms";

}  // namespace

void write_trace(const TraceFile& t, std::ostream& out) {
  out << kTraceMagic << ',' << kTraceVersion << ',' << csv_quote(t.meta.algorithm)
      << ',' << csv_quote(t.meta.profile) << ',' << t.meta.seed << ','
      << csv_quote(t.meta.problem) << ',' << csv_quote(t.meta.status) << '\n';
  out << kTraceHeader << '\n';
  for (const TraceRow& r : t.rows) {
    out << r.n << ',' << fmt_double(r.energy) << ',' << fmt_double(r.energy_xbar)
        << ',' << fmt_double(r.lyap_a) << ',' << fmt_double(r.lyap_h) << ','
        << fmt_double(r.d_norm) << ',' << fmt_double(r.step_norm) << ','
        << fmt_double(r.lambda) << ',' << fmt_double(r.beta) << ','
        << fmt_double(r.beta_next) << ',' << r.a_n << ',' << r.delta_lambda
        << ',' << fmt_double(r.crit_residual) << ',' << fmt_double(r.nu) << ','
        << fmt_double(r.dist_ref) << ',' << fmt_double(r.wall_ms) << '\n';
  }
}

TraceFile read_trace(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty trace stream");
  auto meta = split_csv_line(line);
  if (meta.size() != 7 || meta[0] != kTraceMagic)
    throw std::runtime_error("not a dcopt trace");
  if (meta[1] != kTraceVersion)
    throw std::runtime_error("unsupported trace version " + meta[1]);
  TraceFile t;
  t.meta.algorithm = meta[2];
  t.meta.profile = meta[3];
  t.meta.seed = std::stoull(meta[4]);
  t.meta.problem = meta[5];
  t.meta.status = meta[6];

  if (!std::getline(in, line)) throw std::runtime_error("missing trace header");
  if (line != kTraceHeader) throw std::runtime_error("unexpected trace header");

  long lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 16) parse_fail(lineno, "wrong column count");
    TraceRow r;
    r.n = std::stol(f[0]);
    r.energy = parse_opt_double(f[1]);
    r.energy_xbar = parse_opt_double(f[2]);
    r.lyap_a = parse_opt_double(f[3]);
    r.lyap_h = parse_opt_double(f[4]);
    r.d_norm = parse_opt_double(f[5]);
    r.step_norm = parse_opt_double(f[6]);
    r.lambda = parse_opt_double(f[7]);
    r.beta = parse_opt_double(f[8]);
    r.beta_next = parse_opt_double(f[9]);
    r.a_n = std::stoi(f[10]);
    r.delta_lambda = std::stoi(f[11]);
    r.crit_residual = parse_opt_double(f[12]);
    r.nu = parse_opt_double(f[13]);
    r.dist_ref = parse_opt_double(f[14]);
    r.wall_ms = parse_opt_double(f[15]);
    t.rows.push_back(r);
  }
  return t;
}

std::string write_report_json(const std::string& experiment_name,
                              const std::string& problem, std::uint64_t seed,
                              const std::vector<ReportCell>& cells,
                              double setup_seconds) {
  nlohmann::json j;
  j["schema"] = 1;
  j["experiment"] = experiment_name;
  j["problem"] = problem;
  j["seed"] = seed;
  if (setup_seconds > 0.0) j["setup_seconds"] = setup_seconds;
  j["cells"] = nlohmann::json::array();
  for (const ReportCell& c : cells) {
    nlohmann::json cell;
    cell["algorithm"] = c.algorithm;
    cell["termination"] = c.termination;
    cell["tolerance"] = c.tolerance;
    cell["status"] = c.status;
    cell["iterations"] = c.iterations;
    if (c.status == "max_iter")
      cell["cpu_time"] = "---";
    else
      cell["cpu_time"] = c.wall_seconds;
    cell["final_energy"] = c.final_energy;
    if (!std::isnan(c.extra)) cell["dice"] = c.extra;
    j["cells"].push_back(std::move(cell));
  }
  return j.dump(2) + "\n";
}

}  // namespace dcopt
