#include "dcopt/graphgl.hpp"

#include <cmath>
#include <stdexcept>

#include "dcopt/rng.hpp"

namespace dcopt {

void GlParams::validate() const {
  if (!(tau > 0.0) || !(gamma >= 0.0)) throw std::invalid_argument("tau > 0, gamma >= 0 required");
  if (box < 1 || box % 2 == 0) throw std::invalid_argument("box side must be odd");
  if (patch < 1 || patch % 2 == 0) throw std::invalid_argument("patch side must be odd");
  if (!(convexify_c > 0.0)) throw std::invalid_argument("convexify_c must be > 0");
}

namespace {

// symmetric padding: -1 -> 0, -2 -> 1, n -> n-1, ...
inline int reflect(int i, int n) {
  if (i < 0) i = -i - 1;
  if (i >= n) i = 2 * n - 1 - i;
  return i;
}

int shrink_box(int box, int h, int w) {
  int lim = 2 * std::min(h, w) / 3;
  if (lim % 2 == 0) lim += 1;
  return std::min(box, lim);
}

// patch vectors, one row per pixel, raw intensities
Matrix extract_patches(const Matrix& image, int patch) {
  const int h = static_cast<int>(image.rows());
  const int w = static_cast<int>(image.cols());
  const int r = patch / 2;
  Matrix patches(h * w, patch * patch);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      int idx = i * w + j;
      int c = 0;
      for (int di = -r; di <= r; ++di)
        for (int dj = -r; dj <= r; ++dj)
          patches(idx, c++) = image(reflect(i + di, h), reflect(j + dj, w));
    }
  return patches;
}

}  // namespace

GraphWeights build_weights(const Matrix& image, const GlParams& p,
                           std::uint64_t seed) {
  p.validate();
  const int h = static_cast<int>(image.rows());
  const int w = static_cast<int>(image.cols());
  if (h < p.patch || w < p.patch)
    throw std::invalid_argument("image smaller than the patch window");

  const int box = shrink_box(p.box, h, w);
  const int br = box / 2;
  const Index n = static_cast<Index>(h) * w;
  Matrix patches = extract_patches(image, p.patch);

  double kappa_sq;
  if (p.kappa > 0.0) {
    kappa_sq = p.kappa * p.kappa;
  } else {
    // self-tuning: mean squared patch distance over ~1% of in-box pairs
    Rng rng(seed);
    const long wanted = std::max<long>(200, n * (box * box - 1) / 100 / 2);
    double acc = 0.0;
    long got = 0;
    for (long t = 0; t < wanted; ++t) {
      int i = static_cast<int>(rng.below(h));
      int j = static_cast<int>(rng.below(w));
      int di = static_cast<int>(rng.below(box)) - br;
      int dj = static_cast<int>(rng.below(box)) - br;
      int i2 = i + di, j2 = j + dj;
      if (i2 < 0 || i2 >= h || j2 < 0 || j2 >= w) continue;
      if (di == 0 && dj == 0) continue;
      acc += (patches.row(i * w + j) - patches.row(i2 * w + j2)).squaredNorm();
      ++got;
    }
    kappa_sq = got > 0 ? acc / static_cast<double>(got) : 1.0;
    if (kappa_sq < 1e-12) kappa_sq = 1e-12;
  }

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(n) * box * box / 2);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      const Index idx = static_cast<Index>(i) * w + j;
      for (int di = -br; di <= br; ++di) {
        for (int dj = -br; dj <= br; ++dj) {
          int i2 = i + di, j2 = j + dj;
          if (i2 < 0 || i2 >= h || j2 < 0 || j2 >= w) continue;
          const Index idx2 = static_cast<Index>(i2) * w + j2;
          if (idx2 <= idx) continue;  // fill the upper triangle, mirror below
          double d2 = (patches.row(idx) - patches.row(idx2)).squaredNorm();
          double wij = std::exp(-d2 / kappa_sq);
          trips.emplace_back(idx, idx2, wij);
          trips.emplace_back(idx2, idx, wij);
        }
      }
    }

  GraphWeights gw;
  gw.height = h;
  gw.width = w;
  gw.box_used = box;
  gw.kappa_sq = kappa_sq;
  gw.w.resize(n, n);
  gw.w.setFromTriplets(trips.begin(), trips.end());
  gw.w.makeCompressed();
  gw.degree = gw.w * Vector::Ones(n);
  return gw;
}

GlEnergyTerms gl_energy_terms(const Vector& x, const GraphWeights& gw,
                              const PriorLabels& prior, const GlParams& p) {
  if (x.size() != gw.pixels() || prior.mask.size() != x.size())
    throw std::invalid_argument("gl energy dimension mismatch");
  GlEnergyTerms t;
  // ordered double sum over stored (i,j) pairs
  double dsum = 0.0;
  for (int k = 0; k < gw.w.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(gw.w, k); it; ++it) {
      double diff = x[it.row()] - x[it.col()];
      dsum += it.value() * diff * diff;
    }
  t.dirichlet = 0.5 * p.tau * dsum;
  double well = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    double s = x[i] * x[i] - 1.0;
    well += s * s;
  }
  t.double_well = 0.25 * well / p.tau;
  double fid = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    double d = x[i] - prior.labels[i];
    fid += prior.mask[i] * d * d;
  }
  t.fidelity = 0.5 * p.gamma * fid;
  return t;
}

namespace {

// g2 = (c/2 ||x||^2 - W(x)) / tau, smooth, convex on |x_i| <= sqrt((c+1)/3)
class WellComplement final : public ConvexFn {
 public:
  WellComplement(Index dim, double c, double tau) : dim_(dim), c_(c), tau_(tau) {}
  Index dim() const override { return dim_; }
  double value(const Vector& x) const override {
    double acc = 0.0;
    for (Index i = 0; i < x.size(); ++i) {
      double s = x[i] * x[i] - 1.0;
      acc += 0.5 * c_ * x[i] * x[i] - 0.25 * s * s;
    }
    return acc / tau_;
  }
  Vector subgradient(const Vector& x) const override {
    Vector g(x.size());
    for (Index i = 0; i < x.size(); ++i)
      g[i] = (c_ * x[i] - (x[i] * x[i] - 1.0) * x[i]) / tau_;
    return g;
  }
  bool smooth() const override { return true; }
  double grad_lipschitz() const override {
    // |g2''| = |c + 1 - 3 s^2| / tau, bounded by (c+13)/tau on |s| <= 2
    return (c_ + 13.0) / tau_;
  }

 private:
  Index dim_;
  double c_, tau_;
};

}  // namespace

DcProblem build_gl_problem(std::shared_ptr<const GraphWeights> w,
                           std::shared_ptr<const PriorLabels> prior,
                           const GlParams& p) {
  p.validate();
  const Index n = w->pixels();
  if (prior->mask.size() != n || prior->labels.size() != n)
    throw std::invalid_argument("prior label dimension mismatch");
  for (Index i = 0; i < n; ++i)
    if (prior->labels[i] != 0.0 && prior->mask[i] != 1.0)
      throw std::invalid_argument("nonzero prior label outside the mask");

  // fidelity: 0.5 <x, gamma Lambda x> - <gamma Lambda y, x> + const
  QuadraticForm fid;
  Vector fd = p.gamma * prior->mask;
  fid.hessian = std::make_shared<DiagonalOperator>(fd);
  fid.linear = fd.cwiseProduct(prior->labels);
  fid.constant = 0.5 * prior->labels.dot(fid.linear);
  auto f = std::make_shared<QuadraticSmooth>(std::move(fid), p.gamma);

  // dirichlet + shift: hessian 2 tau L_w + (c/tau) I
  SparseMatrix q = -2.0 * p.tau * w->w;
  Vector diag_shift = 2.0 * p.tau * w->degree;
  diag_shift.array() += p.convexify_c / p.tau;
  SparseMatrix d(n, n);
  d.reserve(Eigen::VectorXi::Constant(static_cast<int>(n), 1));
  for (Index i = 0; i < n; ++i) d.insert(i, i) = diag_shift[i];
  q += d;
  QuadraticForm dir;
  dir.hessian = std::make_shared<SparseOperator>(std::move(q));
  dir.linear = Vector::Zero(n);
  double lip = diag_shift.maxCoeff() + 2.0 * p.tau * w->degree.maxCoeff();
  auto g1 = std::make_shared<QuadraticConvex>(std::move(dir), lip);

  auto g2 = std::make_shared<WellComplement>(n, p.convexify_c, p.tau);

  DcProblem prob;
  prob.f = std::move(f);
  prob.g1 = std::move(g1);
  prob.g2 = std::move(g2);
  prob.g1_strong_convexity = p.convexify_c / p.tau;
  prob.descriptor = "graph_gl/" + std::to_string(w->height) + "x" +
                    std::to_string(w->width);
  return prob;
}

double dice(const std::vector<bool>& seg, const std::vector<bool>& truth) {
  if (seg.size() != truth.size())
    throw std::invalid_argument("dice mask shape mismatch");
  long inter = 0, a = 0, b = 0;
  for (std::size_t i = 0; i < seg.size(); ++i) {
    a += seg[i];
    b += truth[i];
    inter += seg[i] && truth[i];
  }
  if (a + b == 0) return 1.0;
  return 2.0 * static_cast<double>(inter) / static_cast<double>(a + b);
}

double dice_score(const Vector& x, const std::vector<bool>& truth) {
  if (static_cast<std::size_t>(x.size()) != truth.size())
    throw std::invalid_argument("dice mask shape mismatch");
  std::vector<bool> seg(truth.size());
  for (Index i = 0; i < x.size(); ++i) seg[i] = x[i] > 0.0;
  return dice(seg, truth);
}

TwoPhaseInstance make_two_phase_instance(int size, double prior_fraction,
                                         double noise_std, std::uint64_t seed) {
  if (size < 8) throw std::invalid_argument("image side must be >= 8");
  Rng rng(seed);
  TwoPhaseInstance inst;
  inst.image.resize(size, size);
  inst.truth.assign(static_cast<std::size_t>(size) * size, false);

  // dark irregular blob (two overlapping disks) on a bright background
  const double cx1 = 0.38 * size, cy1 = 0.42 * size, r1 = 0.22 * size;
  const double cx2 = 0.62 * size, cy2 = 0.58 * size, r2 = 0.18 * size;
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j) {
      bool inside = (i - cy1) * (i - cy1) + (j - cx1) * (j - cx1) <= r1 * r1 ||
                    (i - cy2) * (i - cy2) + (j - cx2) * (j - cx2) <= r2 * r2;
      double v = inside ? 0.25 : 0.75;
      v += noise_std * rng.normal();
      inst.image(i, j) = std::min(1.0, std::max(0.0, v));
      inst.truth[static_cast<std::size_t>(i) * size + j] = inside;
    }

  const Index n = static_cast<Index>(size) * size;
  inst.prior.mask = Vector::Zero(n);
  inst.prior.labels = Vector::Zero(n);
  long want = std::lround(prior_fraction * static_cast<double>(n));
  for (long placed = 0; placed < want;) {
    Index i = static_cast<Index>(rng.below(n));
    if (inst.prior.mask[i] != 0.0) continue;
    inst.prior.mask[i] = 1.0;
    inst.prior.labels[i] = inst.truth[static_cast<std::size_t>(i)] ? 1.0 : -1.0;
    ++placed;
  }
  return inst;
}

}  // namespace dcopt
