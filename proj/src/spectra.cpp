// Copyright 2026 The rabi-dark Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rabi/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "rabi/darkstates.hpp"
#include "rabi/parallel.hpp"

namespace rabi {

int sector_parity(Sector s) {
  switch (s) {
    case Sector::even:
      return 1;
    case Sector::odd:
      return -1;
    case Sector::full:
      return 0;
  }
  return 0;
}

Sector parse_sector(const std::string& name) {
  if (name == "even") return Sector::even;
  if (name == "odd") return Sector::odd;
  if (name == "full") return Sector::full;
  throw ConfigError("unknown sector '" + name + "' (expected even, odd or full)");
}

std::string to_string(Sector s) {
  switch (s) {
    case Sector::even:
      return "even";
    case Sector::odd:
      return "odd";
    case Sector::full:
      return "full";
  }
  return "full";
}

namespace {

struct Block {
  int parity;
  std::vector<Index> idx;
  VectorXd values;
  MatrixXc vectors;
};

// Parity blocks to diagonalize.  A full-space request on a matrix that mixes
// parities yields one block labelled 0.
std::vector<std::pair<int, std::vector<Index>>> blocks_of(const BasisTable& basis, Sector s, bool mixes) {
  if (s != Sector::full) return {{sector_parity(s), basis.sector(sector_parity(s))}};
  if (!mixes) return {{1, basis.sector(1)}, {-1, basis.sector(-1)}};
  std::vector<Index> all(static_cast<std::size_t>(basis.size()));
  std::iota(all.begin(), all.end(), Index{0});
  return {{0, std::move(all)}};
}

EigenSystem merge_blocks(Index dim, const std::vector<Block>& blocks) {
  std::vector<std::tuple<double, int, Index, std::size_t>> order;
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (Index k = 0; k < blocks[b].values.size(); ++k)
      order.emplace_back(blocks[b].values(k), -blocks[b].parity, k, b);
  std::sort(order.begin(), order.end());

  EigenSystem es;
  const auto n = static_cast<Index>(order.size());
  es.energies.resize(n);
  es.states = MatrixXc::Zero(dim, n);
  es.parity.resize(static_cast<std::size_t>(n));
  for (Index c = 0; c < n; ++c) {
    const auto& [e, np, k, b] = order[static_cast<std::size_t>(c)];
    es.energies(c) = e;
    es.parity[static_cast<std::size_t>(c)] = -np;
    const Block& blk = blocks[b];
    for (std::size_t r = 0; r < blk.idx.size(); ++r) es.states(blk.idx[r], c) = blk.vectors(static_cast<Index>(r), k);
  }
  return es;
}

void require_hermitian(const MatrixXc& h) {
  if (h.rows() != h.cols()) throw ShapeError("Hamiltonian must be square");
  if (max_abs(h - h.adjoint()) >= 1e-12) throw ShapeError("eigensystem requires a Hermitian matrix");
}

}  // namespace

EigenSystem eigensystem(const BasisTable& basis, const SparseXd& h, Sector sector) {
  if (h.rows() != basis.size() || h.cols() != basis.size()) throw ShapeError("Hamiltonian does not match the basis");
  const SparseXd asym = h - SparseXd(h.transpose());
  for (Index k = 0; k < asym.outerSize(); ++k)
    for (SparseXd::InnerIterator it(asym, k); it; ++it)
      if (std::abs(it.value()) >= 1e-12) throw ShapeError("eigensystem requires a Hermitian matrix");

  bool mixes = false;
  for (Index k = 0; k < h.outerSize() && !mixes; ++k)
    for (SparseXd::InnerIterator it(h, k); it; ++it)
      if (it.value() != 0.0 && basis.parity(it.row()) != basis.parity(it.col())) mixes = true;

  std::vector<Block> blocks;
  for (auto& [p, idx] : blocks_of(basis, sector, mixes)) {
    Block b;
    b.parity = p;
    b.idx = std::move(idx);
    if (b.idx.empty()) continue;
    const MatrixXd sub = MatrixXd(restrict_to(h, b.idx));
    Eigen::SelfAdjointEigenSolver<MatrixXd> sol(sub);
    if (sol.info() != Eigen::Success) throw ConvergenceError("symmetric eigensolver failed");
    b.values = sol.eigenvalues();
    b.vectors = sol.eigenvectors().cast<cplx>();
    blocks.push_back(std::move(b));
  }
  return merge_blocks(basis.size(), blocks);
}

EigenSystem eigensystem(const SpaceSpec& spec, const Operator& op, Sector sector) {
  const MatrixXc& h = op.matrix();
  require_hermitian(h);
  const BasisTable basis(spec);
  if (h.rows() != basis.size()) throw ShapeError("Hamiltonian does not match the space");
  if (max_abs(h.imag()) == 0.0) return eigensystem(basis, SparseXd(h.real().sparseView()), sector);

  bool mixes = false;
  for (Index c = 0; c < h.cols() && !mixes; ++c)
    for (Index r = 0; r < h.rows(); ++r)
      if (h(r, c) != 0.0 && basis.parity(r) != basis.parity(c)) {
        mixes = true;
        break;
      }

  std::vector<Block> blocks;
  for (auto& [p, idx] : blocks_of(basis, sector, mixes)) {
    Block b;
    b.parity = p;
    b.idx = std::move(idx);
    if (b.idx.empty()) continue;
    const auto n = static_cast<Index>(b.idx.size());
    MatrixXc sub(n, n);
    for (Index r = 0; r < n; ++r)
      for (Index c = 0; c < n; ++c) sub(r, c) = h(b.idx[static_cast<std::size_t>(r)], b.idx[static_cast<std::size_t>(c)]);
    Eigen::SelfAdjointEigenSolver<MatrixXc> sol(sub);
    if (sol.info() != Eigen::Success) throw ConvergenceError("Hermitian eigensolver failed");
    b.values = sol.eigenvalues();
    b.vectors = sol.eigenvectors();
    blocks.push_back(std::move(b));
  }
  return merge_blocks(basis.size(), blocks);
}

double eigen_residual(const MatrixXc& h, const EigenSystem& es) {
  double worst = 0.0;
  for (Index k = 0; k < es.size(); ++k) {
    const double r = (h * es.states.col(k) - es.energies(k) * es.states.col(k)).norm();
    worst = std::max(worst, r / std::max(1.0, std::abs(es.energies(k))));
  }
  return worst;
}

double gram_residual(const EigenSystem& es) {
  const MatrixXc g = es.states.adjoint() * es.states;
  return max_abs(g - MatrixXc::Identity(g.rows(), g.cols()));
}

double SpectrumSweep::energy(int track, Index point) const {
  const auto p = static_cast<std::size_t>(point);
  return levels[p].energies(tracks[p][static_cast<std::size_t>(track)]);
}

VectorXd SpectrumSweep::track_energies(int track) const {
  VectorXd e(n_points());
  for (Index p = 0; p < n_points(); ++p) e(p) = energy(track, p);
  return e;
}

int SpectrumSweep::track_parity(int track) const {
  return levels.front().parity[static_cast<std::size_t>(tracks.front()[static_cast<std::size_t>(track)])];
}

VectorXd SpectrumSweep::free_occupation(int track) const {
  VectorXd s = VectorXd::Zero(n_points());
  for (const MatrixXd& m : nb_labels) s += m.row(track).transpose();
  return s;
}

VectorXc SpectrumSweep::track_state(int track, Index point) const {
  const auto p = static_cast<std::size_t>(point);
  if (levels[p].states.cols() == 0) throw ShapeError("sweep was built without states");
  return levels[p].states.col(tracks[p][static_cast<std::size_t>(track)]);
}

namespace {

// Rotates each degenerate cluster of `es` (per parity) onto the states of `ref`
// that carry most of its weight.
// Rotates every degenerate cluster onto eigenvectors of the free-mode number
// operators, one mode after the other.  Returns a label key per level.
std::vector<long> resolve_free_modes(EigenSystem& es, const std::vector<SparseXd>& nb, double tol, long base) {
  const Index n = es.size();
  std::vector<long> key(static_cast<std::size_t>(n), 0);
  if (nb.empty()) return key;
  std::vector<std::vector<Index>> groups;
  Index k = 0;
  while (k < n) {
    Index end = k + 1;
    while (end < n && es.energies(end) - es.energies(end - 1) < tol) ++end;
    for (int p : {1, -1, 0}) {
      std::vector<Index> cols;
      for (Index c = k; c < end; ++c)
        if (es.parity[static_cast<std::size_t>(c)] == p) cols.push_back(c);
      if (!cols.empty()) groups.push_back(std::move(cols));
    }
    k = end;
  }
  long weight = 1;
  for (const SparseXd& op : nb) {
    const SparseXc opc = op.cast<cplx>();
    std::vector<std::vector<Index>> refined;
    for (const auto& cols : groups) {
      if (key[static_cast<std::size_t>(cols[0])] < 0) continue;
      const auto c = static_cast<Index>(cols.size());
      MatrixXc v(es.states.rows(), c);
      for (Index j = 0; j < c; ++j) v.col(j) = es.states.col(cols[static_cast<std::size_t>(j)]);
      VectorXd labels(c);
      if (c == 1) {
        labels(0) = v.col(0).dot(opc * v.col(0)).real();
      } else {
        MatrixXc m = v.adjoint() * (opc * v);
        m = (0.5 * (m + m.adjoint())).eval();
        Eigen::SelfAdjointEigenSolver<MatrixXc> sol(m);
        labels = sol.eigenvalues();
        // Clusters cut by the photon cutoff have no integer labels; leave them as they are.
        if ((labels.array() - labels.array().round()).abs().maxCoeff() > 1e-6) {
          for (Index col : cols) key[static_cast<std::size_t>(col)] = -1;
          continue;
        }
        const MatrixXc vr = v * sol.eigenvectors();
        for (Index j = 0; j < c; ++j) es.states.col(cols[static_cast<std::size_t>(j)]) = vr.col(j);
      }
      std::vector<Index> cur{cols[0]};
      for (Index j = 0; j < c; ++j) {
        const long r = std::lround(labels(j));
        key[static_cast<std::size_t>(cols[static_cast<std::size_t>(j)])] += r * weight;
        if (j == 0) continue;
        if (std::lround(labels(j - 1)) == r) {
          cur.push_back(cols[static_cast<std::size_t>(j)]);
        } else {
          refined.push_back(std::move(cur));
          cur = {cols[static_cast<std::size_t>(j)]};
        }
      }
      refined.push_back(std::move(cur));
    }
    groups = std::move(refined);
    weight *= base;
  }
  return key;
}

void align_clusters(EigenSystem& es, const MatrixXc& ref, double tol, const std::vector<long>& key) {
  const Index n = es.size();
  Index k = 0;
  while (k < n) {
    Index end = k + 1;
    while (end < n && es.energies(end) - es.energies(end - 1) < tol) ++end;
    if (end - k > 1) {
      std::vector<std::pair<int, long>> classes;
      for (Index c = k; c < end; ++c) {
        const std::pair<int, long> cl{es.parity[static_cast<std::size_t>(c)], key[static_cast<std::size_t>(c)]};
        if (std::find(classes.begin(), classes.end(), cl) == classes.end()) classes.push_back(cl);
      }
      for (const auto& cl : classes) {
        std::vector<Index> cols;
        for (Index c = k; c < end; ++c)
          if (es.parity[static_cast<std::size_t>(c)] == cl.first && key[static_cast<std::size_t>(c)] == cl.second)
            cols.push_back(c);
        const auto c = static_cast<Index>(cols.size());
        if (c < 2) continue;
        MatrixXc v(es.states.rows(), c);
        for (Index j = 0; j < c; ++j) v.col(j) = es.states.col(cols[static_cast<std::size_t>(j)]);
        const MatrixXc m = ref.adjoint() * v;
        const VectorXd w = m.rowwise().squaredNorm();
        std::vector<Index> rows(static_cast<std::size_t>(m.rows()));
        std::iota(rows.begin(), rows.end(), Index{0});
        std::stable_sort(rows.begin(), rows.end(), [&](Index a, Index b) { return w(a) > w(b); });
        rows.resize(static_cast<std::size_t>(std::min(c, m.rows())));
        if (static_cast<Index>(rows.size()) < c) continue;
        std::sort(rows.begin(), rows.end());
        MatrixXc mk(c, c);
        for (Index r = 0; r < c; ++r) mk.row(r) = m.row(rows[static_cast<std::size_t>(r)]);
        Eigen::JacobiSVD<MatrixXc> svd(mk, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const MatrixXc rot = svd.matrixV() * svd.matrixU().adjoint();
        const MatrixXc vr = v * rot;
        for (Index j = 0; j < c; ++j) es.states.col(cols[static_cast<std::size_t>(j)]) = vr.col(j);
      }
    }
    k = end;
  }
}

struct Assignment {
  std::vector<Index> next;  // prev level -> new level
  std::vector<double> overlap;
  std::vector<bool> ambiguous;
};

Assignment assign_levels(const EigenSystem& prev, const EigenSystem& cur, double amb_tol) {
  const Index n = prev.size();
  const MatrixXd o = (prev.states.adjoint() * cur.states).cwiseAbs();
  std::vector<std::tuple<double, Index, Index>> pairs;
  pairs.reserve(static_cast<std::size_t>(n * n));
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (prev.parity[static_cast<std::size_t>(i)] == cur.parity[static_cast<std::size_t>(j)])
        pairs.emplace_back(-o(i, j), i, j);
  std::sort(pairs.begin(), pairs.end());

  Assignment a;
  a.next.assign(static_cast<std::size_t>(n), -1);
  a.overlap.assign(static_cast<std::size_t>(n), 0.0);
  a.ambiguous.assign(static_cast<std::size_t>(n), false);
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (const auto& [neg, i, j] : pairs) {
    if (a.next[static_cast<std::size_t>(i)] >= 0 || used[static_cast<std::size_t>(j)]) continue;
    const double v = -neg;
    bool amb = false;
    if (v > 1e-3) {
      for (Index jj = 0; jj < n && !amb; ++jj)
        amb = jj != j && !used[static_cast<std::size_t>(jj)] &&
              prev.parity[static_cast<std::size_t>(i)] == cur.parity[static_cast<std::size_t>(jj)] &&
              o(i, jj) >= v - amb_tol;
      for (Index ii = 0; ii < n && !amb; ++ii)
        amb = ii != i && a.next[static_cast<std::size_t>(ii)] < 0 &&
              prev.parity[static_cast<std::size_t>(ii)] == cur.parity[static_cast<std::size_t>(j)] &&
              o(ii, j) >= v - amb_tol;
    }
    a.next[static_cast<std::size_t>(i)] = j;
    a.overlap[static_cast<std::size_t>(i)] = v;
    a.ambiguous[static_cast<std::size_t>(i)] = amb;
    used[static_cast<std::size_t>(j)] = true;
  }
  return a;
}

std::optional<BogoliubovFrame> sweep_frame(const SpaceSpec& spec, const ParamsAt& params_at,
                                           const std::vector<double>& grid) {
  if (spec.n_modes < 2) return std::nullopt;
  for (double x : grid) {
    const ModelParams p = params_at(x);
    if ((p.omega.array() - p.omega(0)).abs().maxCoeff() > 1e-12) return std::nullopt;
    if (auto dir = common_coupling_pattern(p.g)) return bogoliubov_frame(*dir);
  }
  return std::nullopt;
}

}  // namespace

SpectrumSweep sweep_spectrum(const SpaceSpec& spec, const ParamsAt& params_at, const std::vector<double>& grid,
                             const SweepOptions& options) {
  if (grid.size() < 2) throw ShapeError("a sweep needs at least two grid points");
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (!(grid[k] > grid[k - 1])) throw ShapeError("sweep grid must be strictly increasing");

  const BasisTable basis(spec);
  SpectrumSweep sw;
  sw.grid = grid;
  sw.levels.resize(grid.size());
  parallel_for(grid.size(), options.threads, [&](std::size_t k) {
    const ModelParams p = params_at(grid[k]);
    p.validate(spec);
    sw.levels[k] = eigensystem(basis, assemble_hamiltonian(basis, p), options.sector);
  });

  const auto frame = options.frame ? options.frame : sweep_frame(spec, params_at, grid);
  std::vector<SparseXd> nb;
  if (frame) {
    for (int j = 1; j < spec.n_modes; ++j) {
      const SparseXd b = sparse_b_operator(basis, *frame, j);
      nb.emplace_back(SparseXd(b.transpose() * b));
    }
  }
  const long base = static_cast<long>(spec.n_modes) * spec.cutoff + 1;
  std::vector<std::vector<long>> keys(grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p)
    keys[p] = resolve_free_modes(sw.levels[p], nb, options.degeneracy_tol, base);

  align_clusters(sw.levels[0], sw.levels[1].states, options.degeneracy_tol, keys[0]);
  const Index n = sw.levels[0].size();
  sw.tracks.assign(grid.size(), std::vector<Index>(static_cast<std::size_t>(n)));
  std::iota(sw.tracks[0].begin(), sw.tracks[0].end(), Index{0});
  for (std::size_t p = 1; p < grid.size(); ++p) {
    align_clusters(sw.levels[p], sw.levels[p - 1].states, options.degeneracy_tol, keys[p]);
    const Assignment a = assign_levels(sw.levels[p - 1], sw.levels[p], options.ambiguity_tol);
    for (Index t = 0; t < n; ++t) {
      const Index prev = sw.tracks[p - 1][static_cast<std::size_t>(t)];
      sw.tracks[p][static_cast<std::size_t>(t)] = a.next[static_cast<std::size_t>(prev)];
      const double ov = a.overlap[static_cast<std::size_t>(prev)];
      const bool amb = a.ambiguous[static_cast<std::size_t>(prev)];
      if (ov < options.overlap_floor || amb)
        sw.flags.push_back({static_cast<Index>(p), static_cast<int>(t), ov, amb});
    }
  }

  VectorXd ntot(basis.size());
  for (Index i = 0; i < basis.size(); ++i) ntot(i) = basis.total_photons(i);

  sw.nb_labels.assign(nb.size(), MatrixXd::Zero(n, static_cast<Index>(grid.size())));
  sw.photon_number = MatrixXd::Zero(n, static_cast<Index>(grid.size()));
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const EigenSystem& es = sw.levels[p];
    for (Index t = 0; t < n; ++t) {
      const Index l = sw.tracks[p][static_cast<std::size_t>(t)];
      const VectorXc v = es.states.col(l);
      sw.photon_number(t, static_cast<Index>(p)) = v.cwiseAbs2().dot(ntot);
      for (std::size_t j = 0; j < nb.size(); ++j)
        sw.nb_labels[j](t, static_cast<Index>(p)) = v.dot(nb[j].cast<cplx>() * v).real();
    }
  }
  if (!options.keep_states)
    for (auto& es : sw.levels) es.states.resize(0, 0);
  return sw;
}

std::optional<int> find_flat_track(const SpectrumSweep& sweep, double energy, double tol) {
  for (int t = 0; t < sweep.n_tracks(); ++t) {
    const VectorXd e = sweep.track_energies(t);
    if ((e.array() - energy).abs().maxCoeff() < tol) return t;
  }
  return std::nullopt;
}

double track_flatness(const SpectrumSweep& sweep, int track) {
  const VectorXd e = sweep.track_energies(track);
  return e.maxCoeff() - e.minCoeff();
}

namespace {

AdiabaticRatios ratios_from(const VectorXc& hv, const EigenSystem& es, double e_ref, double tol) {
  AdiabaticRatios out;
  for (Index m = 0; m < es.size(); ++m) {
    RatioEntry r;
    r.level = m;
    r.energy = es.energies(m);
    r.gap = r.energy - e_ref;
    r.matrix_element = std::abs(es.states.col(m).dot(hv));
    if (std::abs(r.gap) < tol) {
      out.degenerate.push_back(r);
    } else {
      r.ratio = r.matrix_element / (r.gap * r.gap);
      out.entries.push_back(r);
    }
  }
  return out;
}

}  // namespace

AdiabaticRatios adiabatic_ratio(const MatrixXc& h_dot, const EigenSystem& es, const VectorXc& ref, double e_ref,
                                double degeneracy_tol) {
  if (h_dot.rows() != ref.size() || es.states.rows() != ref.size()) throw ShapeError("dimension mismatch");
  return ratios_from(h_dot * ref, es, e_ref, degeneracy_tol);
}

AdiabaticRatios adiabatic_ratio(const SparseXd& h_dot, const EigenSystem& es, const VectorXc& ref, double e_ref,
                                double degeneracy_tol) {
  if (h_dot.rows() != ref.size() || es.states.rows() != ref.size()) throw ShapeError("dimension mismatch");
  const VectorXc hv = h_dot.cast<cplx>() * ref;
  return ratios_from(hv, es, e_ref, degeneracy_tol);
}

MatrixXd track_couplings(const SpaceSpec& spec, const SpectrumSweep& sweep, int reference_track,
                         const ParamsAt& rates_at) {
  const BasisTable basis(spec);
  MatrixXd c = MatrixXd::Zero(sweep.n_tracks(), sweep.n_points());
  for (Index p = 0; p < sweep.n_points(); ++p) {
    const SparseXd hd = assemble_hamiltonian(basis, rates_at(sweep.grid[static_cast<std::size_t>(p)]));
    const VectorXc v = hd.cast<cplx>() * sweep.track_state(reference_track, p);
    for (int t = 0; t < sweep.n_tracks(); ++t) c(t, p) = std::abs(sweep.track_state(t, p).dot(v));
  }
  return c;
}

GapResult effective_min_gap(const SpectrumSweep& sweep, int reference_track, const MatrixXd& couplings,
                            const ExclusionRule& rule) {
  if (reference_track < 0 || reference_track >= sweep.n_tracks()) throw ShapeError("reference track out of range");
  if (couplings.rows() != sweep.n_tracks() || couplings.cols() != sweep.n_points())
    throw ShapeError("coupling table does not match the sweep");
  const VectorXd eref = sweep.track_energies(reference_track);
  GapResult g;
  g.gap = std::numeric_limits<double>::infinity();
  for (int t = 0; t < sweep.n_tracks(); ++t) {
    if (t == reference_track) continue;
    const VectorXd e = sweep.track_energies(t);
    const bool free_mode = !sweep.nb_labels.empty() && sweep.free_occupation(t).maxCoeff() > rule.max_free_occupation;
    const bool dark = couplings.row(t).maxCoeff() < rule.min_coupling;
    double peak_ratio = 0.0;
    for (Index p = 0; p < sweep.n_points(); ++p) {
      const double gap = std::abs(e(p) - eref(p));
      if (gap > rule.degeneracy_tol) peak_ratio = std::max(peak_ratio, couplings(t, p) / (gap * gap));
    }
    const bool weak = rule.min_ratio > 0.0 && peak_ratio < rule.min_ratio;
    if (free_mode || dark || weak) {
      g.excluded.push_back(t);
      continue;
    }
    g.candidates.push_back(t);
    for (Index p = 0; p < sweep.n_points(); ++p) {
      const double gap = std::abs(e(p) - eref(p));
      if (gap < g.gap) {
        g.gap = gap;
        g.track = t;
        g.point = p;
      }
    }
  }
  if (g.candidates.empty()) throw ConditionError("non-empty candidate set", "every track was excluded");
  return g;
}

MatrixXd ratio_table(const SpectrumSweep& sweep, int reference_track, const MatrixXd& couplings,
                     double degeneracy_tol) {
  if (couplings.rows() != sweep.n_tracks() || couplings.cols() != sweep.n_points())
    throw ShapeError("coupling table does not match the sweep");
  const VectorXd eref = sweep.track_energies(reference_track);
  MatrixXd r = MatrixXd::Zero(couplings.rows(), couplings.cols());
  for (int t = 0; t < sweep.n_tracks(); ++t) {
    if (t == reference_track) continue;
    for (Index p = 0; p < sweep.n_points(); ++p) {
      const double gap = sweep.energy(t, p) - eref(p);
      if (std::abs(gap) > degeneracy_tol) r(t, p) = couplings(t, p) / (gap * gap);
    }
  }
  return r;
}

NearestLevels nearest_levels(const SpectrumSweep& sweep, int reference_track, const MatrixXd& couplings, int count,
                             double max_free_occupation, double degeneracy_tol) {
  const VectorXd eref = sweep.track_energies(reference_track);
  std::vector<std::pair<double, int>> order;
  for (int t = 0; t < sweep.n_tracks(); ++t) {
    if (t == reference_track) continue;
    if (!sweep.nb_labels.empty() && sweep.free_occupation(t).maxCoeff() > max_free_occupation) continue;
    order.emplace_back((sweep.track_energies(t) - eref).cwiseAbs().mean(), t);
  }
  if (static_cast<int>(order.size()) < count) throw ConditionError("enough coupled tracks", "sweep has too few levels");
  std::sort(order.begin(), order.end());
  NearestLevels out;
  for (int k = 0; k < count; ++k) out.tracks.push_back(order[static_cast<std::size_t>(k)].second);
  std::sort(out.tracks.begin(), out.tracks.end(),
            [&](int a, int b) { return sweep.energy(a, 0) < sweep.energy(b, 0); });

  const MatrixXd r = ratio_table(sweep, reference_track, couplings, degeneracy_tol);
  out.peak_ratio.resize(count);
  out.start_ratio.resize(count);
  out.start_point = sweep.n_points() - 1;
  for (Index p = 0; p < sweep.n_points(); ++p) {
    bool clear = true;
    for (int t : out.tracks) clear = clear && std::abs(sweep.energy(t, p) - eref(p)) > degeneracy_tol;
    if (clear) {
      out.start_point = p;
      break;
    }
  }
  for (int k = 0; k < count; ++k) {
    const int t = out.tracks[static_cast<std::size_t>(k)];
    out.peak_ratio(k) = r.row(t).maxCoeff();
    out.start_ratio(k) = r(t, out.start_point);
  }
  return out;
}

bool LawCheckReport::passed() const {
  return std::all_of(approaches.begin(), approaches.end(), [](const TrackApproach& a) { return a.passed; });
}

LawCheckReport matrix_element_law_check(const SpaceSpec& spec, const SpectrumSweep& sweep,
                                        const LawCheckConfig& config) {
  if (spec.n_qubits != 2) throw ConditionError("N = 2", "the amplitude relation is a two-qubit statement");
  const BasisTable basis(spec);
  const int m = spec.n_modes;
  LawCheckReport rep;

  auto frame = sweep_frame(spec, config.params_at, sweep.grid);
  if (!frame) frame = bogoliubov_frame(VectorXd::Ones(m));

  std::vector<Index> idx_a(static_cast<std::size_t>(m)), idx_b(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    BasisLabel l;
    l.photons.assign(static_cast<std::size_t>(m), 0);
    l.photons[static_cast<std::size_t>(i)] = 1;
    l.spins = {Spin::down, Spin::up};
    idx_a[static_cast<std::size_t>(i)] = basis.index(l);
    l.spins = {Spin::up, Spin::down};
    idx_b[static_cast<std::size_t>(i)] = basis.index(l);
  }

  const int nt = sweep.n_tracks();
  MatrixXd coupling = MatrixXd::Zero(nt, sweep.n_points());
  MatrixXd delta = MatrixXd::Zero(nt, sweep.n_points());
  for (Index p = 0; p < sweep.n_points(); ++p) {
    const double x = sweep.grid[static_cast<std::size_t>(p)];
    const ModelParams prm = config.params_at(x);
    const Certificate ref = config.family == DarkFamily::psi_2plus ? psi_2plus(spec, prm) : psi_2splus(spec, prm);
    const double w = prm.omega(0);
    const double d = prm.delta(0) - prm.delta(1) + prm.u(0, 0) - prm.u(0, 1);
    const VectorXc hv = assemble_hamiltonian(basis, config.rates_at(x)).cast<cplx>() * ref.state.amplitudes();
    for (int t = 0; t < nt; ++t) {
      const VectorXc v = sweep.track_state(t, p);
      const double dl = sweep.energy(t, p) - w;
      delta(t, p) = dl;
      coupling(t, p) = std::abs(v.dot(hv));
      cplx ca = 0.0, cb = 0.0;
      for (int i = 0; i < m; ++i) {
        ca += frame->coeffs(0, i) * v(idx_a[static_cast<std::size_t>(i)]);
        cb += frame->coeffs(0, i) * v(idx_b[static_cast<std::size_t>(i)]);
      }
      const cplx lhs = (dl + d) * ca;
      const cplx rhs = (dl - d) * cb;
      const double scale = std::max(std::abs(lhs) + std::abs(rhs), config.relation_floor);
      rep.max_relation_residual = std::max(rep.max_relation_residual, std::abs(lhs - rhs) / scale);
      ++rep.relations_checked;
    }
  }

  for (int t = 0; t < nt; ++t)
    if ((delta.row(t).array().abs() < 1e-8).all()) rep.reference_track = t;
  for (int t = 0; t < nt; ++t) {
    if (t == rep.reference_track) continue;
    Index at = 0;
    const double md = delta.row(t).cwiseAbs().minCoeff(&at);
    if (md >= config.approach_window) continue;
    TrackApproach a;
    a.track = t;
    a.min_delta = md;
    a.coupling_at_min = coupling(t, at);
    a.coupling_max = coupling.row(t).maxCoeff();
    a.passed = a.coupling_max < 1e-12 || a.coupling_at_min <= 0.1 * a.coupling_max;
    rep.approaches.push_back(a);
  }
  return rep;
}

}  // namespace rabi
