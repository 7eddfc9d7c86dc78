#include "ddrbench/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ddrbench {

namespace detail {

void validate_signature(std::size_t point_count, std::span<double const> weights) {
  if (point_count == 0) fail(ErrorCode::kEmptyInput, "signature has no points");
  if (weights.size() != point_count) {
    fail(ErrorCode::kLengthMismatch, "signature has " + std::to_string(point_count) +
                                         " points but " + std::to_string(weights.size()) +
                                         " weights");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) {
      fail(ErrorCode::kInvalidArgument, "signature weights must be finite and nonnegative");
    }
    total += w;
  }
  if (total <= 0.0) fail(ErrorCode::kInvalidArgument, "signature has zero total weight");
}

}  // namespace detail

GroundDistanceMatrix::GroundDistanceMatrix(std::size_t rows, std::size_t cols,
                                           std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (entries_.size() != rows_ * cols_) {
    fail(ErrorCode::kDimensionMismatch, "ground distance matrix has " +
                                            std::to_string(entries_.size()) + " entries, expected " +
                                            std::to_string(rows_ * cols_));
  }
  for (double e : entries_) {
    if (!std::isfinite(e) || e < 0.0) {
      fail(ErrorCode::kInvalidArgument, "ground distances must be finite and nonnegative");
    }
  }
}

GroundDistanceMatrix GroundDistanceMatrix::transposed() const {
  std::vector<double> t(entries_.size());
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) t[j * rows_ + i] = (*this)(i, j);
  }
  return GroundDistanceMatrix(cols_, rows_, std::move(t));
}

GroundDistanceMatrix GroundDistanceMatrix::scaled(double factor) const {
  std::vector<double> s(entries_);
  for (double& e : s) e *= factor;
  return GroundDistanceMatrix(rows_, cols_, std::move(s));
}

double FlowMatrix::total() const noexcept {
  return std::accumulate(entries_.begin(), entries_.end(), 0.0);
}

double FlowMatrix::row_sum(std::size_t i) const noexcept {
  double s = 0.0;
  for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j);
  return s;
}

double FlowMatrix::col_sum(std::size_t j) const noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) s += (*this)(i, j);
  return s;
}

namespace {

// Balanced transportation problem solved with the primal transportation
// simplex (u-v potentials). The basis is always a spanning tree over the
// m + n supply/demand nodes, degenerate zero-flow cells included.
class TransportationSimplex {
 public:
  TransportationSimplex(std::vector<double> supply, std::vector<double> demand,
                        std::vector<double> cost)
      : m_(supply.size()),
        n_(demand.size()),
        supply_(std::move(supply)),
        demand_(std::move(demand)),
        cost_(std::move(cost)),
        flow_(m_ * n_, 0.0),
        basic_(m_ * n_, false) {}

  void solve() {
    northwest_corner();
    double max_cost = 0.0;
    for (double c : cost_) max_cost = std::max(max_cost, std::abs(c));
    double const tolerance = 1e-12 * std::max(1.0, max_cost);

    std::size_t const max_iterations = 50 * (m_ + n_) * (m_ + n_) + 1000;
    std::size_t degenerate_run = 0;
    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
      rebuild_tree();
      // Long runs of degenerate pivots switch pricing to Bland's rule, which
      // cannot cycle.
      bool const bland = degenerate_run > m_ + n_;
      std::size_t entering = kNone;
      double best = -tolerance;
      for (std::size_t i = 0; i < m_ && (entering == kNone || !bland); ++i) {
        for (std::size_t j = 0; j < n_; ++j) {
          std::size_t const cell = i * n_ + j;
          if (basic_[cell]) continue;
          double const reduced = cost_[cell] - potential_[i] - potential_[m_ + j];
          if (reduced < best) {
            best = reduced;
            entering = cell;
            if (bland) break;
          }
        }
      }
      if (entering == kNone) return;
      degenerate_run = pivot(entering) ? 0 : degenerate_run + 1;
    }
    fail(ErrorCode::kInternal, "transportation simplex did not converge");
  }

  double flow(std::size_t i, std::size_t j) const { return flow_[i * n_ + j]; }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  void northwest_corner() {
    std::vector<double> supply = supply_;
    std::vector<double> demand = demand_;
    std::size_t i = 0, j = 0;
    while (true) {
      std::size_t const cell = i * n_ + j;
      basic_[cell] = true;
      if (i + 1 == m_ && j + 1 == n_) {
        flow_[cell] = std::max(0.0, std::min(supply[i], demand[j]));
        break;
      }
      if ((supply[i] <= demand[j] && i + 1 < m_) || j + 1 == n_) {
        flow_[cell] = supply[i];
        demand[j] -= supply[i];
        supply[i] = 0.0;
        ++i;
      } else {
        flow_[cell] = demand[j];
        supply[i] -= demand[j];
        demand[j] = 0.0;
        ++j;
      }
    }
  }

  // Nodes 0..m-1 are rows, m..m+n-1 are columns. Recomputes parent links,
  // depths and dual potentials by a traversal from row 0.
  void rebuild_tree() {
    std::size_t const nodes = m_ + n_;
    adjacency_.assign(nodes, {});
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        if (basic_[i * n_ + j]) {
          adjacency_[i].push_back(m_ + j);
          adjacency_[m_ + j].push_back(i);
        }
      }
    }
    parent_.assign(nodes, kNone);
    depth_.assign(nodes, 0);
    potential_.assign(nodes, 0.0);
    std::vector<bool> seen(nodes, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    std::size_t visited = 0;
    while (!stack.empty()) {
      std::size_t const node = stack.back();
      stack.pop_back();
      ++visited;
      for (std::size_t next : adjacency_[node]) {
        if (seen[next]) continue;
        seen[next] = true;
        parent_[next] = node;
        depth_[next] = depth_[node] + 1;
        // c_ij = u_i + v_j on basic cells.
        double const c = node < m_ ? cost_[node * n_ + (next - m_)] : cost_[next * n_ + (node - m_)];
        potential_[next] = c - potential_[node];
        stack.push_back(next);
      }
    }
    if (visited != nodes) fail(ErrorCode::kInternal, "transportation basis is not a spanning tree");
  }

  std::size_t cell_between(std::size_t a, std::size_t b) const {
    return a < m_ ? a * n_ + (b - m_) : b * n_ + (a - m_);
  }

  // Returns true when the pivot moved a nonzero amount of flow.
  bool pivot(std::size_t entering) {
    std::size_t const row = entering / n_;
    std::size_t const col = m_ + entering % n_;

    // Tree path from the column node to the row node; together with the
    // entering cell it closes the cycle.
    std::vector<std::size_t> from_col{col};
    std::vector<std::size_t> from_row{row};
    std::size_t a = col, b = row;
    while (depth_[a] > depth_[b]) from_col.push_back(a = parent_[a]);
    while (depth_[b] > depth_[a]) from_row.push_back(b = parent_[b]);
    while (a != b) {
      from_col.push_back(a = parent_[a]);
      from_row.push_back(b = parent_[b]);
    }
    std::vector<std::size_t> path = from_col;
    for (std::size_t k = from_row.size() - 1; k-- > 0;) path.push_back(from_row[k]);
    // path runs col -> ... -> row; cells along it alternate -, +, -, ...
    // starting with the cell adjacent to the entering column.
    std::vector<std::size_t> cycle_cells;
    cycle_cells.reserve(path.size() - 1);
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      cycle_cells.push_back(cell_between(path[k], path[k + 1]));
    }

    double theta = std::numeric_limits<double>::infinity();
    std::size_t leaving = kNone;
    for (std::size_t k = 0; k < cycle_cells.size(); k += 2) {
      std::size_t const cell = cycle_cells[k];
      if (flow_[cell] < theta || (flow_[cell] == theta && cell < leaving)) {
        theta = flow_[cell];
        leaving = cell;
      }
    }
    if (leaving == kNone) fail(ErrorCode::kInternal, "transportation pivot found no leaving cell");

    for (std::size_t k = 0; k < cycle_cells.size(); ++k) {
      double& f = flow_[cycle_cells[k]];
      f = k % 2 == 0 ? f - theta : f + theta;
      if (f < 0.0) f = 0.0;
    }
    flow_[entering] = theta;
    flow_[leaving] = 0.0;
    basic_[leaving] = false;
    basic_[entering] = true;
    return theta > 0.0;
  }

  std::size_t m_;
  std::size_t n_;
  std::vector<double> supply_;
  std::vector<double> demand_;
  std::vector<double> cost_;
  std::vector<double> flow_;
  std::vector<bool> basic_;
  std::vector<std::vector<std::size_t>> adjacency_;
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> depth_;
  std::vector<double> potential_;
};

}  // namespace

EmdResult solve_emd(std::span<double const> p_weights, std::span<double const> q_weights,
                    GroundDistanceMatrix const& d) {
  detail::validate_signature(p_weights.size(), p_weights);
  detail::validate_signature(q_weights.size(), q_weights);
  std::size_t const m = p_weights.size();
  std::size_t const n = q_weights.size();
  if (d.rows() != m || d.cols() != n) {
    fail(ErrorCode::kDimensionMismatch,
         "ground distance matrix is " + std::to_string(d.rows()) + "x" + std::to_string(d.cols()) +
             " but signatures have sizes " + std::to_string(m) + " and " + std::to_string(n));
  }

  double const p_total = std::accumulate(p_weights.begin(), p_weights.end(), 0.0);
  double const q_total = std::accumulate(q_weights.begin(), q_weights.end(), 0.0);

  // The surplus side ships its excess to a zero-cost dummy node.
  bool const dummy_col = p_total > q_total;
  bool const dummy_row = q_total > p_total;
  std::size_t const rows = m + (dummy_row ? 1 : 0);
  std::size_t const cols = n + (dummy_col ? 1 : 0);

  std::vector<double> supply(p_weights.begin(), p_weights.end());
  std::vector<double> demand(q_weights.begin(), q_weights.end());
  if (dummy_row) supply.push_back(q_total - p_total);
  if (dummy_col) demand.push_back(p_total - q_total);
  std::vector<double> cost(rows * cols, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) cost[i * cols + j] = d(i, j);
  }

  TransportationSimplex simplex(std::move(supply), std::move(demand), std::move(cost));
  simplex.solve();

  FlowMatrix flow(m, n);
  long double work = 0.0, moved = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double const f = simplex.flow(i, j);
      flow(i, j) = f;
      work += static_cast<long double>(f) * d(i, j);
      moved += f;
    }
  }
  if (moved <= 0.0L) fail(ErrorCode::kInternal, "optimal transport moved no mass");
  return EmdResult{static_cast<double>(work / moved), std::move(flow)};
}

double emd_1d_unit_mass(std::span<double const> a, std::span<double const> b) {
  if (a.empty() || b.empty()) fail(ErrorCode::kEmptyInput, "emd_1d_unit_mass needs nonempty inputs");
  std::vector<double> xs(a.begin(), a.end());
  std::vector<double> ys(b.begin(), b.end());
  for (double v : xs) {
    if (!std::isfinite(v)) fail(ErrorCode::kNonFinite, "non-finite sample");
  }
  for (double v : ys) {
    if (!std::isfinite(v)) fail(ErrorCode::kNonFinite, "non-finite sample");
  }
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());

  double const na = static_cast<double>(xs.size());
  double const nb = static_cast<double>(ys.size());
  std::size_t i = 0, j = 0;
  long double area = 0.0;
  double position = std::min(xs.front(), ys.front());
  while (i < xs.size() || j < ys.size()) {
    double const next = j == ys.size() || (i < xs.size() && xs[i] <= ys[j]) ? xs[i] : ys[j];
    double const gap = std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb);
    area += static_cast<long double>(gap) * (next - position);
    position = next;
    while (i < xs.size() && xs[i] == next) ++i;
    while (j < ys.size() && ys[j] == next) ++j;
  }
  return static_cast<double>(area);
}

}  // namespace ddrbench
