#include "greensplit/distributed.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <thread>

#include <unsupported/Eigen/KroneckerProduct>

#include "greensplit/errors.hpp"
#include "greensplit/lyapunov.hpp"

namespace greensplit {

CommGraph::CommGraph(int size) : adjacency_(static_cast<std::size_t>(std::max(0, size))) {}

CommGraph::CommGraph(int size, const std::vector<std::pair<int, int>>& edges) : CommGraph(size) {
  for (const auto& [a, b] : edges) add_edge(a, b);
}

void CommGraph::add_edge(int a, int b) {
  if (a < 0 || b < 0 || a >= size() || b >= size()) throw ValidationError("edge references an unknown agent");
  if (a == b) throw ValidationError("self loops are not allowed in the communication graph");
  auto insert = [](std::vector<int>& list, int v) {
    auto it = std::lower_bound(list.begin(), list.end(), v);
    if (it == list.end() || *it != v) list.insert(it, v);
  };
  insert(adjacency_[static_cast<std::size_t>(a)], b);
  insert(adjacency_[static_cast<std::size_t>(b)], a);
}

CommGraph CommGraph::path(int n) {
  CommGraph g(n);
  for (int i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1);
  return g;
}

CommGraph CommGraph::complete(int n) {
  CommGraph g(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) g.add_edge(i, j);
  return g;
}

CommGraph CommGraph::grid(int rows, int cols) {
  if (rows < 1 || cols < 1) throw ValidationError("agent grid needs at least one row and column");
  CommGraph g(rows * cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) g.add_edge(r * cols + c, r * cols + c + 1);
      if (r + 1 < rows) g.add_edge(r * cols + c, (r + 1) * cols + c);
    }
  }
  return g;
}

std::vector<std::pair<int, int>> CommGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int a = 0; a < size(); ++a)
    for (int b : neighbors(a))
      if (a < b) out.emplace_back(a, b);
  return out;
}

std::vector<int> CommGraph::distances(int v) const {
  std::vector<int> dist(static_cast<std::size_t>(size()), -1);
  std::deque<int> queue{v};
  dist[static_cast<std::size_t>(v)] = 0;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int w : neighbors(u)) {
      if (dist[static_cast<std::size_t>(w)] < 0) {
        dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(u)] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

std::vector<std::vector<int>> CommGraph::components() const {
  std::vector<std::vector<int>> out;
  std::vector<char> seen(static_cast<std::size_t>(size()), 0);
  for (int v = 0; v < size(); ++v) {
    if (seen[static_cast<std::size_t>(v)]) continue;
    std::vector<int> comp;
    const auto dist = distances(v);
    for (int u = 0; u < size(); ++u) {
      if (dist[static_cast<std::size_t>(u)] >= 0) {
        comp.push_back(u);
        seen[static_cast<std::size_t>(u)] = 1;
      }
    }
    out.push_back(std::move(comp));
  }
  return out;
}

int CommGraph::eccentricity(int v) const {
  const auto dist = distances(v);
  if (std::find(dist.begin(), dist.end(), -1) != dist.end()) return -1;
  return *std::max_element(dist.begin(), dist.end());
}

int CommGraph::diameter() const {
  int best = 0;
  for (int v = 0; v < size(); ++v) {
    const int e = eccentricity(v);
    if (e < 0) return -1;
    best = std::max(best, e);
  }
  return best;
}

std::vector<Eigen::MatrixXd> partition_lambda(const Eigen::MatrixXd& lambda, const std::vector<int>& assignment,
                                              int agents) {
  if (lambda.rows() != lambda.cols()) throw DimensionError("Lambda must be square");
  if (static_cast<Eigen::Index>(assignment.size()) != lambda.rows()) {
    throw DimensionError("assignment must cover every state index");
  }
  std::vector<Eigen::MatrixXd> out(static_cast<std::size_t>(agents), Eigen::MatrixXd::Zero(lambda.rows(), lambda.cols()));
  for (Eigen::Index k = 0; k < lambda.rows(); ++k) {
    const int owner = assignment[static_cast<std::size_t>(k)];
    if (owner < 0 || owner >= agents) throw ValidationError("state assigned to an unknown agent");
    out[static_cast<std::size_t>(owner)].row(k) = lambda.row(k);
  }
  return out;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> local_system(const Eigen::MatrixXd& lambda_i, const Eigen::MatrixXd& d,
                                                         int id, int agents) {
  const Eigen::Index n = lambda_i.rows();
  const Eigen::Index n2 = n * n;
  if (d.rows() != n || d.cols() != n) throw DimensionError("D must match Lambda");
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd eye2 = Eigen::MatrixXd::Identity(n2, n2);

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2 * n2, (agents + 1) * n2);
  h.topLeftCorner(n2, n2) = Eigen::kroneckerProduct(eye, lambda_i) + Eigen::kroneckerProduct(lambda_i, eye);
  h.block(0, (id + 1) * n2, n2, n2) = eye2;
  for (int j = 0; j < agents; ++j) h.block(n2, (j + 1) * n2, n2, n2) = eye2;

  Eigen::VectorXd z = Eigen::VectorXd::Zero(2 * n2);
  z.tail(n2) = d.reshaped();
  return {h, z};
}

namespace {

// Rank-revealing QR of M^T: M^T P = Q T. Gives a basis of ker(M) and the
// minimum-norm solution of M x = b without an SVD (the stacked blocks have
// heavily repeated singular values). With `absolute` the rank cut is
// kRankTolerance itself rather than a fraction of the largest pivot.
class RowSpace {
 public:
  explicit RowSpace(const Eigen::MatrixXd& m, bool absolute = false) : qr_(m.transpose()) {
    const double pivot = qr_.maxPivot();
    qr_.setThreshold(absolute ? (pivot > kRankTolerance ? kRankTolerance / pivot : 1.0) : kRankTolerance);
    q_ = qr_.householderQ() * Eigen::MatrixXd::Identity(m.cols(), m.cols());
  }

  Eigen::Index rank() const { return qr_.rank(); }
  Eigen::MatrixXd kernel() const { return q_.rightCols(q_.cols() - rank()); }

  Eigen::VectorXd min_norm_solve(const Eigen::VectorXd& b) const {
    const Eigen::Index r = rank();
    const Eigen::VectorXd pb = qr_.colsPermutation().transpose() * b;
    const Eigen::VectorXd y = qr_.matrixR()
                                  .topLeftCorner(r, r)
                                  .template triangularView<Eigen::Upper>()
                                  .transpose()
                                  .solve(pb.head(r));
    return q_.leftCols(r) * y;
  }

 private:
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
  Eigen::MatrixXd q_;
};

}  // namespace

AgentState local_init(int id, int agents, const Eigen::MatrixXd& lambda_i, const Eigen::MatrixXd& d) {
  if (id < 0 || id >= agents) throw ValidationError("agent id out of range");
  AgentState a;
  a.id = id;
  a.lambda = lambda_i;
  std::tie(a.h, a.z) = local_system(lambda_i, d, id, agents);
  const RowSpace rows(a.h);
  a.estimate = rows.min_norm_solve(a.z);
  if (a.consistency_residual() > 1e-8 * (1.0 + a.z.norm())) {
    throw InconsistentLocal("local right-hand side is not in the range of H_" + std::to_string(id));
  }
  a.kernel = rows.kernel();
  return a;
}

void merge_message(AgentState& agent, const AgentMessage& message) {
  if (agent.kernel.cols() == 0) return;  // already pinned down
  // Component of Im(K_i) orthogonal to Im(K_j); its kernel parameterizes the
  // intersection of the two subspaces.
  const Eigen::MatrixXd off = agent.kernel - message.kernel * (message.kernel.transpose() * agent.kernel);
  const Eigen::VectorXd diff = agent.estimate - message.estimate;
  const Eigen::VectorXd gap = diff - message.kernel * (message.kernel.transpose() * diff);

  // Every w_i + K_i (a0 + N b) lies in w_j + Im(K_j).
  const RowSpace rows(off, true);
  const Eigen::VectorXd a0 = rows.min_norm_solve(-gap);
  const Eigen::MatrixXd n_basis = rows.kernel();
  const Eigen::MatrixXd kn = agent.kernel * n_basis;

  // Pick b so the X block moves least; a0 is orthogonal to Im(N), so the
  // minimum-norm b also gives the smallest full step among those.
  const Eigen::Index x_len = static_cast<Eigen::Index>(agent.n()) * agent.n();
  const Eigen::MatrixXd bx = kn.topRows(x_len);
  const Eigen::VectorXd shift = agent.kernel * a0;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n_basis.cols());
  const double scale = bx.size() ? bx.colwise().norm().maxCoeff() : 0.0;
  if (scale > kRankTolerance) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
    cod.setThreshold(kRankTolerance / scale);
    cod.compute(bx);
    b = cod.solve(-shift.head(x_len));
  }
  agent.estimate += shift + kn * b;
  agent.kernel = kn;
}

void distributed_round(std::vector<AgentState>& agents, const CommGraph& graph, int threads) {
  if (static_cast<int>(agents.size()) != graph.size()) throw DimensionError("one agent per graph vertex required");
  std::vector<AgentMessage> outbox;
  outbox.reserve(agents.size());
  for (const auto& a : agents) outbox.push_back({a.estimate, a.kernel});

  auto work = [&](std::size_t i) {
    for (int j : graph.neighbors(static_cast<int>(i))) merge_message(agents[i], outbox[static_cast<std::size_t>(j)]);
  };
  const std::size_t workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1) {
    for (std::size_t i = 0; i < agents.size(); ++i) work(i);
    return;
  }
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < agents.size(); i += workers) work(i);
    });
  }
}

Eigen::MatrixXd estimate_x(const AgentState& agent) {
  const Eigen::Index n = agent.n();
  return agent.estimate.head(n * n).reshaped(n, n);
}

Eigen::MatrixXd estimate_d(const AgentState& agent, int j) {
  const Eigen::Index n = agent.n();
  return agent.estimate.segment((j + 1) * n * n, n * n).reshaped(n, n);
}

DistributedResult run_distributed(const Eigen::MatrixXd& lambda, const Eigen::MatrixXd& d, const CommGraph& graph,
                                  const std::vector<int>& assignment, int max_rounds, double tolerance, int threads) {
  const int nu = graph.size();
  if (nu < 1) throw ValidationError("communication graph has no agents");
  if (max_rounds < 0) throw ValidationError("round limit must be nonnegative");

  DistributedResult out;
  out.x_star = solve_lyapunov(lambda, d).x;
  const double ref = std::max(out.x_star.norm(), 1e-300);

  const auto slices = partition_lambda(lambda, assignment, nu);
  std::vector<AgentState> agents;
  agents.reserve(static_cast<std::size_t>(nu));
  for (int i = 0; i < nu; ++i) agents.push_back(local_init(i, nu, slices[static_cast<std::size_t>(i)], d));

  auto errors = [&](int round) {
    std::vector<double> errs;
    for (const auto& a : agents) {
      errs.push_back((estimate_x(a) - out.x_star).norm() / ref);
      out.trace.push_back({round, a.id, errs.back()});
    }
    return errs;
  };

  std::vector<double> errs = errors(0);
  auto done = [&] { return std::all_of(errs.begin(), errs.end(), [&](double e) { return e <= tolerance; }); };
  while (!done() && out.rounds < max_rounds) {
    distributed_round(agents, graph, threads);
    ++out.rounds;
    for (const auto& a : agents) {
      if (a.consistency_residual() > 1e-6 * (1.0 + a.z.norm())) {
        throw InconsistentLocal("agent " + std::to_string(a.id) + " lost local consistency");
      }
    }
    errs = errors(out.rounds);
  }

  for (const auto& a : agents) {
    Eigen::MatrixXd x = estimate_x(a);
    out.max_asymmetry = std::max(out.max_asymmetry, (x - x.transpose()).norm() / std::max(x.norm(), 1e-300));
    out.x_hat.push_back(std::move(x));
    out.d_hat.push_back(estimate_d(a, a.id));
    out.kernel_dims.push_back(static_cast<int>(a.kernel.cols()));
  }
  if (!done()) {
    throw NotConverged("distributed solve missed tolerance after " + std::to_string(out.rounds) + " rounds", errs,
                       graph.components());
  }
  return out;
}

}  // namespace greensplit
