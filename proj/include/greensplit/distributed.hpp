#pragma once

// Distributed Lyapunov solving. Each agent owns a slice Lambda_i of
// Lambda = sum_i Lambda_i and the shared right-hand side D. The unknown
//   w = [vec X; vec D_1; ...; vec D_nu]      (column-major vec)
// solves, for every agent,
//   (I (x) Lambda_i + Lambda_i (x) I) vec X + vec D_i = 0,   sum_j D_j = D,
// and agents shrink their local solution sets by exchanging (estimate,
// kernel basis) pairs with graph neighbours.

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace greensplit {

/// Undirected communication graph on vertices 0..size-1.
class CommGraph {
 public:
  explicit CommGraph(int size = 0);
  CommGraph(int size, const std::vector<std::pair<int, int>>& edges);

  static CommGraph path(int n);
  static CommGraph complete(int n);
  /// rows x cols lattice, vertex r * cols + c.
  static CommGraph grid(int rows, int cols);

  void add_edge(int a, int b);
  int size() const { return static_cast<int>(adjacency_.size()); }
  /// Neighbours in ascending order.
  const std::vector<int>& neighbors(int v) const { return adjacency_.at(static_cast<std::size_t>(v)); }
  std::vector<std::pair<int, int>> edges() const;

  std::vector<std::vector<int>> components() const;
  bool connected() const { return components().size() <= 1; }
  /// Hop distances from v; -1 for unreachable vertices.
  std::vector<int> distances(int v) const;
  /// Longest shortest path; -1 if disconnected.
  int diameter() const;
  int eccentricity(int v) const;

 private:
  std::vector<std::vector<int>> adjacency_;
};

/// Splits Lambda by rows: agent assignment[k] owns row k. Sum of the slices
/// is Lambda exactly.
std::vector<Eigen::MatrixXd> partition_lambda(const Eigen::MatrixXd& lambda, const std::vector<int>& assignment,
                                              int agents);

struct AgentState {
  int id = 0;
  Eigen::MatrixXd lambda;    // local slice Lambda_i
  Eigen::MatrixXd h;         // local coefficient block H_i
  Eigen::VectorXd z;         // local right-hand side z_i
  Eigen::VectorXd estimate;  // w_i
  Eigen::MatrixXd kernel;    // orthonormal basis of the remaining solution directions

  int n() const { return static_cast<int>(lambda.rows()); }
  /// |H_i w_i - z_i|
  double consistency_residual() const { return (h * estimate - z).norm(); }
};

/// What an agent sends to its neighbours.
struct AgentMessage {
  Eigen::VectorXd estimate;
  Eigen::MatrixXd kernel;
};

/// Rank tolerance relative to the largest singular value.
inline constexpr double kRankTolerance = 1e-10;

/// Builds H_i and z_i for agent `id` of `agents` from its own slice and D.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> local_system(const Eigen::MatrixXd& lambda_i, const Eigen::MatrixXd& d,
                                                         int id, int agents);

/// Minimum-norm local solution and kernel basis of H_i.
AgentState local_init(int id, int agents, const Eigen::MatrixXd& lambda_i, const Eigen::MatrixXd& d);

/// Merges one neighbour message into the agent's state. The estimate moves
/// into the intersection of both solution sets, to the point whose X block is
/// nearest the current one (then nearest overall), so the X error never
/// grows. The kernel becomes Im(K_i) cap Im(K_j).
void merge_message(AgentState& agent, const AgentMessage& message);

/// One synchronous round. Messages are snapshotted before any update; each
/// agent then merges its neighbours' messages in ascending id order.
void distributed_round(std::vector<AgentState>& agents, const CommGraph& graph, int threads = 1);

/// X block of an estimate, unvectorized.
Eigen::MatrixXd estimate_x(const AgentState& agent);
/// D_j block of an agent's estimate.
Eigen::MatrixXd estimate_d(const AgentState& agent, int j);

struct RoundError {
  int round = 0;
  int agent = 0;
  double frobenius_error = 0.0;  // |X_i - X*|_F / |X*|_F
};

struct DistributedResult {
  Eigen::MatrixXd x_star;                 // centralized reference
  std::vector<Eigen::MatrixXd> x_hat;     // per agent
  std::vector<Eigen::MatrixXd> d_hat;     // agent i's estimate of its own D_i
  std::vector<RoundError> trace;          // round 0 is the local initialization
  std::vector<int> kernel_dims;           // final kernel dimension per agent
  int rounds = 0;
  double max_asymmetry = 0.0;             // max_i |X_i - X_i^T|_F / |X_i|_F
};

/// Runs rounds until every agent is within `tolerance` (relative Frobenius)
/// of the centralized solution or `max_rounds` is reached. Throws
/// NotConverged, carrying the per-agent errors and graph components, when
/// the tolerance is missed.
DistributedResult run_distributed(const Eigen::MatrixXd& lambda, const Eigen::MatrixXd& d, const CommGraph& graph,
                                  const std::vector<int>& assignment, int max_rounds, double tolerance = 1e-6,
                                  int threads = 1);

}  // namespace greensplit
