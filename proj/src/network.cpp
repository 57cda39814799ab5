#include "hmnss/network.hpp"

#include <algorithm>
#include <set>

#include "hmnss/errors.hpp"
#include "hmnss/rng.hpp"

namespace hmnss {

bool is_connected(int n, const std::vector<std::pair<int, int>>& edges) {
  if (n <= 0) return false;
  std::vector<std::vector<int>> adj(n);
  for (auto [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w : adj[v])
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        stack.push_back(w);
      }
  }
  return count == n;
}

Graph::Graph(int n, std::vector<std::pair<int, int>> edges) : n_(n), adj_(n > 0 ? n : 0) {
  if (n < 1) throw GraphError("graph needs at least one node");
  std::set<std::pair<int, int>> uniq;
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n || b >= n) throw GraphError("edge endpoint out of range");
    if (a == b) throw GraphError("self loop");
    uniq.insert({std::min(a, b), std::max(a, b)});
  }
  edges_.assign(uniq.begin(), uniq.end());
  if (!is_connected(n, edges_)) throw GraphError("graph is not connected");
  for (auto [a, b] : edges_) {
    adj_[a].push_back(b);
    adj_[b].push_back(a);
  }
  for (auto& v : adj_) std::sort(v.begin(), v.end());
}

Graph Graph::complete(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.push_back({i, j});
  return Graph(n, e);
}

Graph Graph::ring(int n) {
  if (n < 3) return path(n);
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i) e.push_back({i, (i + 1) % n});
  return Graph(n, e);
}

Graph Graph::path(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < n; ++i) e.push_back({i, i + 1});
  return Graph(n, e);
}

Graph Graph::erdos_renyi(int n, double p, std::uint64_t seed) {
  if (!(p > 0.0 && p <= 1.0)) throw GraphError("Erdos-Renyi probability must be in (0,1]");
  Rng rng(seed);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (rng.uniform() < p) e.push_back({i, j});
    if (is_connected(n, e)) return Graph(n, e);
  }
  throw GraphError("could not draw a connected Erdos-Renyi graph");
}

Mat laplacian(const Graph& g) {
  Mat L = Mat::Zero(g.n(), g.n());
  for (auto [a, b] : g.edges()) {
    L(a, b) -= 1.0;
    L(b, a) -= 1.0;
    L(a, a) += 1.0;
    L(b, b) += 1.0;
  }
  return L;
}

Spectrum spectrum_summary(const Graph& g) {
  if (g.n() < 2) throw GraphError("spectrum needs at least two nodes");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(laplacian(g));
  const auto& ev = es.eigenvalues();
  Spectrum s;
  s.lambda2 = ev(1);
  s.lambda_max = ev(ev.size() - 1);
  if (s.lambda2 <= 1e-10) throw GraphError("graph is disconnected (lambda2 = 0)");
  s.sigma_L = s.lambda_max / s.lambda2;
  return s;
}

SelectionMatrices build_selection(int n) {
  if (n < 2) throw DomainError("build_selection: n must be >= 2");
  SelectionMatrices s;
  const int n2 = n * n;
  s.P = Mat::Zero(n, n2);
  s.Q = Mat::Zero(n2 - n, n2);
  for (int i = 0; i < n; ++i) {
    Mat Pi = Mat::Zero(1, n);
    Pi(0, i) = 1.0;
    Mat Qi = Mat::Zero(n - 1, n);
    for (int k = 0, r = 0; k < n; ++k)
      if (k != i) Qi(r++, k) = 1.0;
    s.P.block(i, i * n, 1, n) = Pi;
    s.Q.block(i * (n - 1), i * n, n - 1, n) = Qi;
    s.P_i.push_back(Pi);
    s.Q_i.push_back(Qi);
  }
  return s;
}

Mat communication_matrix(const Mat& L) {
  const int n = static_cast<int>(L.rows());
  Mat big = Mat::Zero(n * n, n * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (L(a, b) != 0.0) big.block(a * n, b * n, n, n) = L(a, b) * Mat::Identity(n, n);
  return big;
}

}  // namespace hmnss
