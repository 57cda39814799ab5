#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "hmnss/linalg.hpp"

namespace hmnss {

class Graph {
 public:
  // 0-based endpoints; throws GraphError on self loops, bad indices or disconnection
  Graph(int n, std::vector<std::pair<int, int>> edges);

  static Graph complete(int n);
  static Graph ring(int n);
  static Graph path(int n);
  // redraws until connected
  static Graph erdos_renyi(int n, double p, std::uint64_t seed);

  int n() const { return n_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int i) const { return adj_[i]; }

 private:
  int n_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> adj_;
};

bool is_connected(int n, const std::vector<std::pair<int, int>>& edges);

Mat laplacian(const Graph& g);

struct Spectrum {
  double lambda2 = 0.0;
  double lambda_max = 0.0;
  double sigma_L = 0.0;
};

Spectrum spectrum_summary(const Graph& g);

struct SelectionMatrices {
  std::vector<Mat> P_i;  // 1 x n
  std::vector<Mat> Q_i;  // (n-1) x n
  Mat P;                 // n x n^2
  Mat Q;                 // (n^2-n) x n^2
};

SelectionMatrices build_selection(int n);
// L kron I_n
Mat communication_matrix(const Mat& L);

}  // namespace hmnss
