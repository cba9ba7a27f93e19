#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "inflection/econometrics.hpp"
#include "inflection/errors.hpp"

namespace inflection {

namespace {

struct Grouping {
  std::span<const int> id;
  std::vector<double> inv_count;
  std::vector<double> sums;
};

Grouping make_grouping(std::span<const int> id) {
  Grouping g{id, {}, {}};
  int levels = 0;
  for (int v : id) {
    if (v < 0) throw ValidationError("absorb_two_way: negative group index");
    levels = std::max(levels, v + 1);
  }
  std::vector<double> count(static_cast<std::size_t>(levels), 0.0);
  for (int v : id) count[static_cast<std::size_t>(v)] += 1.0;
  g.inv_count.resize(count.size());
  for (std::size_t k = 0; k < count.size(); ++k) {
    g.inv_count[k] = count[k] > 0.0 ? 1.0 / count[k] : 0.0;
  }
  g.sums.assign(count.size(), 0.0);
  return g;
}

void group_means(Grouping& g, const Eigen::Ref<const Eigen::VectorXd>& x) {
  std::fill(g.sums.begin(), g.sums.end(), 0.0);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    g.sums[static_cast<std::size_t>(g.id[static_cast<std::size_t>(i)])] += x[i];
  }
  for (std::size_t k = 0; k < g.sums.size(); ++k) g.sums[k] *= g.inv_count[k];
}

void subtract_means(const Grouping& g, Eigen::Ref<Eigen::VectorXd> x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x[i] -= g.sums[static_cast<std::size_t>(g.id[static_cast<std::size_t>(i)])];
  }
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

DenseIndex dense_index(std::span<const std::int64_t> labels) {
  DenseIndex out;
  out.index.reserve(labels.size());
  std::unordered_map<std::int64_t, int> seen;
  for (auto label : labels) {
    auto [it, inserted] = seen.emplace(label, out.levels);
    if (inserted) ++out.levels;
    out.index.push_back(it->second);
  }
  return out;
}

AbsorbResult absorb_two_way(const Eigen::MatrixXd& m, std::span<const int> unit,
                            std::span<const int> time, const AbsorbOptions& opts) {
  const auto n = static_cast<std::size_t>(m.rows());
  if ((opts.unit && unit.size() != n) || (opts.time && time.size() != n)) {
    throw ValidationError("absorb_two_way: group index length does not match rows");
  }
  AbsorbResult out{m, 0};
  if (!opts.unit && !opts.time) return out;

  std::optional<Grouping> gu;
  std::optional<Grouping> gt;
  if (opts.unit) gu = make_grouping(unit);
  if (opts.time) gt = make_grouping(time);

  for (Eigen::Index j = 0; j < out.demeaned.cols(); ++j) {
    auto x = out.demeaned.col(j);
    int iter = 0;
    bool converged = false;
    while (iter < opts.max_iter) {
      ++iter;
      if (gu) {
        group_means(*gu, x);
        subtract_means(*gu, x);
      }
      if (gt) {
        group_means(*gt, x);
        subtract_means(*gt, x);
      }
      if (!(gu && gt)) {
        converged = true;
        break;
      }
      // Time means are exactly zero now; the unit means are the cell
      // change the next sweep would make.
      group_means(*gu, x);
      if (max_abs(gu->sums) < opts.tol) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw NonConvergenceError("absorb_two_way: no convergence after " +
                                    std::to_string(iter) + " iterations (column " +
                                    std::to_string(j) + ")",
                                iter);
    }
    out.iterations = std::max(out.iterations, iter);
  }
  return out;
}

}  // namespace inflection
