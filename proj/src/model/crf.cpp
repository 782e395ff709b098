#include "ser/model/crf.hpp"

#include <cmath>
#include <limits>

#include "ser/errors.hpp"

namespace ser::model {

namespace {

void check_shapes(const Mat& unaries, const Mat& transitions) {
  if (unaries.rows() < 1 || unaries.cols() < 2)
    throw ShapeMismatch("crf: need T >= 1 and K >= 2");
  if (transitions.rows() != unaries.cols() ||
      transitions.cols() != unaries.cols())
    throw ShapeMismatch("crf: transition matrix must be K x K");
}

double logsumexp(const Eigen::VectorXd& v) {
  const double mx = v.maxCoeff();
  if (!std::isfinite(mx)) return mx;
  return mx + std::log((v.array() - mx).exp().sum());
}

// alpha(t, j) = log-sum of all partial paths ending in state j at time t
Mat forward_table(const Mat& unaries, const Mat& transitions) {
  const auto t_len = unaries.rows();
  const auto k = unaries.cols();
  Mat alpha(t_len, k);
  alpha.row(0) = unaries.row(0);
  for (Eigen::Index t = 1; t < t_len; ++t)
    for (Eigen::Index j = 0; j < k; ++j)
      alpha(t, j) =
          unaries(t, j) +
          logsumexp(alpha.row(t - 1).transpose() + transitions.col(j));
  return alpha;
}

// beta(t, i) = log-sum of all suffix paths starting in state i at time t
Mat backward_table(const Mat& unaries, const Mat& transitions) {
  const auto t_len = unaries.rows();
  const auto k = unaries.cols();
  Mat beta = Mat::Zero(t_len, k);
  for (Eigen::Index t = t_len - 2; t >= 0; --t)
    for (Eigen::Index i = 0; i < k; ++i)
      beta(t, i) = logsumexp(transitions.row(i).transpose() +
                             unaries.row(t + 1).transpose() +
                             beta.row(t + 1).transpose());
  return beta;
}

}  // namespace

double crf_log_partition(const Mat& unaries, const Mat& transitions) {
  check_shapes(unaries, transitions);
  const Mat alpha = forward_table(unaries, transitions);
  return logsumexp(alpha.row(alpha.rows() - 1).transpose());
}

double crf_score(const Mat& unaries, const Mat& transitions,
                 const std::vector<int>& labels) {
  check_shapes(unaries, transitions);
  if (labels.size() != static_cast<std::size_t>(unaries.rows()))
    throw ShapeMismatch("crf: label sequence length mismatch");
  double score = unaries(0, labels[0]);
  for (std::size_t t = 1; t < labels.size(); ++t)
    score += transitions(labels[t - 1], labels[t]) +
             unaries(static_cast<Eigen::Index>(t), labels[t]);
  return score;
}

double crf_nll(const Mat& unaries, const Mat& transitions,
               const std::vector<int>& labels) {
  return crf_log_partition(unaries, transitions) -
         crf_score(unaries, transitions, labels);
}

double crf_nll_grad(const Mat& unaries, const Mat& transitions,
                    const std::vector<int>& labels, Mat* d_unaries,
                    Mat* d_transitions) {
  check_shapes(unaries, transitions);
  if (labels.size() != static_cast<std::size_t>(unaries.rows()))
    throw ShapeMismatch("crf: label sequence length mismatch");

  const auto t_len = unaries.rows();
  const auto k = unaries.cols();
  const Mat alpha = forward_table(unaries, transitions);
  const Mat beta = backward_table(unaries, transitions);
  const double log_z = logsumexp(alpha.row(t_len - 1).transpose());

  // d(nll)/d(unaries) = state marginals - observed indicator
  for (Eigen::Index t = 0; t < t_len; ++t) {
    for (Eigen::Index j = 0; j < k; ++j)
      (*d_unaries)(t, j) += std::exp(alpha(t, j) + beta(t, j) - log_z);
    (*d_unaries)(t, labels[t]) -= 1.0;
  }

  // d(nll)/d(transitions) = pairwise marginals - observed counts
  for (Eigen::Index t = 1; t < t_len; ++t) {
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < k; ++j)
        (*d_transitions)(i, j) += std::exp(alpha(t - 1, i) + transitions(i, j) +
                                           unaries(t, j) + beta(t, j) - log_z);
    (*d_transitions)(labels[t - 1], labels[t]) -= 1.0;
  }

  return log_z - crf_score(unaries, transitions, labels);
}

std::vector<int> crf_viterbi(const Mat& unaries, const Mat& transitions) {
  check_shapes(unaries, transitions);
  const auto t_len = unaries.rows();
  const auto k = unaries.cols();

  Mat score = Mat::Zero(t_len, k);
  Eigen::MatrixXi back = Eigen::MatrixXi::Zero(t_len, k);
  score.row(0) = unaries.row(0);

  for (Eigen::Index t = 1; t < t_len; ++t) {
    for (Eigen::Index j = 0; j < k; ++j) {
      double best = -std::numeric_limits<double>::infinity();
      int best_i = 0;
      for (Eigen::Index i = 0; i < k; ++i) {
        const double s = score(t - 1, i) + transitions(i, j);
        if (s > best) {  // strict: ties keep the lowest i
          best = s;
          best_i = static_cast<int>(i);
        }
      }
      score(t, j) = best + unaries(t, j);
      back(t, j) = best_i;
    }
  }

  int last = 0;
  double best = score(t_len - 1, 0);
  for (Eigen::Index j = 1; j < k; ++j)
    if (score(t_len - 1, j) > best) {
      best = score(t_len - 1, j);
      last = static_cast<int>(j);
    }

  std::vector<int> path(t_len);
  path[t_len - 1] = last;
  for (Eigen::Index t = t_len - 2; t >= 0; --t)
    path[t] = back(t + 1, path[t + 1]);
  return path;
}

}  // namespace ser::model
