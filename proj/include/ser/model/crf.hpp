#pragma once

#include <vector>

#include "ser/model/params.hpp"

namespace ser::model {

// Linear-chain CRF over unary potentials (T x K) plus a K x K transition
// matrix; score(y) = sum_t unaries[t, y_t] + sum_t transitions[y_{t-1}, y_t].

// log of the partition function via the forward recursion in log space.
double crf_log_partition(const Mat& unaries, const Mat& transitions);

double crf_score(const Mat& unaries, const Mat& transitions,
                 const std::vector<int>& labels);

// negative log-likelihood = log_partition - score(labels)
double crf_nll(const Mat& unaries, const Mat& transitions,
               const std::vector<int>& labels);

// As crf_nll, also accumulating d(nll)/d(unaries) and d(nll)/d(transitions)
// into the provided matrices (marginals minus observed counts, computed
// with the forward-backward recursions).
double crf_nll_grad(const Mat& unaries, const Mat& transitions,
                    const std::vector<int>& labels, Mat* d_unaries,
                    Mat* d_transitions);

// Max-score label sequence; ties broken toward the lowest label index.
std::vector<int> crf_viterbi(const Mat& unaries, const Mat& transitions);

}  // namespace ser::model
