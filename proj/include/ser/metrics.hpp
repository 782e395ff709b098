#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace ser::harness {

struct Metrics {
  double accuracy = 0.0;
  std::vector<double> precision, recall, f1;  // per class
  double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
  double weighted_precision = 0.0, weighted_recall = 0.0, weighted_f1 = 0.0;
  Eigen::MatrixXd confusion;  // rows = true, columns = predicted
  std::vector<std::string> class_names;
  long total = 0;
};

// Precision = cm[c,c]/colsum (0 when the column is empty), recall =
// cm[c,c]/rowsum, F1 the harmonic mean (0 when both vanish). Weighted
// averages use true-class support.
Metrics metrics_from_confusion(const Eigen::MatrixXd& confusion,
                               const std::vector<std::string>& class_names);

Metrics evaluate_predictions(const std::vector<int>& y_true,
                             const std::vector<int>& y_pred, int n_classes,
                             const std::vector<std::string>& class_names);

}  // namespace ser::harness
