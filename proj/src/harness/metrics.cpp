#include "ser/metrics.hpp"

#include "ser/errors.hpp"

namespace ser::harness {

Metrics metrics_from_confusion(const Eigen::MatrixXd& confusion,
                               const std::vector<std::string>& class_names) {
  const auto k = confusion.rows();
  if (confusion.cols() != k) throw ShapeMismatch("confusion matrix not square");
  if (!class_names.empty() &&
      class_names.size() != static_cast<std::size_t>(k))
    throw ShapeMismatch("class name count mismatch");

  Metrics m;
  m.confusion = confusion;
  m.class_names = class_names;
  const double total = confusion.sum();
  m.total = static_cast<long>(total);
  m.accuracy = total > 0 ? confusion.trace() / total : 0.0;

  m.precision.resize(k);
  m.recall.resize(k);
  m.f1.resize(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const double col = confusion.col(c).sum();
    const double row = confusion.row(c).sum();
    const double tp = confusion(c, c);
    m.precision[c] = col > 0 ? tp / col : 0.0;
    m.recall[c] = row > 0 ? tp / row : 0.0;
    const double pr = m.precision[c] + m.recall[c];
    m.f1[c] = pr > 0 ? 2.0 * m.precision[c] * m.recall[c] / pr : 0.0;
  }

  for (Eigen::Index c = 0; c < k; ++c) {
    m.macro_precision += m.precision[c];
    m.macro_recall += m.recall[c];
    m.macro_f1 += m.f1[c];
    const double support = confusion.row(c).sum();
    const double w = total > 0 ? support / total : 0.0;
    m.weighted_precision += w * m.precision[c];
    m.weighted_recall += w * m.recall[c];
    m.weighted_f1 += w * m.f1[c];
  }
  m.macro_precision /= static_cast<double>(k);
  m.macro_recall /= static_cast<double>(k);
  m.macro_f1 /= static_cast<double>(k);
  return m;
}

Metrics evaluate_predictions(const std::vector<int>& y_true,
                             const std::vector<int>& y_pred, int n_classes,
                             const std::vector<std::string>& class_names) {
  if (y_true.size() != y_pred.size())
    throw ShapeMismatch("evaluate: prediction count mismatch");
  Eigen::MatrixXd cm = Eigen::MatrixXd::Zero(n_classes, n_classes);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] < 0 || y_true[i] >= n_classes || y_pred[i] < 0 ||
        y_pred[i] >= n_classes)
      throw ShapeMismatch("evaluate: label outside class range");
    cm(y_true[i], y_pred[i]) += 1.0;
  }
  return metrics_from_confusion(cm, class_names);
}

}  // namespace ser::harness
