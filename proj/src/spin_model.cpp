#include "ionsim/spin_model.hpp"

#include <cmath>
#include <stdexcept>

namespace ionsim {

void SpinModel::validate() const {
    const int n = size();
    if (n < 1 || j.cols() != n)
        throw std::invalid_argument("SpinModel: J must be square and non-empty");
    if (!j.allFinite() || !std::isfinite(field))
        throw std::invalid_argument("SpinModel: non-finite entries");
    if (j.diagonal().cwiseAbs().maxCoeff() != 0.0)
        throw std::invalid_argument("SpinModel: J diagonal must be zero");
    const double scale = std::max(1.0, j.cwiseAbs().maxCoeff());
    if ((j - j.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("SpinModel: J must be symmetric");
}

namespace {

Eigen::MatrixXd power_law_matrix(int n, double j0, double p) {
    if (n < 1) throw std::invalid_argument("spin model: n must be >= 1");
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            j(a, b) = j(b, a) = j0 / std::pow(static_cast<double>(b - a), p);
    return j;
}

Eigen::MatrixXd nn_matrix(int n, double j0) {
    if (n < 1) throw std::invalid_argument("spin model: n must be >= 1");
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (int a = 0; a + 1 < n; ++a) j(a, a + 1) = j(a + 1, a) = j0;
    return j;
}

SpinModel make(ModelKind kind, Eigen::MatrixXd j, double field) {
    SpinModel m;
    m.kind = kind;
    m.j = std::move(j);
    m.field = field;
    m.validate();
    return m;
}

} // namespace

SpinModel ising_power_law(int n, double j0, double p, double field) {
    return make(ModelKind::IsingTransverse, power_law_matrix(n, j0, p), field);
}

SpinModel xy_power_law(int n, double j0, double p, double field) {
    return make(ModelKind::XYTransverse, power_law_matrix(n, j0, p), field);
}

SpinModel ising_nearest_neighbor(int n, double j0, double field) {
    return make(ModelKind::IsingTransverse, nn_matrix(n, j0), field);
}

SpinModel xy_nearest_neighbor(int n, double j0, double field) {
    return make(ModelKind::XYTransverse, nn_matrix(n, j0), field);
}

SpinModel ising_from_couplings(const Eigen::MatrixXd& j, double field) {
    return make(ModelKind::IsingTransverse, j, field);
}

SpinModel xy_from_couplings(const Eigen::MatrixXd& j, double field) {
    return make(ModelKind::XYTransverse, j, field);
}

Eigen::MatrixXd staggered_couplings(const Eigen::MatrixXd& j) {
    Eigen::MatrixXd s = j;
    for (int a = 0; a < j.rows(); ++a)
        for (int b = 0; b < j.cols(); ++b)
            if ((a + b) % 2 != 0) s(a, b) = -s(a, b);
    return s;
}

} // namespace ionsim
