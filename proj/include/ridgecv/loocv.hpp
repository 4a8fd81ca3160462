#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "ridgecv/dataset.hpp"

namespace ridgecv {

// Log-spaced lambda grid. The default window [1e-6 s2bar, 1e6 s2bar], where
// s2bar is the mean squared singular value, tracks the scaling equivariance
// of the loss: rescaling the spectrum by c rescales the window by c^2.
struct GridConfig {
    double lambda_min = 1e-6;
    double lambda_max = 1e6;
    int points = 400;

    static GridConfig for_problem(const SvdForm& svd, int points = 400);
    std::vector<double> log_grid() const;
};

// Sampled leave-one-out loss curve with analytic first and second
// derivatives. tail_limit is ||Y||^2 = lim_{lambda->inf} L(lambda).
struct LoocvCurve {
    std::vector<double> lambdas;
    std::vector<double> loss;
    std::vector<double> grad;
    std::vector<double> hess;
    double tail_limit = 0.0;
    std::uint64_t hash = 0;
    GridConfig grid;
};

struct LossDerivatives {
    double loss;
    double grad;
    double hess;
};

// Evaluates L, L', L'' at arbitrary lambda with per-problem work hoisted out
// (U^T Y and U.^2 are formed once). All evaluations are pure and independent,
// so grids may be partitioned across workers freely.
class LoocvEvaluator {
  public:
    LoocvEvaluator(const SvdForm& svd, const Eigen::VectorXd& Y);

    double loss(double lambda) const;
    double grad(double lambda) const;
    double hess(double lambda) const;
    LossDerivatives all(double lambda) const;

    // Blocked whole-grid evaluation: a handful of dense products instead of
    // per-lambda passes. Values are bitwise independent of how callers
    // partition the grid.
    std::vector<double> grad_grid(const std::vector<double>& lambdas) const;
    void curve_grid(const std::vector<double>& lambdas, std::vector<double>& loss,
                    std::vector<double>& grad, std::vector<double>& hess) const;

    double tail_limit() const { return tail_limit_; }
    const SvdForm& svd() const { return svd_; }
    const Eigen::VectorXd& response() const { return Y_; }

  private:
    struct Terms;
    Terms terms(double lambda, int order) const;

    SvdForm svd_;
    Eigen::VectorXd Y_;
    Eigen::MatrixXd U2_;  // elementwise squares of U
    Eigen::VectorXd z_;   // U^T Y
    double tail_limit_;
};

// Ridge hat values Q_n(lambda) = u_n^T S (S^2 + lambda I)^-1 S u_n.
// Each lies in [0, 1); strictly decreasing in lambda; Q_n(0) = nu_n.
Eigen::VectorXd hat_values(const SvdForm& svd, double lambda);

// In-sample ridge predictions x_n^T theta_lambda, computed in the SVD frame
// (independent of V).
Eigen::VectorXd ridge_predictions(const SvdForm& svd, const Eigen::VectorXd& Y,
                                  double lambda);

// Closed-form leave-one-out loss L(lambda) = sum_n (x_n^T theta_lambda - y_n)^2
// / (1 - Q_n)^2. Throws LeverageOne when some 1 - Q_n <= 1e-12.
double loocv_loss(const SvdForm& svd, const Eigen::VectorXd& Y, double lambda);
double loocv_grad(const SvdForm& svd, const Eigen::VectorXd& Y, double lambda);
double loocv_hess(const SvdForm& svd, const Eigen::VectorXd& Y, double lambda);

// Reference implementation: N explicit (N-1)-point ridge refits, each one a
// dense normal-equations solve. Deliberately shares no code with the
// closed form; this is the oracle the shortcut is tested against.
double brute_force_loocv(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y,
                         double lambda);
double brute_force_loocv(const StandardizedDataset& ds, double lambda);

// Flat-spectrum (S = 1) quadratic coefficients:
//   L'(lambda)  = 2/(1+l)^4 sum_n [(1+l)/(1+l-nu_n)]^3 (xi1 l^2 + xi2 l + xi3)
//   L''(lambda) = 2/(1+l)^5 sum_n [(1+l)/(1+l-nu_n)]^4 (a l^2 + b l + c)
// with, writing p = u_n^T theta_hat and e = residual,
//   xi1 = (1-nu) p^2 -   nu e^2 + (1-2nu) e p
//   xi2 = (1-nu) p^2 - 2 nu e^2 + (2-3nu) e p
//   xi3 =           -   nu e^2 + (1- nu) e p
// and (a, b, c) obtained by differentiating the L' form exactly:
//   a = -2 xi1,  b = (2-nu) xi1 - 3 xi2,  c = -nu xi1 + xi2 - 4 xi3.
struct XiCoefficients {
    Eigen::VectorXd xi1, xi2, xi3;
    Eigen::VectorXd a, b, c;
    Eigen::VectorXd nu;
    double xi1_sum = 0, xi2_sum = 0, xi3_sum = 0;
    double a_sum = 0, b_sum = 0, c_sum = 0;

    double grad_from_xi(double lambda) const;
    double hess_from_abc(double lambda) const;
};

// Throws FlatSpectrumRequired unless all |s_d - 1| <= 1e-8.
XiCoefficients xi_coefficients(const SvdForm& svd, const Eigen::VectorXd& Y);

LoocvCurve compute_curve(const SvdForm& svd, const Eigen::VectorXd& Y,
                         const GridConfig& grid);

}  // namespace ridgecv
