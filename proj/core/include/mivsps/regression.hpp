#pragma once

#include "mivsps/model.hpp"
#include "mivsps/types.hpp"

namespace mivsps {

// Matrix-variate regression Y = Phi * Theta + W with instruments Psi.
// Phi and Psi rows are (state part, input part): the first `state_dim`
// columns carry x_k (or its noiseless surrogate), the remaining
// `input_dim` columns carry u_k (direct) or r_k (indirect).
struct RegressionData {
    Matrix Y;    // n x dx
    Matrix Phi;  // n x d
    Matrix Psi;  // n x d, empty until instruments are built
    Mode mode = Mode::Direct;
    int state_dim = 0;
    int input_dim = 0;

    int n() const { return static_cast<int>(Y.rows()); }
    int d() const { return static_cast<int>(Phi.cols()); }
    int outputs() const { return static_cast<int>(Y.cols()); }
    bool has_instruments() const { return Psi.size() != 0; }
};

// Dimension contract; with_instruments also requires Psi shaped like Phi.
void validate(const RegressionData& data, bool with_instruments);

constexpr double kDegeneracyCondition = 1e12;

// Condition numbers of Phi'Phi and Psi'Phi recorded when instruments are built.
struct InstrumentDiagnostics {
    double cond_phi = 0.0;
    double cond_psi_phi = 0.0;
};

RegressionData build_direct(const Trajectory& traj);

struct IndirectData {
    RegressionData data;
    Matrix C;  // A + B F
    Matrix D;  // B G
};
IndirectData build_indirect(const Trajectory& traj, const SystemSpec& spec);

// Theta* = [A'; B'] (direct) or [C'; D'] (indirect).
Matrix true_parameter(const SystemSpec& spec, Mode mode);

// Single-sample instruments: least squares on `data` itself, then a
// noiseless state sequence xbar_{k+1} = Ahat xbar_k + Bhat r_k from xbar_0 = 0,
// and psi_k = (xbar_k, r_k). Throws DegeneracyError naming Phi'Phi or Psi'Phi
// when either has condition number above 1e12.
RegressionData build_instruments(const RegressionData& data, const Trajectory& traj,
                                 InstrumentDiagnostics* diagnostics = nullptr);

// Two-sample variant: the pre-estimate comes from an independent data set of
// the same mode, so Psi is independent of the noise in `data`.
RegressionData build_instruments(const RegressionData& data, const Trajectory& traj,
                                 const RegressionData& estimation_data,
                                 InstrumentDiagnostics* diagnostics = nullptr);

// Scalar linear-regression form y = Xi theta + w. Row k * dx + i holds the
// i-th output at time k; theta stacks the columns of Theta split into their
// state part (first dx^2 entries) and input part (last dx * du entries).
struct VectorizedProblem {
    Vector y;    // n*dx
    Matrix Xi;   // n*dx x d_theta
    Matrix Psi;  // n*dx x d_theta, same block rule applied to psi_k
    int state_dim = 0;
    int input_dim = 0;
    int samples = 0;  // n

    int d_theta() const { return static_cast<int>(Xi.cols()); }
    int rows() const { return static_cast<int>(Xi.rows()); }

    // View as a single-output matrix regression (Y is N x 1).
    RegressionData as_regression() const;
};

VectorizedProblem vectorize(const RegressionData& data);

// theta <-> Theta with Theta of shape (dx + du) x dx.
Vector vec_parameter(const Matrix& theta, int state_dim, int input_dim);
Matrix unvec_parameter(const Vector& theta, int state_dim, int input_dim);

}  // namespace mivsps
