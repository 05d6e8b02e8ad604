#include "mivsps/regression.hpp"

#include "mivsps/linalg.hpp"

#include <sstream>

namespace mivsps {

void validate(const RegressionData& data, bool with_instruments) {
    const auto n = data.Y.rows();
    if (data.Phi.rows() != n) throw DimensionError("regression: Y and Phi row counts differ");
    if (data.state_dim + data.input_dim != data.Phi.cols()) {
        throw DimensionError("regression: Phi column count does not match state_dim + input_dim");
    }
    if (with_instruments) {
        if (data.Psi.rows() != n || data.Psi.cols() != data.Phi.cols()) {
            throw DimensionError("regression: Psi must have the same shape as Phi");
        }
    }
    if (n < data.Phi.cols()) {
        std::ostringstream msg;
        msg << "regression: underdetermined (n = " << n << " < d = " << data.Phi.cols() << ")";
        throw DimensionError(msg.str());
    }
}

namespace {

RegressionData assemble(const Trajectory& traj, const std::vector<Vector>& inputs, Mode mode) {
    const int n = traj.length();
    if (n < 1 || traj.x.size() != static_cast<std::size_t>(n + 1)) {
        throw DimensionError("regression: trajectory is empty or inconsistent");
    }
    const int dx = static_cast<int>(traj.x.front().size());
    const int du = static_cast<int>(inputs.front().size());
    if (n < dx + du) {
        std::ostringstream msg;
        msg << "regression: underdetermined (n = " << n << " < d = " << dx + du << ")";
        throw DimensionError(msg.str());
    }
    RegressionData data;
    data.mode = mode;
    data.state_dim = dx;
    data.input_dim = du;
    data.Y.resize(n, dx);
    data.Phi.resize(n, dx + du);
    for (int k = 0; k < n; ++k) {
        data.Y.row(k) = traj.x[k + 1].transpose();
        data.Phi.row(k).head(dx) = traj.x[k].transpose();
        data.Phi.row(k).tail(du) = inputs[k].transpose();
    }
    return data;
}

RegressionData instruments_from_estimate(const RegressionData& data, const Trajectory& traj,
                                         const Matrix& estimate, InstrumentDiagnostics* diagnostics,
                                         double cond_phi) {
    const int n = data.n();
    const int dx = data.state_dim;
    const int dr = static_cast<int>(traj.r.front().size());
    if (traj.length() != n) throw DimensionError("instruments: trajectory length differs from data");
    if (data.input_dim != dr) {
        throw DimensionError("instruments: reference dimension must equal the input block dimension");
    }
    // estimate = [Ahat'; Bhat'] so xbar' Ahat' + r' Bhat' is one row of the recursion.
    const Matrix state_part = estimate.topRows(dx);
    const Matrix input_part = estimate.bottomRows(dr);

    RegressionData out = data;
    out.Psi.resize(n, dx + dr);
    Eigen::RowVectorXd xbar = Eigen::RowVectorXd::Zero(dx);
    for (int k = 0; k < n; ++k) {
        const Eigen::RowVectorXd r = traj.r[k].transpose();
        out.Psi.row(k).head(dx) = xbar;
        out.Psi.row(k).tail(dr) = r;
        xbar = xbar * state_part + r * input_part;
        if (!xbar.allFinite() || xbar.norm() > kStateOverflowGuard) {
            throw DegeneracyError("xbar", "instrument degeneracy: noiseless state sequence diverged");
        }
    }
    const double cond_psi_phi = linalg::condition_number(out.Psi.transpose() * out.Phi);
    if (diagnostics != nullptr) {
        diagnostics->cond_phi = cond_phi;
        diagnostics->cond_psi_phi = cond_psi_phi;
    }
    if (!(cond_psi_phi <= kDegeneracyCondition)) {
        std::ostringstream msg;
        msg << "instrument degeneracy: Psi'Phi is singular or ill-conditioned (cond " << cond_psi_phi
            << ")";
        throw DegeneracyError("Psi'Phi", msg.str());
    }
    return out;
}

Matrix least_squares_checked(const RegressionData& data, double* cond_out) {
    const Matrix gram = data.Phi.transpose() * data.Phi;
    const double cond = linalg::condition_number(gram);
    if (cond_out != nullptr) *cond_out = cond;
    if (!(cond <= kDegeneracyCondition)) {
        std::ostringstream msg;
        msg << "instrument degeneracy: Phi'Phi is singular or ill-conditioned (cond " << cond << ")";
        throw DegeneracyError("Phi'Phi", msg.str());
    }
    return data.Phi.colPivHouseholderQr().solve(data.Y);
}

}  // namespace

RegressionData build_direct(const Trajectory& traj) {
    if (traj.u.empty()) throw DimensionError("regression: trajectory is empty");
    return assemble(traj, traj.u, Mode::Direct);
}

IndirectData build_indirect(const Trajectory& traj, const SystemSpec& spec) {
    if (traj.r.empty()) throw DimensionError("regression: trajectory is empty");
    IndirectData out;
    out.data = assemble(traj, traj.r, Mode::Indirect);
    if (out.data.state_dim != spec.dx() || out.data.input_dim != spec.dr()) {
        throw DimensionError("regression: trajectory does not match the system dimensions");
    }
    out.C = spec.closed_loop_C();
    out.D = spec.closed_loop_D();
    return out;
}

Matrix true_parameter(const SystemSpec& spec, Mode mode) {
    const Matrix state = mode == Mode::Direct ? spec.A : spec.closed_loop_C();
    const Matrix input = mode == Mode::Direct ? spec.B : spec.closed_loop_D();
    Matrix theta(state.cols() + input.cols(), state.rows());
    theta.topRows(state.cols()) = state.transpose();
    theta.bottomRows(input.cols()) = input.transpose();
    return theta;
}

RegressionData build_instruments(const RegressionData& data, const Trajectory& traj,
                                 InstrumentDiagnostics* diagnostics) {
    validate(data, false);
    double cond_phi = 0.0;
    const Matrix estimate = least_squares_checked(data, &cond_phi);
    return instruments_from_estimate(data, traj, estimate, diagnostics, cond_phi);
}

RegressionData build_instruments(const RegressionData& data, const Trajectory& traj,
                                 const RegressionData& estimation_data,
                                 InstrumentDiagnostics* diagnostics) {
    validate(data, false);
    validate(estimation_data, false);
    if (estimation_data.mode != data.mode || estimation_data.d() != data.d() ||
        estimation_data.outputs() != data.outputs()) {
        throw DimensionError("instruments: estimation data does not match the regression problem");
    }
    double cond_phi = 0.0;
    const Matrix estimate = least_squares_checked(estimation_data, &cond_phi);
    return instruments_from_estimate(data, traj, estimate, diagnostics, cond_phi);
}

RegressionData VectorizedProblem::as_regression() const {
    RegressionData data;
    data.Y = y;
    data.Phi = Xi;
    data.Psi = Psi;
    data.state_dim = d_theta();
    data.input_dim = 0;
    return data;
}

VectorizedProblem vectorize(const RegressionData& data) {
    validate(data, true);
    const int n = data.n();
    const int dx = data.state_dim;
    const int du = data.input_dim;
    if (data.outputs() != dx) {
        throw DimensionError("vectorize: output dimension must equal the state block dimension");
    }
    const int d_theta = dx * dx + dx * du;
    VectorizedProblem out;
    out.state_dim = dx;
    out.input_dim = du;
    out.samples = n;
    out.y.resize(static_cast<Eigen::Index>(n) * dx);
    out.Xi = Matrix::Zero(static_cast<Eigen::Index>(n) * dx, d_theta);
    out.Psi = Matrix::Zero(static_cast<Eigen::Index>(n) * dx, d_theta);
    for (int k = 0; k < n; ++k) {
        for (int i = 0; i < dx; ++i) {
            const Eigen::Index row = static_cast<Eigen::Index>(k) * dx + i;
            out.y(row) = data.Y(k, i);
            out.Xi.row(row).segment(i * dx, dx) = data.Phi.row(k).head(dx);
            out.Xi.row(row).segment(dx * dx + i * du, du) = data.Phi.row(k).tail(du);
            out.Psi.row(row).segment(i * dx, dx) = data.Psi.row(k).head(dx);
            out.Psi.row(row).segment(dx * dx + i * du, du) = data.Psi.row(k).tail(du);
        }
    }
    return out;
}

Vector vec_parameter(const Matrix& theta, int state_dim, int input_dim) {
    const int dx = state_dim;
    const int du = input_dim;
    if (theta.rows() != dx + du || theta.cols() != dx) {
        throw DimensionError("vec_parameter: Theta must be (dx + du) x dx");
    }
    Vector out(dx * dx + dx * du);
    for (int i = 0; i < dx; ++i) {
        out.segment(i * dx, dx) = theta.col(i).head(dx);
        out.segment(dx * dx + i * du, du) = theta.col(i).tail(du);
    }
    return out;
}

Matrix unvec_parameter(const Vector& theta, int state_dim, int input_dim) {
    const int dx = state_dim;
    const int du = input_dim;
    if (theta.size() != dx * dx + dx * du) throw DimensionError("unvec_parameter: wrong length");
    Matrix out(dx + du, dx);
    for (int i = 0; i < dx; ++i) {
        out.col(i).head(dx) = theta.segment(i * dx, dx);
        out.col(i).tail(du) = theta.segment(dx * dx + i * du, du);
    }
    return out;
}

}  // namespace mivsps
