#include "qthermo/bornmarkov.hpp"

#include <cmath>
#include <string>

#include "qthermo/errors.hpp"

namespace qthermo::bm {

Eigen::Vector4cd vectorize(const QubitMatrix& rho) {
    Eigen::Vector4cd v;
    v << rho(0, 0), rho(0, 1), rho(1, 0), rho(1, 1);
    return v;
}

QubitMatrix unvectorize(const Eigen::Vector4cd& v) {
    QubitMatrix rho;
    rho << v(0), v(1),
           v(2), v(3);
    return rho;
}

namespace {

SuperOperator kron(const QubitMatrix& a, const QubitMatrix& b) {
    SuperOperator k;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) k.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    }
    return k;
}

}  // namespace

SuperOperator left_multiply(const QubitMatrix& a) { return kron(a, QubitMatrix::Identity()); }

SuperOperator right_multiply(const QubitMatrix& a) { return kron(QubitMatrix::Identity(), a.transpose()); }

namespace {

// Even half-line transform of C_R: pi/2 J(w) coth(beta w / 2), with the
// zero-frequency limit at w = 0.
double symmetric_rate(const BathSpec& b, double w) {
    const double a = std::abs(w);
    if (a < 1e-12 * b.omega_c) return zero_frequency_noise(b);
    return 0.5 * kPi * spectral_density(b, a) / std::tanh(0.5 * b.beta * a);
}

BmGenerator assemble(const SensorParams& p, const ExponentialSeries& s, const BathSpec* exact, bool lamb_shift) {
    p.validate();
    const QubitMatrix h = build_sensor_hamiltonian(p);
    const QubitMatrix coupling = build_coupling_operator(p);
    const Eigenbasis eb = sensor_eigenbasis(p);
    const QubitMatrix& v = eb.vectors;
    const QubitMatrix s_eig = v.adjoint() * coupling * v;

    QubitMatrix up_eig = QubitMatrix::Zero();
    QubitMatrix xi_eig = QubitMatrix::Zero();
    for (int m = 0; m < 2; ++m) {
        for (int n = 0; n < 2; ++n) {
            const double w = eb.energies(m) - eb.energies(n);
            Complex re_part{0.0, 0.0};
            Complex im_part{0.0, 0.0};
            for (const auto& term : s.terms) {
                const Complex kernel = 1.0 / Complex(term.nu, w);
                re_part += term.zeta.real() * kernel;
                im_part += term.zeta.imag() * kernel;
            }
            // The truncated Matsubara sum converges like 1/K; at low temperature
            // that error swamps the small upward rate, so use the closed form.
            if (exact) re_part.real(symmetric_rate(*exact, w));
            Complex up = s_eig(m, n) * re_part;
            Complex xi = -kI * s_eig(m, n) * im_part;
            if (!lamb_shift) {
                // S_mn is real in the real eigenbasis; imaginary parts are the shifts.
                up = up.real();
                xi = xi.real();
            }
            up_eig(m, n) = up;
            xi_eig(m, n) = xi;
        }
    }

    BmGenerator gen;
    gen.lamb_shift_included = lamb_shift;
    gen.upsilon = v * up_eig * v.adjoint();
    gen.xi = v * xi_eig * v.adjoint();

    const SuperOperator ham = -kI * (left_multiply(h) - right_multiply(h));
    const SuperOperator s_comm = left_multiply(coupling) - right_multiply(coupling);
    const SuperOperator up_comm = left_multiply(gen.upsilon) - right_multiply(gen.upsilon);
    const SuperOperator xi_anti = left_multiply(gen.xi) + right_multiply(gen.xi);
    gen.matrix = ham - s_comm * up_comm + s_comm * xi_anti;
    return gen;
}

}  // namespace

BmGenerator build_bm_generator(const SensorParams& p, const ExponentialSeries& s, bool lamb_shift) {
    return assemble(p, s, nullptr, lamb_shift);
}

BmGenerator build_bm_generator(const SensorParams& p, const BathSpec& b, bool lamb_shift, int k_max) {
    b.validate();
    return assemble(p, matsubara_expand(b, k_max), &b, lamb_shift);
}

Trajectory bm_propagate(const BmGenerator& gen, const QubitMatrix& rho0, double t_end, const BmOptions& opts) {
    if (!(opts.dt > 0.0) || opts.stride < 1 || t_end < 0.0) {
        throw Error(ErrorKind::InvalidArgument, "invalid Born-Markov propagation options");
    }
    const auto steps = static_cast<long>(std::llround(t_end / opts.dt));
    if (std::abs(static_cast<double>(steps) * opts.dt - t_end) > 1e-9 * std::max(1.0, t_end)) {
        throw Error(ErrorKind::InvalidArgument, "t_end must be an integer multiple of dt");
    }
    Trajectory traj;
    traj.meta.solver = "bornmarkov";
    traj.meta.dt = opts.dt;
    traj.meta.stride = opts.stride;

    const SuperOperator& l = gen.matrix;
    const double dt = opts.dt;
    Eigen::Vector4cd y = vectorize(rho0);
    traj.record(0.0, rho0);
    for (long k = 1; k <= steps; ++k) {
        const Eigen::Vector4cd k1 = l * y;
        const Eigen::Vector4cd k2 = l * (y + 0.5 * dt * k1);
        const Eigen::Vector4cd k3 = l * (y + 0.5 * dt * k2);
        const Eigen::Vector4cd k4 = l * (y + dt * k3);
        y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const double m = y.cwiseAbs().maxCoeff();
        const double t = static_cast<double>(k) * dt;
        if (!std::isfinite(m) || m > opts.divergence_bound) {
            throw Error(ErrorKind::StepInstability, "Born-Markov state diverged at t = " + std::to_string(t));
        }
        if (k % opts.stride == 0) traj.record(t, unvectorize(y));
    }
    return traj;
}

QubitMatrix bm_steady_state(const BmGenerator& gen, double tol) {
    Eigen::JacobiSVD<SuperOperator> svd(gen.matrix, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double scale = std::max(sv(0), 1e-300);
    int null_dim = 0;
    for (int i = 0; i < 4; ++i) {
        if (sv(i) < tol * scale) ++null_dim;
    }
    if (null_dim != 1) {
        throw Error(ErrorKind::DegenerateSteadyState,
                    "generator null space has dimension " + std::to_string(null_dim));
    }
    const Eigen::Vector4cd null = svd.matrixV().col(3);
    QubitMatrix rho = unvectorize(null);
    rho /= rho.trace();
    return 0.5 * (rho + rho.adjoint());
}

}  // namespace qthermo::bm
