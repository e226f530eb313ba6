#include "pseudoboost/distributions.hpp"

#include <algorithm>
#include <cmath>

#include "pseudoboost/errors.hpp"
#include "pseudoboost/quadrature.hpp"
#include "pseudoboost/special.hpp"

namespace pseudoboost {

namespace {

void require_dim(int d, const char* who) {
    if (d < 2) throw PreconditionError(std::string(who) + ": dimension must be >= 2");
}

// log density of the RadialGamma noise at radius r: C * exp(-r/s) with
// C = 1 / (Gamma(d) s^d Surf(d)).
double radial_gamma_log_norm(int d, double s) {
    return -std::lgamma(static_cast<double>(d)) - d * std::log(s) - log_sphere_area(d);
}

// Integrals of the form Surf(m) * C * int_0^inf rho^{m-1} exp(-sqrt(off^2+rho^2)/s) drho
// evaluated in log space so large d cannot overflow.  m is the number of
// marginalized coordinates (m >= 1).
double radial_gamma_marginal(int d, double s, int m, double off) {
    const double log_pref = log_sphere_area(m) + radial_gamma_log_norm(d, s);
    const double a = std::abs(off);
    // Peak of (m-1) log rho - sqrt(a^2+rho^2)/s, found on a coarse scan.
    const double hi = s * (static_cast<double>(m) + 60.0) + a + 10.0;
    double peak = -a / s;
    if (m > 1) {
        for (int i = 1; i <= 400; ++i) {
            const double rho = hi * i / 400.0;
            const double v = (m - 1) * std::log(rho) - std::sqrt(a * a + rho * rho) / s;
            if (i == 1 || v > peak) peak = v;
        }
    }
    const double shift = peak;
    const double val = integrate(
        [&](double rho) {
            const double lv = (m > 1 ? (m - 1) * std::log(rho) : 0.0) -
                              std::sqrt(a * a + rho * rho) / s - shift;
            return std::exp(lv);
        },
        0.0, kInf, 1e-12);
    return std::exp(log_pref + shift) * val;
}

double uniform_ball_p1(int d, double a, double t) {
    if (std::abs(t) >= a) return 0.0;
    const double logc = std::lgamma(0.5 * d + 1.0) - std::lgamma(0.5 * (d + 1)) -
                        0.5 * std::log(kPi) - std::log(a);
    return std::exp(logc + 0.5 * (d - 1) * std::log1p(-(t / a) * (t / a)));
}

double uniform_ball_p2(int d, double a, double tau) {
    if (tau >= a) return 0.0;
    const double base = d / (2.0 * kPi * a * a);
    return base * std::exp(0.5 * (d - 2) * std::log1p(-(tau / a) * (tau / a)));
}

}  // namespace

NoiseSpec NoiseSpec::parse(const std::string& name) {
    if (name == "gaussian") return gaussian();
    if (name == "uniform_ball") return uniform_ball();
    if (name == "radial_gamma") return radial_gamma();
    throw ConfigError("noise: expected \"gaussian\", \"uniform_ball\" or \"radial_gamma\", got \"" +
                      name + "\"");
}

const char* NoiseSpec::name() const {
    switch (family) {
        case NoiseFamily::StandardGaussian: return "gaussian";
        case NoiseFamily::UniformBall: return "uniform_ball";
        case NoiseFamily::RadialGamma: return "radial_gamma";
    }
    return "?";
}

MixtureModel::MixtureModel(int dim, Vector mean, NoiseSpec spec)
    : d(dim), mu(std::move(mean)), noise(spec) {
    require_dim(d, "MixtureModel");
    if (mu.size() != static_cast<std::size_t>(d))
        throw DimensionError("MixtureModel: mu length does not match dimension");
    for (double v : mu)
        if (!std::isfinite(v)) throw DegenerateInputError("MixtureModel: mu has non-finite entries");
}

MixtureModel MixtureModel::axis_aligned(int dim, double mu_norm, NoiseSpec spec) {
    require_dim(dim, "MixtureModel");
    if (!(mu_norm >= 0.0) || !std::isfinite(mu_norm))
        throw DegenerateInputError("MixtureModel: mu_norm must be finite and >= 0");
    Vector mean(static_cast<std::size_t>(dim), 0.0);
    mean[0] = mu_norm;
    return MixtureModel(dim, std::move(mean), spec);
}

void sample_into(const MixtureModel& model, int n, RngStream& rng,
                 std::vector<LabeledSample>& out) {
    if (n < 0) throw PreconditionError("sample: n must be >= 0");
    const int d = model.d;
    out.resize(static_cast<std::size_t>(n));
    for (auto& s : out) {
        s.y = rng.next_sign();
        s.x.resize(static_cast<std::size_t>(d));
        switch (model.noise.family) {
            case NoiseFamily::StandardGaussian:
                for (double& v : s.x) v = rng.next_normal();
                break;
            case NoiseFamily::UniformBall: {
                const double a = model.noise.ball_radius(d);
                double nsq = 0.0;
                for (double& v : s.x) {
                    v = rng.next_normal();
                    nsq += v * v;
                }
                double u = rng.next_double();
                while (u <= 0.0) u = rng.next_double();
                const double r = a * std::pow(u, 1.0 / d);
                const double scale = r / std::max(std::sqrt(nsq), 1e-300);
                for (double& v : s.x) v *= scale;
                break;
            }
            case NoiseFamily::RadialGamma: {
                const double s_scale = model.noise.gamma_scale(d);
                double nsq = 0.0;
                for (double& v : s.x) {
                    v = rng.next_normal();
                    nsq += v * v;
                }
                const double r = s_scale * rng.next_gamma(static_cast<double>(d));
                const double scale = r / std::max(std::sqrt(nsq), 1e-300);
                for (double& v : s.x) v *= scale;
                break;
            }
        }
        for (int i = 0; i < d; ++i) s.x[static_cast<std::size_t>(i)] += s.y * model.mu[static_cast<std::size_t>(i)];
    }
}

std::vector<LabeledSample> sample(const MixtureModel& model, int n, RngStream& rng) {
    std::vector<LabeledSample> out;
    sample_into(model, n, rng, out);
    return out;
}

std::vector<std::array<double, 2>> sample_noise_2d_marginal(NoiseSpec spec, int d, int n,
                                                            RngStream& rng) {
    require_dim(d, "sample_noise_2d_marginal");
    MixtureModel noise_only = MixtureModel::axis_aligned(d, 0.0, spec);
    std::vector<LabeledSample> draws;
    sample_into(noise_only, n, rng, draws);
    std::vector<std::array<double, 2>> out(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = {draws[i].x[0], draws[i].x[1]};
    return out;
}

double marginal_density_1d(NoiseSpec spec, int d, double t) {
    require_dim(d, "marginal_density_1d");
    switch (spec.family) {
        case NoiseFamily::StandardGaussian: return normal_pdf(t);
        case NoiseFamily::UniformBall: return uniform_ball_p1(d, spec.ball_radius(d), t);
        case NoiseFamily::RadialGamma:
            return radial_gamma_marginal(d, spec.gamma_scale(d), d - 1, t);
    }
    return 0.0;
}

double marginal_density_2d(NoiseSpec spec, int d, double tau) {
    require_dim(d, "marginal_density_2d");
    if (tau < 0.0) throw PreconditionError("marginal_density_2d: radius must be >= 0");
    switch (spec.family) {
        case NoiseFamily::StandardGaussian: return std::exp(-0.5 * tau * tau) / (2.0 * kPi);
        case NoiseFamily::UniformBall: return uniform_ball_p2(d, spec.ball_radius(d), tau);
        case NoiseFamily::RadialGamma: {
            const double s = spec.gamma_scale(d);
            if (d == 2) return std::exp(radial_gamma_log_norm(d, s) - tau / s);
            return radial_gamma_marginal(d, s, d - 2, tau);
        }
    }
    return 0.0;
}

double marginal_tail_1d(NoiseSpec spec, int d, double t) {
    require_dim(d, "marginal_tail_1d");
    if (t < 0.0) throw PreconditionError("marginal_tail_1d: threshold must be >= 0");
    switch (spec.family) {
        case NoiseFamily::StandardGaussian: return normal_tail(t);
        case NoiseFamily::UniformBall: {
            const double a = spec.ball_radius(d);
            if (t >= a) return 0.0;
            return integrate([&](double u) { return uniform_ball_p1(d, a, u); }, t, a, 1e-11);
        }
        case NoiseFamily::RadialGamma: {
            const double s = spec.gamma_scale(d);
            // Beyond t + 60s the integrand has decayed below 1e-26 of its start.
            return integrate([&](double u) { return marginal_density_1d(spec, d, u); }, t,
                             t + 60.0 * s + 30.0, 1e-10);
        }
    }
    return 0.0;
}

DistParams certify_params(NoiseSpec spec, int d, double R) {
    require_dim(d, "certify_params");
    if (!(R > 0.0)) throw PreconditionError("certify_params: R must be > 0");
    DistParams p;
    p.R = R;

    double u_max = 0.0;
    for (int i = 0; i <= 10; ++i) u_max = std::max(u_max, marginal_density_1d(spec, d, R * i / 10.0));
    p.U = u_max;

    double floor2 = kInf;
    for (int i = 0; i <= 10; ++i) floor2 = std::min(floor2, marginal_density_2d(spec, d, R * i / 10.0));
    if (!(floor2 > 0.0) || !std::isfinite(floor2))
        throw CertificationError(std::string(spec.name()) +
                                 ": 2-D marginal density vanishes inside the certification disk");
    p.U_prime = 1.0 / floor2;

    double k_needed = 0.0;
    for (double t = 0.5; t <= 40.0 + 1e-9; t += 0.25) {
        const double two_sided = 2.0 * marginal_tail_1d(spec, d, t);
        if (two_sided <= 0.0) continue;  // beyond the support or below underflow: no constraint
        if (two_sided >= 1.0)
            throw CertificationError(std::string(spec.name()) +
                                     ": two-sided tail is not below 1 at the sweep start");
        k_needed = std::max(k_needed, t / -std::log(two_sided));
    }
    if (!(k_needed > 0.0) || k_needed > 100.0)
        throw CertificationError(std::string(spec.name()) +
                                 ": tail scale could not be certified on the sweep grid");
    p.K = k_needed;
    return p;
}

}  // namespace pseudoboost
