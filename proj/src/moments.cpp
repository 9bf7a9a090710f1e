#include "chebex/moments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "chebex/error.hpp"
#include "chebex/parallel.hpp"
#include "chebex/rng.hpp"

namespace chebex {

std::string_view to_string(MomentBackend b) {
    switch (b) {
        case MomentBackend::analytic: return "analytic";
        case MomentBackend::fourier: return "fourier";
        case MomentBackend::monte_carlo: return "monte_carlo";
    }
    return "unknown";
}

MomentBackend parse_moment_backend(std::string_view s) {
    if (s == "analytic") return MomentBackend::analytic;
    if (s == "fourier") return MomentBackend::fourier;
    if (s == "monte_carlo" || s == "mc") return MomentBackend::monte_carlo;
    throw ConfigError("unknown moment backend '" + std::string(s) + "'");
}

MomentMatrix::MomentMatrix(ChebDomain domain, std::size_t degree, double dt, MomentBackend backend,
                           std::vector<double> gamma)
    : domain_(domain), degree_(degree), dt_(dt), backend_(backend), gamma_(std::move(gamma)) {
    if (gamma_.size() != size() * size())
        throw ConfigError("MomentMatrix: expected " + std::to_string(size() * size()) + " entries, got " +
                          std::to_string(gamma_.size()));
    for (std::size_t i = 0; i < gamma_.size(); ++i) {
        const double v = gamma_[i];
        if (!std::isfinite(v))
            throw NumericalError("MomentMatrix: non-finite entry at (" + std::to_string(i / size()) + ", " +
                                 std::to_string(i % size()) + ")");
        if (std::abs(v) > 1.0 + 1e-9)
            throw NumericalError("MomentMatrix: |entry| > 1 at (" + std::to_string(i / size()) + ", " +
                                 std::to_string(i % size()) + "): " + std::to_string(v));
    }
}

std::vector<double> MomentMatrix::apply(std::span<const double> coeffs) const {
    if (coeffs.size() != size())
        throw ConfigError("MomentMatrix::apply: coefficient count " + std::to_string(coeffs.size()) +
                          " does not match degree " + std::to_string(degree_));
    std::vector<double> out(size());
    for (std::size_t k = 0; k < size(); ++k) {
        const auto r = row(k);
        double s = 0.0;
        for (std::size_t j = 0; j < size(); ++j) s += coeffs[j] * r[j];
        out[k] = s;
    }
    return out;
}

namespace {

struct NormalEdges {
    double mass;   // F(1) - F(-1)
    double f_hi;   // f(1)
    double f_lo;   // f(-1)
};

NormalEdges normal_edges(double mu, double sigma) {
    const double a = (-1.0 - mu) / sigma;
    const double b = (1.0 - mu) / sigma;
    const double rt2 = std::numbers::sqrt2;
    double mass;
    if (a > 0.0)
        mass = 0.5 * (std::erfc(a / rt2) - std::erfc(b / rt2));
    else if (b < 0.0)
        mass = 0.5 * (std::erfc(-b / rt2) - std::erfc(-a / rt2));
    else
        mass = 1.0 - 0.5 * std::erfc(b / rt2) - 0.5 * std::erfc(-a / rt2);
    return {mass, normal_pdf(b) / sigma, normal_pdf(a) / sigma};
}

void validate_normal(double mu, double sigma) {
    if (!std::isfinite(mu) || !std::isfinite(sigma))
        throw ConfigError("truncated_cheb_moments: non-finite input");
    if (!(sigma > 0.0)) throw ConfigError("truncated_cheb_moments: sigma must be > 0");
}

/// mu'_{n} for n = 0..degree from the parity sums of the moments.
std::vector<double> derivative_moments(std::span<const double> m) {
    std::vector<double> d(m.size(), 0.0);
    double even = 0.0;
    double odd = 0.0;
    for (std::size_t n = 0; n + 1 < m.size(); ++n) {
        if (n % 2 == 0)
            even += (n == 0 ? 0.5 : 1.0) * m[n];
        else
            odd += m[n];
        d[n + 1] = 2.0 * static_cast<double>(n + 1) * (n % 2 == 0 ? even : odd);
    }
    return d;
}

/// Gaussian elimination with partial pivoting for a matrix with two sub- and
/// two super-diagonals. Position r stores columns [r - 2, r + 4]; the extra
/// width absorbs fill-in from row swaps.
class PentaSolver {
public:
    explicit PentaSolver(std::size_t n) : n_(n), a_(n * kWidth, 0.0), rhs_(n, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return a_[r * kWidth + (c + 2 - r)]; }
    double& rhs(std::size_t r) { return rhs_[r]; }

    std::vector<double> solve() {
        for (std::size_t col = 0; col < n_; ++col) {
            const std::size_t last = std::min(col + 2, n_ - 1);
            std::size_t piv = col;
            double best = std::abs(at(col, col));
            for (std::size_t r = col + 1; r <= last; ++r) {
                const double v = std::abs(at(r, col));
                if (v > best) {
                    best = v;
                    piv = r;
                }
            }
            if (best == 0.0) throw NumericalError("truncated_cheb_moments: singular moment system");
            const std::size_t span_end = std::min(col + 4, n_ - 1);
            if (piv != col) {
                for (std::size_t c = col; c <= span_end; ++c) std::swap(at(col, c), at(piv, c));
                std::swap(rhs_[col], rhs_[piv]);
            }
            const double p = at(col, col);
            for (std::size_t r = col + 1; r <= last; ++r) {
                const double f = at(r, col) / p;
                if (f == 0.0) continue;
                at(r, col) = 0.0;
                for (std::size_t c = col + 1; c <= span_end; ++c) at(r, c) -= f * at(col, c);
                rhs_[r] -= f * rhs_[col];
            }
        }
        std::vector<double> x(n_);
        for (std::size_t r = n_; r-- > 0;) {
            double s = rhs_[r];
            const std::size_t span_end = std::min(r + 4, n_ - 1);
            for (std::size_t c = r + 1; c <= span_end; ++c) s -= at(r, c) * x[c];
            x[r] = s / at(r, r);
        }
        return x;
    }

private:
    static constexpr std::size_t kWidth = 7;
    std::size_t n_;
    std::vector<double> a_;
    std::vector<double> rhs_;
};

/// Draws processed together in the Monte Carlo basis sums.
constexpr std::size_t kBlock = 512;

/// Largest banded system we are willing to assemble for one moment vector.
constexpr std::size_t kMaxBandedSize = 400000;

/// Olver: equations n = 2..M of the five-term form
///   (n-1)/2 m_{n+2} - (n-1) mu m_{n+1} - (1 + 2 s^2 (n^2-1)) m_n
///     + (n+1) mu m_{n-1} - (n+1)/2 m_{n-2} = 2 s^2 (f(1) + (-1)^n f(-1)),
/// with m_0, m_1 known and m_{M+1} = m_{M+2} = 0.
std::vector<double> moments_banded(double mu, double sigma, std::size_t degree, std::size_t extent,
                                   const NormalEdges& e) {
    const double m0 = e.mass;
    const double m1 = mu * m0 - sigma * sigma * (e.f_hi - e.f_lo);
    const std::size_t unknowns = extent - 1;  // m_2 .. m_M
    PentaSolver solver(unknowns);
    const double s2 = sigma * sigma;
    auto known = [&](std::size_t idx) { return idx == 0 ? m0 : m1; };
    for (std::size_t n = 2; n <= extent; ++n) {
        const std::size_t row = n - 2;
        const double nd = static_cast<double>(n);
        const double b_next = e.f_hi + ((n % 2 == 0) ? e.f_lo : -e.f_lo);  // f(1) - (-1)^{n+1} f(-1)
        double rhs = 2.0 * s2 * b_next;
        const std::array<std::pair<std::size_t, double>, 5> terms{{
            {n + 2, 0.5 * (nd - 1.0)},
            {n + 1, -(nd - 1.0) * mu},
            {n, -1.0 - 2.0 * s2 * (nd * nd - 1.0)},
            {n - 1, (nd + 1.0) * mu},
            {n - 2, -0.5 * (nd + 1.0)},
        }};
        for (const auto& [idx, coeff] : terms) {
            if (idx <= 1)
                rhs -= coeff * known(idx);
            else if (idx <= extent)
                solver.at(row, idx - 2) += coeff;
        }
        solver.rhs(row) = rhs;
    }
    const auto sol = solver.solve();
    std::vector<double> m(degree + 1);
    m[0] = m0;
    m[1] = m1;
    for (std::size_t j = 2; j <= degree; ++j) m[j] = sol[j - 2];
    return m;
}

std::vector<double> moments_forward(double mu, double sigma, std::size_t degree, const NormalEdges& e) {
    std::vector<double> m(degree + 1, 0.0);
    m[0] = e.mass;
    if (degree == 0) return m;
    const double s2 = sigma * sigma;
    m[1] = mu * m[0] - s2 * (e.f_hi - e.f_lo);
    double even = 0.5 * m[0];  // running parity sums for mu'_n
    double odd = 0.0;
    for (std::size_t n = 1; n < degree; ++n) {
        // mu'_n = 2n * sum' over j <= n-1 with j = n-1 (mod 2)
        const double dn = 2.0 * static_cast<double>(n) * ((n - 1) % 2 == 0 ? even : odd);
        const double bn = e.f_hi - ((n % 2 == 0) ? e.f_lo : -e.f_lo);
        m[n + 1] = 2.0 * (mu * m[n] - s2 * (bn - dn)) - m[n - 1];
        if (n % 2 == 0)
            even += m[n];
        else
            odd += m[n];
    }
    return m;
}

}  // namespace

std::vector<double> truncated_cheb_moments_forward(double mu, double sigma, std::size_t degree) {
    validate_normal(mu, sigma);
    return moments_forward(mu, sigma, degree, normal_edges(mu, sigma));
}

TruncatedNormalMoments truncated_cheb_moments(double mu, double sigma, std::size_t degree) {
    validate_normal(mu, sigma);
    const auto edges = normal_edges(mu, sigma);
    TruncatedNormalMoments out;
    out.mu = mu;
    out.sigma = sigma;
    const double pad = std::ceil(10.0 / sigma);
    const double extent = static_cast<double>(degree) + pad + 10.0;
    if (degree >= 2 && extent <= static_cast<double>(kMaxBandedSize))
        out.moments = moments_banded(mu, sigma, degree, static_cast<std::size_t>(extent), edges);
    else
        out.moments = moments_forward(mu, sigma, degree, edges);
    for (double v : out.moments)
        if (!std::isfinite(v))
            throw NumericalError("truncated_cheb_moments: non-finite moment for mu=" + std::to_string(mu) +
                                 ", sigma=" + std::to_string(sigma));
    out.deriv_moments = derivative_moments(out.moments);
    return out;
}

std::vector<double> gamma_row_normal(const ChebDomain& domain, std::size_t degree, double node_x, double drift,
                                     double var, double dt) {
    if (!(dt > 0.0)) throw ConfigError("gamma_row_normal: dt must be > 0");
    if (!(var > 0.0)) throw ConfigError("gamma_row_normal: variance must be > 0");
    const double scale = 2.0 / domain.width();
    const double mean = domain.to_unit(node_x) + scale * dt * drift;
    const double sd = scale * std::sqrt(dt * var);
    return truncated_cheb_moments(mean, sd, degree).moments;
}

MomentMatrix gamma_normal(const ChebDomain& domain, std::size_t degree, double drift, double var, double dt,
                          unsigned threads) {
    if (degree == 0) throw ConfigError("gamma_normal: degree must be >= 1");
    const auto nodes = cheb_nodes(domain, degree);
    const std::size_t n = degree + 1;
    std::vector<double> g(n * n);
    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            const auto row = gamma_row_normal(domain, degree, nodes[k], drift, var, dt);
            std::copy(row.begin(), row.end(), g.begin() + static_cast<std::ptrdiff_t>(k * n));
        }
    });
    return MomentMatrix(domain, degree, dt, MomentBackend::analytic, std::move(g));
}

McPrecompute gamma_mc_with_expectations(const ChebDomain& domain, std::size_t degree, const ModelSpec& model,
                                        double dt, std::size_t m_pre, std::uint64_t seed,
                                        std::span<const PayoffFn> payoffs, unsigned threads,
                                        std::size_t cev_substeps) {
    model.validate();
    if (degree == 0) throw ConfigError("gamma_mc: degree must be >= 1");
    if (m_pre < 1000) throw ConfigError("gamma_mc: m_pre must be >= 1000");
    if (!(dt > 0.0)) throw ConfigError("gamma_mc: dt must be > 0");

    const std::size_t nv = variates_per_step(model, cev_substeps);
    std::vector<double> variates(m_pre * nv);
    parallel_for(m_pre, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            RandomStream stream(seed, i);
            draw_step_variates(model, stream, std::span<double>(variates.data() + i * nv, nv));
        }
    });

    // CEV: each node's draws are paired with an exact lognormal step at the
    // node's local volatility driven by the same Brownian increment; its
    // moments are known in closed form, so only the difference is sampled.
    const bool control = model.type == ModelType::cev;
    std::vector<double> zbar;
    if (control) {
        zbar.resize(m_pre);
        const double scale = 1.0 / std::sqrt(static_cast<double>(nv));
        for (std::size_t i = 0; i < m_pre; ++i) {
            double s = 0.0;
            for (std::size_t l = 0; l < nv; ++l) s += variates[i * nv + l];
            zbar[i] = s * scale;
        }
    }

    const auto nodes = cheb_nodes(domain, degree);
    const std::size_t n = degree + 1;
    std::vector<double> g(n * n, 0.0);
    std::vector<std::vector<double>> expectations(payoffs.size(), std::vector<double>(n, 0.0));
    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        // Points outside the domain get z = 0 and weight 0; the basis sums run
        // column by column so the inner loop over draws vectorises.
        std::vector<double> z(m_pre);
        std::vector<double> w(m_pre);
        std::vector<double> prev(kBlock);
        std::vector<double> cur(kBlock);
        std::vector<double> payoff_sums(payoffs.size());
        std::vector<std::array<double, 4>> part(n);
        const double inv = 1.0 / static_cast<double>(m_pre);

        // Adds sign * sum_i w_i T_j(z_i) into part[j].
        auto accumulate = [&](double sign) {
            for (std::size_t b0 = 0; b0 < m_pre; b0 += kBlock) {
                const std::size_t len = std::min(kBlock, m_pre - b0);
                const double* zb = z.data() + b0;
                const double* wb = w.data() + b0;
                for (std::size_t i = 0; i < len; ++i) {
                    prev[i] = sign * wb[i];
                    cur[i] = sign * wb[i] * zb[i];
                    part[0][i % 4] += prev[i];
                    part[1][i % 4] += cur[i];
                }
                for (std::size_t j = 2; j < n; ++j) {
                    auto& acc = part[j];
                    std::size_t i = 0;
                    for (; i + 4 <= len; i += 4) {
                        for (std::size_t l = 0; l < 4; ++l) {
                            const double next = 2.0 * zb[i + l] * cur[i + l] - prev[i + l];
                            prev[i + l] = cur[i + l];
                            cur[i + l] = next;
                            acc[l] += next;
                        }
                    }
                    for (; i < len; ++i) {
                        const double next = 2.0 * zb[i] * cur[i] - prev[i];
                        prev[i] = cur[i];
                        cur[i] = next;
                        acc[i % 4] += next;
                    }
                }
            }
        };
        auto load = [&](std::size_t i, double x) {
            const bool in = domain.contains(x);
            w[i] = in ? 1.0 : 0.0;
            z[i] = in ? std::clamp(domain.to_unit(x), -1.0, 1.0) : 0.0;
        };

        for (std::size_t k = begin; k < end; ++k) {
            std::fill(payoff_sums.begin(), payoff_sums.end(), 0.0);
            std::fill(part.begin(), part.end(), std::array<double, 4>{});
            for (std::size_t i = 0; i < m_pre; ++i) {
                const double x = advance(model, Measure::Q, nodes[k], dt,
                                         std::span<const double>(variates.data() + i * nv, nv), cev_substeps);
                for (std::size_t p = 0; p < payoffs.size(); ++p) payoff_sums[p] += payoffs[p](x);
                load(i, x);
            }
            accumulate(1.0);

            double* row = g.data() + k * n;
            std::fill(row, row + n, 0.0);
            if (control) {
                const double vol = model.sigma * std::exp(nodes[k] * (0.5 * model.cev_exponent - 1.0));
                const double shift = (model.r - 0.5 * vol * vol) * dt;
                const double sd = vol * std::sqrt(dt);
                for (std::size_t i = 0; i < m_pre; ++i) load(i, nodes[k] + shift + sd * zbar[i]);
                accumulate(-1.0);
                const auto exact = gamma_row_normal(domain, degree, nodes[k], model.r - 0.5 * vol * vol, vol * vol, dt);
                std::copy(exact.begin(), exact.end(), row);
            }
            for (std::size_t j = 0; j < n; ++j) {
                row[j] += ((part[j][0] + part[j][1]) + (part[j][2] + part[j][3])) * inv;
                row[j] = std::clamp(row[j], j == 0 ? 0.0 : -1.0, 1.0);
            }
            for (std::size_t p = 0; p < payoffs.size(); ++p) expectations[p][k] = payoff_sums[p] * inv;
        }
    });
    return {MomentMatrix(domain, degree, dt, MomentBackend::monte_carlo, std::move(g)), std::move(expectations)};
}

MomentMatrix gamma_mc(const ChebDomain& domain, std::size_t degree, const ModelSpec& model, double dt,
                      std::size_t m_pre, std::uint64_t seed, unsigned threads, std::size_t cev_substeps) {
    return gamma_mc_with_expectations(domain, degree, model, dt, m_pre, seed, {}, threads, cev_substeps).gamma;
}

}  // namespace chebex
