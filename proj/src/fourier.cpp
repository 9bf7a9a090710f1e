#include <fftw3.h>

#include <algorithm>
#include <boost/math/special_functions/legendre.hpp>
#include <cmath>
#include <numbers>
#include <string>

#include "chebex/error.hpp"
#include "chebex/moments.hpp"
#include "chebex/parallel.hpp"

namespace chebex {

namespace {

struct GaussRule {
    std::vector<double> x;  // nodes on [-1, 1]
    std::vector<double> w;
};

GaussRule gauss_legendre(std::size_t order) {
    if (order < 2) throw ConfigError("panel_order must be >= 2");
    const int n = static_cast<int>(order);
    const auto zeros = boost::math::legendre_p_zeros<double>(n);
    GaussRule rule;
    for (double z : zeros) {
        const double dp = boost::math::legendre_p_prime(n, z);
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        rule.x.push_back(z);
        rule.w.push_back(w);
        if (z != 0.0) {
            rule.x.push_back(-z);
            rule.w.push_back(w);
        }
    }
    return rule;
}

constexpr double kEdgeTolerance = 1e-11;
constexpr int kMaxWidenings = 6;

double cgf(const CharFn& phi, double s) { return std::log(std::real(phi(std::complex<double>(0.0, -s)))); }

}  // namespace

Cumulants cumulants_from_cf(const CharFn& phi) {
    auto diffs = [&](double h) {
        const double k0 = cgf(phi, 0.0);
        const double kp = cgf(phi, h);
        const double km = cgf(phi, -h);
        const double kp2 = cgf(phi, 2.0 * h);
        const double km2 = cgf(phi, -2.0 * h);
        Cumulants c;
        c.c1 = (kp - km) / (2.0 * h);
        c.c2 = (kp - 2.0 * k0 + km) / (h * h);
        c.c4 = (kp2 - 4.0 * kp + 6.0 * k0 - 4.0 * km + km2) / (h * h * h * h);
        return c;
    };
    const auto pilot = diffs(1e-3);
    if (!(pilot.c2 > 0.0) || !std::isfinite(pilot.c2))
        throw NumericalError("cumulants_from_cf: non-positive variance estimate");
    auto c = diffs(std::min(0.1, 0.1 / std::sqrt(pilot.c2)));
    if (!std::isfinite(c.c1) || !std::isfinite(c.c2) || !std::isfinite(c.c4) || !(c.c2 > 0.0))
        throw NumericalError("cumulants_from_cf: non-finite cumulants");
    c.c4 = std::max(c.c4, 0.0);
    return c;
}

IncrementDensity::IncrementDensity(const CharFn& phi, const FourierConfig& cfg) : cfg_(cfg) {
    build(phi, cumulants_from_cf(phi));
}

IncrementDensity::IncrementDensity(const CharFn& phi, Cumulants cumulants, const FourierConfig& cfg) : cfg_(cfg) {
    build(phi, cumulants);
}

void IncrementDensity::build(const CharFn& phi, Cumulants c) {
    if (!(cfg_.truncation_width > 0.0)) throw ConfigError("truncation_width must be > 0");
    if (!(cfg_.tail_tolerance > 0.0)) throw ConfigError("tail_tolerance must be > 0");
    const double scale = std::sqrt(c.c2 + std::sqrt(c.c4));
    double width = cfg_.truncation_width;
    for (int attempt = 0;; ++attempt) {
        const double edge = tabulate(phi, c.c1 - width * scale, c.c1 + width * scale);
        if (edge <= kEdgeTolerance) return;
        if (attempt == kMaxWidenings)
            throw NumericalError("IncrementDensity: relative density " + std::to_string(edge) +
                                 " at the truncation edge with half-width " + std::to_string(width * scale) +
                                 "; increase truncation_width");
        width *= 1.5;
    }
}

double IncrementDensity::tabulate(const CharFn& phi, double lo, double hi) {
    lo_ = lo;
    hi_ = hi;
    const double len = hi_ - lo_;
    const double freq = std::numbers::pi / len;

    std::size_t n = 64;
    while (std::abs(phi(freq * static_cast<double>(n))) > cfg_.tail_tolerance) {
        if (n >= cfg_.max_terms)
            throw NumericalError("IncrementDensity: characteristic function still " +
                                 std::to_string(std::abs(phi(freq * static_cast<double>(n)))) + " at " +
                                 std::to_string(n) + " cosine terms");
        n = std::min(2 * n, cfg_.max_terms);
    }
    terms_ = n;

    const std::size_t grid = 16 * n;
    std::vector<double> coef(grid + 1, 0.0);
    for (std::size_t m = 0; m < n; ++m) {
        const double u = freq * static_cast<double>(m);
        const auto v = phi(u) * std::exp(std::complex<double>(0.0, -u * lo_));
        coef[m] = 0.5 * (2.0 / len) * std::real(v);
    }
    table_.assign(grid + 1, 0.0);
    fftw_plan plan = fftw_plan_r2r_1d(static_cast<int>(grid + 1), coef.data(), table_.data(), FFTW_REDFT00,
                                      FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
    step_ = len / static_cast<double>(grid);

    const double peak = *std::max_element(table_.begin(), table_.end());
    const double trough = *std::min_element(table_.begin(), table_.end());
    const double edge = std::max(std::abs(table_.front()), std::abs(table_.back()));
    if (!std::isfinite(peak) || !(peak > 0.0)) throw NumericalError("IncrementDensity: density has no mass");
    if (trough < -1e-8 * peak)
        throw NumericalError("IncrementDensity: density dips to " + std::to_string(trough) + " (peak " +
                             std::to_string(peak) + ") on [" + std::to_string(lo_) + ", " + std::to_string(hi_) +
                             "]");
    return edge / peak;
}

double IncrementDensity::operator()(double y) const noexcept {
    if (!(y >= lo_ && y <= hi_)) return 0.0;
    constexpr std::size_t kPoints = 6;
    const std::size_t last = table_.size() - 1;
    const double t = (y - lo_) / step_;
    const auto cell = static_cast<std::ptrdiff_t>(std::floor(t));
    const std::size_t first = static_cast<std::size_t>(
        std::clamp<std::ptrdiff_t>(cell - 2, 0, static_cast<std::ptrdiff_t>(last + 1 - kPoints)));
    double sum = 0.0;
    for (std::size_t i = 0; i < kPoints; ++i) {
        double li = 1.0;
        const double ti = static_cast<double>(first + i);
        for (std::size_t j = 0; j < kPoints; ++j) {
            if (j == i) continue;
            const double tj = static_cast<double>(first + j);
            li *= (t - tj) / (ti - tj);
        }
        sum += li * table_[first + i];
    }
    return sum;
}

double IncrementDensity::integrate(const std::function<double(double)>& h, double a, double b,
                                   std::span<const double> breaks) const {
    const double from = std::max(a, lo_);
    const double to = std::min(b, hi_);
    if (!(from < to)) return 0.0;
    std::vector<double> cuts{from, to};
    for (double br : breaks)
        if (br > from && br < to) cuts.push_back(br);
    std::sort(cuts.begin(), cuts.end());
    const auto rule = gauss_legendre(cfg_.panel_order);
    const double max_panel = resolution();
    double total = 0.0;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        const double len = cuts[s + 1] - cuts[s];
        const auto panels = static_cast<std::size_t>(std::ceil(len / max_panel));
        const double width = len / static_cast<double>(std::max<std::size_t>(panels, 1));
        for (std::size_t p = 0; p < std::max<std::size_t>(panels, 1); ++p) {
            const double mid = cuts[s] + (static_cast<double>(p) + 0.5) * width;
            for (std::size_t i = 0; i < rule.x.size(); ++i) {
                const double y = mid + 0.5 * width * rule.x[i];
                total += 0.5 * width * rule.w[i] * h(y) * (*this)(y);
            }
        }
    }
    return total;
}

MomentMatrix gamma_fourier(const ChebDomain& domain, std::size_t degree, const CharFn& phi, double dt,
                           const FourierConfig& cfg) {
    return gamma_fourier(domain, degree, IncrementDensity(phi, cfg), dt);
}

MomentMatrix gamma_fourier(const ChebDomain& domain, std::size_t degree, const IncrementDensity& density,
                           double dt) {
    if (degree == 0) throw ConfigError("gamma_fourier: degree must be >= 1");
    if (!(dt > 0.0)) throw ConfigError("gamma_fourier: dt must be > 0");
    const auto rule = gauss_legendre(density.config().panel_order);
    const auto nodes = cheb_nodes(domain, degree);
    const std::size_t n = degree + 1;
    const double half_width = 0.5 * domain.width();
    // Panel width in theta (x = from_unit(cos theta)) resolving both cos(j theta)
    // and the finest density feature (16 points cover four grid cells).
    const double max_panel =
        std::min(2.0 * std::numbers::pi / static_cast<double>(n), 4.0 * density.resolution() / half_width);

    std::vector<double> g(n * n, 0.0);
    parallel_for(n, density.config().threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> basis(n);
        std::vector<double> acc(n);
        for (std::size_t k = begin; k < end; ++k) {
            const double x_lo = std::max(domain.lo(), nodes[k] + density.lo());
            const double x_hi = std::min(domain.hi(), nodes[k] + density.hi());
            std::fill(acc.begin(), acc.end(), 0.0);
            if (x_lo < x_hi) {
                const double th_lo = std::acos(std::clamp(domain.to_unit(x_hi), -1.0, 1.0));
                const double th_hi = std::acos(std::clamp(domain.to_unit(x_lo), -1.0, 1.0));
                const auto panels =
                    std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((th_hi - th_lo) / max_panel)));
                const double width = (th_hi - th_lo) / static_cast<double>(panels);
                for (std::size_t p = 0; p < panels; ++p) {
                    const double mid = th_lo + (static_cast<double>(p) + 0.5) * width;
                    for (std::size_t i = 0; i < rule.x.size(); ++i) {
                        const double th = mid + 0.5 * width * rule.x[i];
                        const double z = std::cos(th);
                        const double q = density(domain.from_unit(z) - nodes[k]);
                        if (q == 0.0) continue;
                        const double wt = 0.5 * width * rule.w[i] * half_width * std::sin(th) * q;
                        chebyshev_basis(z, basis);
                        for (std::size_t j = 0; j < n; ++j) acc[j] += wt * basis[j];
                    }
                }
            }
            std::copy(acc.begin(), acc.end(), g.begin() + static_cast<std::ptrdiff_t>(k * n));
        }
    });
    return MomentMatrix(domain, degree, dt, MomentBackend::fourier, std::move(g));
}

}  // namespace chebex
