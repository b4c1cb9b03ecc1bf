#include "nafem/nonlinearity.hpp"

#include "nafem/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

namespace nafem {

NonlinearSource NonlinearSource::zero() {
    NonlinearSource f;
    f.kind_ = GrowthKind::Lipschitz;
    f.name_ = "zero";
    f.zero_ = true;
    f.eval_ = [](double, double) { return 0.0; };
    f.coefficients_ = {0.0};
    f.constants_.lipschitz_k = 0.0;
    f.constants_.linear_growth_c = 0.0;
    return f;
}

NonlinearSource NonlinearSource::linear() {
    NonlinearSource f;
    f.kind_ = GrowthKind::LinearGrowth;
    f.name_ = "linear";
    f.eval_ = [](double, double u) { return u; };
    f.coefficients_ = {0.0, 1.0};
    f.constants_.lipschitz_k = 1.0;
    f.constants_.linear_growth_c = 1.0;
    return f;
}

NonlinearSource NonlinearSource::bounded_ratio(std::function<double(double)> fn, double f_sup) {
    if (!(f_sup >= 0.0) || !std::isfinite(f_sup)) {
        throw ConfigError("bounded_ratio needs a finite bound on |f|");
    }
    NonlinearSource f;
    f.kind_ = GrowthKind::BoundedRatio;
    f.name_ = "bounded_ratio";
    if (fn) {
        f.eval_ = [fn = std::move(fn)](double t, double u) { return fn(t) * u / (1.0 + std::abs(u)); };
    } else {
        f.eval_ = [](double, double u) { return u / (1.0 + std::abs(u)); };
    }
    f.constants_.lipschitz_k = f_sup;
    f.constants_.linear_growth_c = f_sup;
    return f;
}

NonlinearSource NonlinearSource::polynomial(std::vector<double> coefficients, std::string name) {
    if (coefficients.empty()) {
        throw ConfigError("polynomial needs at least one coefficient");
    }
    for (double a : coefficients) {
        if (!std::isfinite(a)) {
            throw ConfigError("polynomial coefficients must be finite");
        }
    }
    while (coefficients.size() > 1 && coefficients.back() == 0.0) {
        coefficients.pop_back();
    }
    const int degree = static_cast<int>(coefficients.size()) - 1;

    NonlinearSource f;
    f.name_ = std::move(name);
    f.coefficients_ = coefficients;
    f.zero_ = degree == 0 && coefficients[0] == 0.0;
    f.eval_ = [c = std::move(coefficients)](double, double u) {
        double acc = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) {
            acc = acc * u + *it;
        }
        return acc;
    };

    const std::vector<double>& a = f.coefficients_;
    if (degree <= 1) {
        f.kind_ = GrowthKind::Lipschitz;
        f.constants_.lipschitz_k = degree == 1 ? std::abs(a[1]) : 0.0;
        if (a[0] == 0.0) {
            f.constants_.linear_growth_c = *f.constants_.lipschitz_k;
        }
        return f;
    }

    f.kind_ = GrowthKind::NemytskiiPolynomial;
    f.constants_.c1 = degree - 1;
    // |phi(u)| <= L1 (1 + |u| + |u|^l) and |phi'(u)| <= L1 (1 + 2|u|^(l-1)).
    double l1 = 0.0;
    for (int i = 0; i <= degree; ++i) {
        l1 += std::abs(a[static_cast<std::size_t>(i)]) * std::max(1, i);
    }
    f.constants_.l1 = l1;
    if (a[0] == 0.0) {
        f.constants_.sharp_c1 = 1.0;
        f.constants_.sharp_c2 = degree - 1;
        f.constants_.delta = 0.0;
    }
    return f;
}

NonlinearSource NonlinearSource::allen_cahn() {
    return polynomial({0.0, 1.0, 0.0, -1.0}, "allen_cahn");
}

NonlinearSource NonlinearSource::cubic() {
    return polynomial({0.0, 0.0, 0.0, -1.0}, "cubic");
}

NonlinearSource NonlinearSource::from_name(std::string_view name) {
    if (name == "zero") return zero();
    if (name == "linear") return linear();
    if (name == "bounded_ratio") return bounded_ratio();
    if (name == "allen_cahn") return allen_cahn();
    if (name == "cubic") return cubic();
    constexpr std::string_view prefix = "poly:";
    if (name.substr(0, prefix.size()) == prefix) {
        std::vector<double> coeffs;
        std::string_view rest = name.substr(prefix.size());
        while (true) {
            const std::size_t comma = rest.find(',');
            std::string_view item = rest.substr(0, comma);
            while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
            while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
            if (!item.empty() && item.front() == '+') item.remove_prefix(1);
            double value = 0.0;
            const auto res = std::from_chars(item.data(), item.data() + item.size(), value);
            if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size()) {
                throw ConfigError("bad polynomial coefficient '" + std::string(item) + "' in '" +
                                  std::string(name) + "'");
            }
            coeffs.push_back(value);
            if (comma == std::string_view::npos) {
                break;
            }
            rest.remove_prefix(comma + 1);
        }
        return polynomial(std::move(coeffs), std::string(name));
    }
    throw ConfigError("unknown nonlinearity '" + std::string(name) +
                      "' (known: zero, linear, bounded_ratio, allen_cahn, cubic, poly:a0,a1,...)");
}

void nemytskii_apply(const NonlinearSource& f, double t, const Vector& u, Vector& out) {
    out.resize(u.size());
    for (Eigen::Index k = 0; k < u.size(); ++k) {
        const double v = f(t, u(k));
        if (!std::isfinite(v)) {
            std::ostringstream msg;
            msg << "nonlinearity '" << f.name() << "' overflowed at node " << k << " (u=" << u(k)
                << ", t=" << t << ")";
            throw NumericalError(msg.str());
        }
        out(k) = v;
    }
}

StateVector nemytskii_apply(const NonlinearSource& f, double t, const StateVector& u) {
    StateVector out{u.mesh_id, Vector()};
    nemytskii_apply(f, t, u.values, out.values);
    return out;
}

namespace {

struct SampleNorms {
    double l2 = 0.0;
    double sup = 0.0;
};

constexpr int kMaxClass = 8;
constexpr double kBoundedFactor = 1.5;

// Growth and difference ratios for exponent c, restricted to samples with sup-norm <= radius.
double growth_ratio(const std::vector<SampleNorms>& w, const std::vector<SampleNorms>& fw, double c,
                    double radius) {
    double best = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i].sup > radius) continue;
        const double denom = 1.0 + w[i].l2 * (1.0 + std::pow(w[i].sup, c));
        best = std::max(best, fw[i].l2 / denom);
    }
    return best;
}

struct PairData {
    std::size_t i = 0;
    std::size_t j = 0;
    double diff_l2 = 0.0;
    double fdiff_l2 = 0.0;
};

double difference_ratio(const std::vector<SampleNorms>& w, const std::vector<PairData>& pairs,
                        double c, double radius) {
    double best = 0.0;
    for (const PairData& p : pairs) {
        if (w[p.i].sup > radius || w[p.j].sup > radius || p.diff_l2 == 0.0) continue;
        const double denom = p.diff_l2 * (1.0 + std::pow(w[p.i].sup, c) + std::pow(w[p.j].sup, c));
        best = std::max(best, p.fdiff_l2 / denom);
    }
    return best;
}

}  // namespace

GrowthReport verify_growth_bounds(const NonlinearSource& f, std::span<const Vector> samples,
                                  const SparseMatrix& mass, double t) {
    if (samples.empty()) {
        throw ConfigError("growth verification needs at least one sample");
    }
    GrowthReport report;
    const GrowthConstants& declared = f.constants();

    std::vector<SampleNorms> w(samples.size());
    std::vector<SampleNorms> fw(samples.size());
    std::vector<Vector> values(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Vector& s = samples[i];
        if (s.size() != mass.rows()) {
            throw ConfigError("growth sample does not match the mass matrix");
        }
        nemytskii_apply(f, t, s, values[i]);
        w[i] = {m_norm(mass, s), s.size() > 0 ? s.cwiseAbs().maxCoeff() : 0.0};
        fw[i] = {m_norm(mass, values[i]), 0.0};
    }

    std::vector<PairData> pairs;
    pairs.reserve(samples.size() * (samples.size() - 1) / 2);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t j = i + 1; j < samples.size(); ++j) {
            const Vector d = samples[i] - samples[j];
            pairs.push_back({i, j, m_norm(mass, d), m_norm(mass, Vector(values[i] - values[j]))});
        }
    }

    const double f0 = f(t, 0.0);
    report.zero_at_origin = f0 == 0.0;

    double lip = 0.0;
    for (const PairData& p : pairs) {
        if (p.diff_l2 > 0.0) lip = std::max(lip, p.fdiff_l2 / p.diff_l2);
    }
    report.lipschitz_ratio = lip;

    double lin = report.zero_at_origin ? 0.0 : std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i].l2 > 0.0) {
            lin = std::max(lin, fw[i].l2 / w[i].l2);
        } else if (fw[i].l2 > 0.0) {
            lin = std::numeric_limits<double>::infinity();
        }
    }
    report.linear_growth_ratio = lin;

    double radius = 0.0;
    for (const SampleNorms& s : w) radius = std::max(radius, s.sup);

    for (int c = 0; c <= kMaxClass && radius > 0.0; ++c) {
        const double g_full = growth_ratio(w, fw, c, radius);
        const double g_half = growth_ratio(w, fw, c, radius / 2.0);
        const double d_full = difference_ratio(w, pairs, c, radius);
        const double d_half = difference_ratio(w, pairs, c, radius / 2.0);
        const bool growth_ok = g_full <= kBoundedFactor * g_half || g_full == 0.0;
        const bool diff_ok = d_full <= kBoundedFactor * d_half || d_full == 0.0;
        if (growth_ok && diff_ok) {
            report.c1_class = c;
            break;
        }
    }

    const double tol = 1.0 + 1e-12;
    switch (f.kind()) {
    case GrowthKind::Lipschitz:
    case GrowthKind::BoundedRatio:
    case GrowthKind::LinearGrowth:
        report.c1 = 0.0;
        if (declared.lipschitz_k && lip > *declared.lipschitz_k * tol + 1e-300) {
            report.failures.push_back("sampled Lipschitz ratio exceeds the declared constant");
        }
        if (declared.linear_growth_c && lin > *declared.linear_growth_c * tol + 1e-300) {
            report.failures.push_back("sampled linear-growth ratio exceeds the declared constant");
        }
        break;
    case GrowthKind::NemytskiiPolynomial:
        report.c1 = declared.c1.value_or(0.0);
        if (!report.c1_class) {
            report.failures.push_back("no bounded growth class found up to exponent " +
                                      std::to_string(kMaxClass));
        } else if (*report.c1_class > report.c1) {
            report.failures.push_back("detected growth class " + std::to_string(*report.c1_class) +
                                      " exceeds the declared exponent");
        }
        if (declared.sharp_c1 && !report.zero_at_origin) {
            report.failures.push_back("sharp growth condition needs F(0) = 0");
        }
        break;
    }

    report.l1_growth = growth_ratio(w, fw, report.c1, radius);
    report.l1_difference = difference_ratio(w, pairs, report.c1, radius);
    report.l1 = std::max(report.l1_growth, report.l1_difference);
    if (!std::isfinite(report.l1)) {
        report.failures.push_back("growth constant is not finite on the samples");
    }
    report.passed = report.failures.empty();
    return report;
}

GrowthReport verify_growth_bounds(const NonlinearSource& f, std::span<const double> samples,
                                  double t) {
    std::vector<Vector> functions;
    functions.reserve(samples.size());
    for (double s : samples) {
        functions.push_back(Vector::Constant(1, s));
    }
    SparseMatrix unit(1, 1);
    unit.insert(0, 0) = 1.0;
    unit.makeCompressed();
    return verify_growth_bounds(f, std::span<const Vector>(functions), unit, t);
}

}  // namespace nafem
