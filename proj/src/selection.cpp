#include "helars/selection.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "helars/error.hpp"

namespace helars {

namespace {

// Rejection band for the empirical monotonicity check, relative to t*.
constexpr double kMonotoneSlack = 1e-6;

std::string step_context(Index k, Index i) {
    std::ostringstream out;
    out << "step " << k << ", covariate " << i << ": ";
    return out.str();
}

template <typename Fn>
auto with_context(Index k, Index i, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        throw Error(e.kind(), step_context(k, i) + e.what());
    }
}

ModelPoint wrap_up(const Model& model, const DesignBlock& design, const ModelPoint& current,
                   const Vector& next_theta, const Vector& eta_null,
                   const SelectionConfig& config) {
    Mask mask(static_cast<std::size_t>(design.dim()), false);
    mask[0] = true;
    for (Index j = design.d() + 1; j < design.dim(); ++j) mask[static_cast<std::size_t>(j)] = true;

    const Vector eta = theta_to_eta(model, design, current.theta, current.aux);
    const MixedPoint rho_old = to_mixed(current.theta, eta, mask);
    const MixedPoint rho_new = to_mixed(next_theta, eta_null, mask);

    ModelPoint out;
    out.aux = transport_mixed(model, design, rho_old, current.aux, rho_new, current.theta,
                              config.transport, config.newton);
    out.theta = config.transport.closed_form
                    ? mixed_to_full_closed_form(model, design, rho_new, current.theta,
                                                config.newton)
                          .theta
                    : mixed_to_full(model, design, rho_new, out.aux, current.theta, config.newton)
                          .theta;
    return out;
}

}  // namespace

void SelectionConfig::validate() const {
    if (!(bisection_tol > 0.0) || bisection_max < 1) {
        fail(ErrorKind::InvalidArgument, "selection needs bisection_tol > 0 and bisection_max >= 1");
    }
    transport.validate();
}

double find_component_alpha(const Model& model, const DesignBlock& design,
                            const ModelPoint& current, double t_star, Index i,
                            const IndexSet& active, double divergence_at_zero,
                            const SelectionConfig& config) {
    const double target = current.theta(i);
    const double slack = kMonotoneSlack * std::max(t_star, 1e-12);
    if (divergence_at_zero < t_star - slack) {
        std::ostringstream msg;
        msg << "divergence at alpha = 0 (" << divergence_at_zero << ") is below t* (" << t_star
            << ")";
        fail(ErrorKind::BracketingFailure, msg.str());
    }

    // Visited (distance from theta^i, divergence); divergence must not
    // decrease as alpha moves away from theta^i.
    std::vector<std::pair<double, double>> visited{{0.0, 0.0},
                                                   {std::abs(target), divergence_at_zero}};
    double toward_zero = 0.0;
    double toward_current = target;
    for (int it = 0; it < config.bisection_max; ++it) {
        const double mid = 0.5 * (toward_zero + toward_current);
        const ModelPoint proj =
            m_project(model, design, current, i, mid, active, config.transport, config.newton);
        const double div = divergence(model, design, current, proj, active);

        const double dist = std::abs(mid - target);
        for (const auto& [other_dist, other_div] : visited) {
            const bool closer = dist < other_dist;
            if ((closer && div > other_div + slack) || (!closer && div < other_div - slack)) {
                std::ostringstream msg;
                msg << "divergence is not monotone along the m-geodesic near alpha = " << mid;
                fail(ErrorKind::NonMonotoneDivergence, msg.str());
            }
        }
        visited.emplace_back(dist, div);

        if (std::abs(div - t_star) <= config.bisection_tol * t_star) return mid;
        if (div < t_star) {
            toward_current = mid;
        } else {
            toward_zero = mid;
        }
    }
    return 0.5 * (toward_zero + toward_current);
}

SelectionPath run_helars(const Model& model, const DesignBlock& design, const MleResult& full,
                         const MleResult& null, const SelectionConfig& config) {
    config.validate();
    const Index d = design.d();
    IndexSet active = IndexSet::all(d);
    const ModelPoint null_point = null.point();
    const Vector eta_null = theta_to_eta(model, design, null.theta, null.aux);

    ModelPoint current = full.point();
    const double max_div = divergence(model, design, current, null_point, active);
    if (!(max_div > 0.0)) {
        fail(ErrorKind::DegenerateMoments, "full and intercept-only fits coincide");
    }

    SelectionPath path;
    path.steps.push_back({0, current.theta, current.aux, 1.0});

    for (Index k = 0; k < d; ++k) {
        const std::vector<Index> live = active.indices();
        std::vector<double> divs;
        divs.reserve(live.size());
        for (Index i : live) {
            divs.push_back(with_context(k, i, [&] {
                const ModelPoint proj = m_project(model, design, current, i, 0.0, active,
                                                  config.transport, config.newton);
                return divergence(model, design, current, proj, active);
            }));
        }
        std::size_t best = 0;
        for (std::size_t a = 1; a < divs.size(); ++a) {
            if (divs[a] < divs[best]) best = a;
        }
        const Index i_star = live[best];
        const double t_star = divs[best];

        ModelPoint next;
        if (k + 1 == d) {
            next = null_point;
        } else {
            Vector next_theta = current.theta;
            for (std::size_t a = 0; a < live.size(); ++a) {
                const Index i = live[a];
                if (i == i_star) continue;
                next_theta(i) = with_context(k, i, [&] {
                    return find_component_alpha(model, design, current, t_star, i, active,
                                                divs[a], config);
                });
            }
            next_theta(i_star) = 0.0;
            next = with_context(k, i_star, [&] {
                return wrap_up(model, design, current, next_theta, eta_null, config);
            });
        }
        active.erase(i_star);

        const double ratio = with_context(k + 1, i_star, [&] {
            return divergence(model, design, next, null_point, active) / max_div;
        });
        path.steps.push_back({k + 1, next.theta, next.aux, ratio});
        path.removal_order.push_back(i_star);
        current = std::move(next);
    }
    return path;
}

SelectionPath run_helars(const Model& model, const DesignBlock& design, const Vector& suff_stat,
                         const SelectionConfig& config) {
    const MleResult full = mle_full(model, design, suff_stat, config.mle);
    const MleResult null = mle_null(model, design, suff_stat, config.mle);
    return run_helars(model, design, full, null, config);
}

std::vector<Index> covariate_order(const SelectionPath& path) {
    std::vector<Index> order;
    for (std::size_t k = 1; k < path.steps.size(); ++k) {
        const Vector& before = path.steps[k - 1].theta;
        const Vector& after = path.steps[k].theta;
        const Index d = static_cast<Index>(path.steps.size()) - 1;
        for (Index j = 1; j <= d; ++j) {
            if (after(j) == 0.0 && before(j) != 0.0) order.push_back(j);
        }
    }
    return order;
}

}  // namespace helars
