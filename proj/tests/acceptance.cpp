// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "helars/dataset.hpp"
#include "helars/error.hpp"
#include "helars/report.hpp"
#include "helars/selection.hpp"
#include "helars/validation.hpp"

#ifndef HELARS_DATA_DIR
#error "HELARS_DATA_DIR must be defined"
#endif
#ifndef HELARS_CLI
#error "HELARS_CLI must be defined"
#endif

using namespace helars;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

int failures = 0;

void report(int id, const std::string& name, const std::function<void(Verdict&)>& body) {
    Verdict v;
    try {
        body(v);
    } catch (const std::exception& e) {
        v.pass = false;
        v.detail << " [exception: " << e.what() << "]";
    }
    if (!v.pass) ++failures;
    std::cout << (v.pass ? "PASS" : "FAIL") << " [" << id << "] " << name << ":" << v.detail.str()
              << std::endl;
}

double rel_error(const Matrix& got, const Matrix& want) {
    return (got - want).norm() / std::max(want.norm(), 1e-300);
}

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

Vector random_xi(std::mt19937_64& rng, Index n) {
    std::uniform_real_distribution<double> a(-3.0, 3.0), s(-5.0, -0.2);
    Vector xi(n + 1);
    for (Index i = 0; i < n; ++i) xi(i) = a(rng);
    xi(n) = s(rng);
    return xi;
}

Vector random_theta(std::mt19937_64& rng, Index d) {
    std::uniform_real_distribution<double> u(-0.6, 0.6), s(-1.5, -0.5);
    Vector theta(d + 2);
    for (Index j = 0; j <= d; ++j) theta(j) = u(rng);
    theta(d + 1) = s(rng);
    return theta;
}

// Every path produced in this run, for the structural criterion.
struct NamedPath {
    std::string label;
    SelectionPath path;
};
std::vector<NamedPath> all_paths;

struct Fitted {
    SelectionPath path;
    MleResult full;
};

Fitted run_dataset(const Dataset& raw, const std::string& model_name, const std::string& label,
                   const SelectionConfig& config = {}) {
    const auto model = make_model(model_name);
    const Dataset data = standardize(raw, model_name == "normal");
    const DesignBlock design(data.x, model->extra_stats());
    const Vector suff = model->sufficient_stat(data.y);
    const MleResult full = mle_full(*model, design, suff, config.mle);
    const MleResult null = mle_null(*model, design, suff, config.mle);
    Fitted out{run_helars(*model, design, full, null, config), full};
    all_paths.push_back({label, out.path});
    return out;
}

std::string order_string(const std::vector<Index>& order) {
    std::ostringstream out;
    out << "[";
    for (std::size_t k = 0; k < order.size(); ++k) out << (k ? "," : "") << order[k];
    out << "]";
    return out.str();
}

double sse(const Dataset& data, const std::vector<Index>& cols) {
    Matrix x(data.n(), static_cast<Index>(cols.size()) + 1);
    x.col(0).setOnes();
    for (std::size_t k = 0; k < cols.size(); ++k) x.col(static_cast<Index>(k) + 1) = data.x.col(cols[k]);
    const Vector beta = x.colPivHouseholderQr().solve(data.y);
    return (data.y - x * beta).squaredNorm();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(HELARS_CLI) + " " + args + " > /dev/null";
    return std::system(cmd.c_str());
}

}  // namespace

int main() {
    std::cout.precision(6);
    const Index n_obs = 10;

    report(1, "Transport accuracy", [&](Verdict& v) {
        TruncatedNormalModel m;
        std::mt19937_64 rng(101);
        Vector anchor = Vector::Zero(n_obs + 1);
        anchor(n_obs) = -1.0;
        const Vector l0 = m.init_aux(n_obs);
        const DerivativeField field = [&](const Vector& xi, const Vector& aux) {
            return m.pfaffian_xi(xi, aux);
        };
        double worst = 0.0;
        const auto start = Clock::now();
        for (int k = 0; k < 100; ++k) {
            const Vector target = random_xi(rng, n_obs);
            const Vector l = integrate_segment(field, anchor, l0, target);
            worst = std::max(worst, max_abs(l - m.oracle_aux(target)));
        }
        const double elapsed = seconds_since(start);
        v.detail << " max |L_HGM - L_erfc| = " << worst << ", runtime " << elapsed << " s";
        v.require(worst <= 1e-6, "accuracy 1e-6");
        v.require(elapsed < 2.0, "runtime < 2 s");
    });

    report(2, "Derivative consistency", [&](Verdict& v) {
        TruncatedNormalModel m;
        std::mt19937_64 rng(102);
        double worst_grad = 0.0, worst_hess = 0.0;
        for (int k = 0; k < 50; ++k) {
            const Vector xi = random_xi(rng, 3);
            const Vector aux = m.oracle_aux(xi);
            const Vector fd_g = validation::fd_grad(
                [&](const Vector& x) { return m.psi_star(x, m.oracle_aux(x)); }, xi);
            const Matrix fd_h = validation::fd_jacobian(
                [&](const Vector& x) { return m.grad_psi_star(x, m.oracle_aux(x)); }, xi);
            worst_grad = std::max(worst_grad, rel_error(m.grad_psi_star(xi, aux), fd_g));
            worst_hess = std::max(worst_hess, rel_error(m.hess_psi_star(xi, aux), fd_h));
        }
        v.detail << " grad rel err " << worst_grad << ", hess rel err " << worst_hess;
        v.require(worst_grad <= 1e-5 && worst_hess <= 1e-5, "relative error 1e-5");
    });

    report(3, "Roundtrips", [&](Verdict& v) {
        TruncatedNormalModel m;
        std::mt19937_64 rng(103);
        double mu_err = 0.0, mixed_err = 0.0, drift = 0.0;
        for (int k = 0; k < 50; ++k) {
            const Vector xi = random_xi(rng, 5);
            const Vector aux = m.oracle_aux(xi);
            mu_err = std::max(mu_err, max_abs(m.xi_from_mu(m.mu_from_xi(xi, aux), aux) - xi));
        }
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        Matrix x(20, 3);
        for (Index i = 0; i < x.size(); ++i) x(i) = unit(rng);
        const DesignBlock design(x, 1);
        for (int k = 0; k < 50; ++k) {
            const Vector theta = random_theta(rng, 3);
            Mask mask(5);
            for (auto&& bit : mask) bit = std::bernoulli_distribution(0.5)(rng);
            const Vector aux = m.oracle_aux(design.xi(theta));
            const MixedPoint rho = to_mixed(theta, theta_to_eta(m, design, theta, aux), mask);
            Vector guess = theta;
            for (Index j = 0; j < 4; ++j) guess(j) += 0.2 * unit(rng);
            mixed_err = std::max(mixed_err, max_abs(mixed_to_full(m, design, rho, aux, guess).theta - theta));
        }
        for (int k = 0; k < 50; ++k) {
            const Vector a = random_theta(rng, 3);
            const Vector b = random_theta(rng, 3);
            const Vector la = m.oracle_aux(design.xi(a));
            const Vector lb = transport_theta(m, design, a, la, b);
            drift = std::max(drift, max_abs(transport_theta(m, design, b, lb, a) - la));
        }
        v.detail << " mu roundtrip " << mu_err << ", mixed roundtrip " << mixed_err
                 << ", transport drift " << drift;
        v.require(mu_err <= 1e-10, "mu roundtrip 1e-10");
        v.require(mixed_err <= 1e-6, "mixed roundtrip 1e-6");
        v.require(drift <= 1e-7, "transport drift 1e-7");
    });

    report(4, "Geometry axioms", [&](Verdict& v) {
        TruncatedNormalModel m;
        std::mt19937_64 rng(104);
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        Matrix x(20, 3);
        for (Index i = 0; i < x.size(); ++i) x(i) = unit(rng);
        const DesignBlock design(x, 1);
        const IndexSet all = IndexSet::all(3);
        double self = 0.0, min_pos = std::numeric_limits<double>::infinity();
        for (int k = 0; k < 50; ++k) {
            const Vector tp = random_theta(rng, 3);
            const Vector tq = random_theta(rng, 3);
            const ModelPoint p{tp, m.oracle_aux(design.xi(tp))};
            const ModelPoint q{tq, m.oracle_aux(design.xi(tq))};
            self = std::max(self, std::abs(divergence(m, design, p, p, all)));
            min_pos = std::min(min_pos, divergence(m, design, p, q, all));
        }

        double brute_gap = 0.0;
        for (Index n = 1; n <= 3; ++n) {
            Matrix xs(n, n > 1 ? 1 : 0);
            for (Index i = 0; i < xs.size(); ++i) xs(i) = unit(rng);
            const DesignBlock small(xs, 1);
            for (int k = 0; k < 5; ++k) {
                const Vector tp = random_theta(rng, xs.cols());
                const Vector tq = random_theta(rng, xs.cols());
                const ModelPoint p{tp, m.oracle_aux(small.xi(tp))};
                const ModelPoint q{tq, m.oracle_aux(small.xi(tq))};
                const auto brute = validation::brute_divergence(small.xi(tp), small.xi(tq));
                const double d = divergence(m, small, p, q, IndexSet::all(xs.cols()));
                brute_gap = std::max(brute_gap, std::abs(d - brute.value));
            }
        }

        // Orthogonality of the m-geodesic to the target e-flat submanifold.
        double ortho = 0.0;
        for (int k = 0; k < 10; ++k) {
            const Vector tp = random_theta(rng, 3);
            const ModelPoint p{tp, m.oracle_aux(design.xi(tp))};
            const Index i = 1 + k % 3;
            const ModelPoint bar = m_project(m, design, p, i, 0.25 * tp(i), all);
            const Vector mu_p = m.mu_from_xi(design.xi(p.theta), p.aux);
            const Vector mu_bar = m.mu_from_xi(design.xi(bar.theta), bar.aux);
            for (int t = 0; t < 5; ++t) {
                Vector q = bar.theta;
                for (Index j = 0; j < q.size(); ++j) {
                    if (j != i) q(j) += 0.2 * unit(rng);
                }
                q(4) = std::min(q(4), -0.2);
                ortho = std::max(ortho, std::abs((mu_p - mu_bar).dot(design.xi(q) - design.xi(bar.theta))));
            }
        }
        v.detail << " max D(p,p) " << self << ", min D(p,q) " << min_pos << ", brute gap "
                 << brute_gap << ", orthogonality residual " << ortho;
        v.require(self <= 1e-10, "D(p,p) = 0");
        v.require(min_pos > 0.0, "D(p,q) > 0");
        v.require(brute_gap <= 1e-6, "brute divergence 1e-6");
        v.require(ortho <= 1e-6, "orthogonality 1e-6");
    });

    report(5, "MLE correctness", [&](Verdict& v) {
        SimulationSpec spec;
        spec.n = 150;
        spec.seed = 105;
        const Dataset data = standardize(simulate(spec), false);
        const DesignBlock design(data.x, 1);
        double eta_gap = 0.0;
        for (const char* name : {"truncnorm", "normal"}) {
            const auto model = make_model(name);
            const Vector suff = model->sufficient_stat(data.y);
            const MleResult fit = mle_full(*model, design, suff);
            eta_gap = std::max(eta_gap, max_abs(theta_to_eta(*model, design, fit.theta, fit.aux) -
                                                design.pull_back(suff)));
        }

        NormalModel normal;
        const MleResult fit = mle_full(normal, design, normal.sufficient_stat(data.y));
        const Vector beta = design.x_tilde().colPivHouseholderQr().solve(data.y);
        const double sigma2 = (data.y - design.x_tilde() * beta).squaredNorm() / data.n();
        Vector oracle(fit.theta.size());
        oracle.head(beta.size()) = beta / sigma2;
        oracle(beta.size()) = -1.0 / (2.0 * sigma2);
        const double normal_gap = max_abs(fit.theta - oracle);

        // Intercept-only truncnorm fit on y = (0.5, 1.5) against quadrature
        // moment matching solved by nested bisection.
        TruncatedNormalModel trunc;
        Vector y(2);
        y << 0.5, 1.5;
        Matrix x(2, 1);
        x << 0.0, 1.0;
        const DesignBlock tiny(x, 1);
        const MleResult null = mle_null(trunc, tiny, trunc.sufficient_stat(y));
        auto moments = [](double a, double b) {
            const double z = validation::quad_A(a, b).value;
            return std::pair{validation::quad_moment(1, a, b).value / z,
                             validation::quad_moment(2, a, b).value / z};
        };
        auto xi1_for = [&](double xi2) {
            double lo = -50.0, hi = 50.0;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                (moments(mid, xi2).first < 1.0 ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        };
        double lo = -50.0, hi = -1e-3;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            (moments(xi1_for(mid), mid).second < 1.25 ? lo : hi) = mid;
        }
        const double xi2 = 0.5 * (lo + hi);
        const double quad_gap =
            std::max(std::abs(null.theta(0) - xi1_for(xi2)), std::abs(null.theta(2) - xi2));

        v.detail << " eta gap " << eta_gap << ", normal vs least squares " << normal_gap
                 << ", intercept-only vs quadrature " << quad_gap;
        v.require(eta_gap <= 1e-6, "moment matching 1e-6");
        v.require(normal_gap <= 1e-8, "normal equations 1e-8");
        v.require(quad_gap <= 1e-6, "quadrature oracle 1e-6");
    });

    report(6, "Differential test (--oracle vs holonomic transport)", [&](Verdict& v) {
        const fs::path dir = fs::temp_directory_path() / "helars_acceptance_diff";
        fs::remove_all(dir);
        const std::string d = dir.string();
        v.require(run_cli("simulate --seed 106 --n 200 --d 3 --out " + d) == 0, "simulate");
        const std::string input = (dir / "simulated.csv").string();
        v.require(run_cli("path --input " + input + " --out " + d + "/hgm") == 0, "holonomic run");
        v.require(run_cli("path --oracle --input " + input + " --out " + d + "/oracle") == 0,
                  "oracle run");
        std::ifstream a(dir / "hgm" / "path.csv");
        std::ifstream b(dir / "oracle" / "path.csv");
        const SelectionPath pa = read_path_csv(a);
        const SelectionPath pb = read_path_csv(b);
        double gap = 0.0;
        for (std::size_t k = 0; k < std::min(pa.steps.size(), pb.steps.size()); ++k) {
            gap = std::max(gap, max_abs(pa.steps[k].theta - pb.steps[k].theta));
        }
        all_paths.push_back({"differential holonomic", pa});
        all_paths.push_back({"differential oracle", pb});
        v.detail << " orders " << order_string(pa.removal_order) << " vs "
                 << order_string(pb.removal_order) << ", max theta gap " << gap;
        v.require(pa.steps.size() == 4 && pb.steps.size() == 4, "4 steps each");
        v.require(pa.removal_order == pb.removal_order, "identical removal orders");
        v.require(gap <= 1e-4, "theta within 1e-4");
    });

    report(7, "Diabetes reproduction", [&](Verdict& v) {
        const Dataset raw = ingest_file(std::string(HELARS_DATA_DIR) + "/diabetes.data", "Y", true);
        const auto start = Clock::now();
        const Fitted trunc = run_dataset(raw, "truncnorm", "diabetes truncnorm");
        const double t_trunc = seconds_since(start);
        const auto start_n = Clock::now();
        const Fitted normal = run_dataset(raw, "normal", "diabetes normal");
        const double t_normal = seconds_since(start_n);
        const std::vector<Index> want_trunc{1, 7, 8, 10, 6, 2, 4, 5, 3, 9};
        const std::vector<Index> want_normal{1, 7, 10, 8, 6, 2, 4, 5, 3, 9};
        v.detail << " truncnorm " << order_string(trunc.path.removal_order) << " in " << t_trunc
                 << " s, normal " << order_string(normal.path.removal_order) << " in " << t_normal
                 << " s";
        v.require(trunc.path.removal_order == want_trunc, "truncnorm order");
        v.require(normal.path.removal_order == want_normal, "normal order");
        v.require(t_trunc + t_normal <= 300.0, "runtime 5 min");
    });


    report(9, "Qualitative simulation claims (seed 2020, n = 1000)", [&](Verdict& v) {
        SimulationSpec spec;
        spec.n = 1000;
        spec.seed = 2020;
        spec.correlated = true;
        const Dataset correlated = simulate(spec);
        const Fitted c = run_dataset(correlated, "truncnorm", "simulation correlated");
        spec.correlated = false;
        const Dataset uncorrelated = simulate(spec);
        const Fitted u = run_dataset(uncorrelated, "truncnorm", "simulation uncorrelated");

        Index smallest = 1;
        for (Index j = 2; j <= 3; ++j) {
            if (std::abs(u.full.theta(j)) < std::abs(u.full.theta(smallest))) smallest = j;
        }
        const double sse13 = sse(correlated, {0, 2});
        const double sse23 = sse(correlated, {1, 2});
        v.detail << " correlated order " << order_string(c.path.removal_order)
                 << ", uncorrelated order " << order_string(u.path.removal_order)
                 << " (smallest |MLE| at X" << smallest << ": " << u.full.theta(1) << ", "
                 << u.full.theta(2) << ", " << u.full.theta(3) << "), SSE{X1,X3} = " << sse13
                 << ", SSE{X2,X3} = " << sse23;
        v.require(c.path.removal_order.front() == 2, "X2 eliminated first (correlated)");
        v.require(u.path.removal_order.front() == smallest,
                  "first eliminated has smallest |MLE| (uncorrelated)");
        v.require(sse13 < sse23, "SSE{X1,X3} < SSE{X2,X3}");
    });

    report(10, "Scale invariance (10 seeded trials)", [&](Verdict& v) {
        int mismatches = 0;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            SimulationSpec spec;
            spec.n = 200;
            spec.seed = 1000 + seed;
            spec.correlated = seed % 2 == 0;
            const Dataset base = simulate(spec);
            Dataset scaled = base;
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> factor(0.01, 100.0);
            for (Index j = 0; j < scaled.d(); ++j) scaled.x.col(j) *= factor(rng);
            const auto a = run_dataset(base, "truncnorm", "scale base " + std::to_string(seed));
            const auto b = run_dataset(scaled, "truncnorm", "scale scaled " + std::to_string(seed));
            if (a.path.removal_order != b.path.removal_order) ++mismatches;
        }
        v.detail << " " << mismatches << " of 10 trials changed the removal order";
        v.require(mismatches == 0, "orders unchanged");
    });

    report(8, "Path structure", [&](Verdict& v) {
        int bad = 0;
        for (const auto& [label, path] : all_paths) {
            const Index d = static_cast<Index>(path.steps.size()) - 1;
            bool ok = !path.steps.empty() && path.steps.front().divergence_ratio == 1.0 &&
                      path.steps.back().divergence_ratio == 0.0;
            for (std::size_t k = 1; ok && k < path.steps.size(); ++k) {
                ok = path.steps[k].divergence_ratio < path.steps[k - 1].divergence_ratio;
                Index zeros = 0;
                for (Index j = 1; j <= d; ++j) {
                    const bool was_zero = path.steps[k - 1].theta(j) == 0.0;
                    const bool is_zero = path.steps[k].theta(j) == 0.0;
                    if (was_zero && !is_zero) ok = false;
                    zeros += is_zero;
                }
                if (zeros != static_cast<Index>(k)) ok = false;
            }
            if (!ok) {
                ++bad;
                v.detail << " " << label << " violates the invariants;";
            }
        }
        v.detail << " checked " << all_paths.size() << " paths";
        v.require(bad == 0, "every path");
    });

    std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " criteria failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
