#include "dpplab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dpplab/numerics.hpp"
#include "dpplab/samplers.hpp"

namespace dpplab {
namespace {

constexpr double kPi = 3.14159265358979323846;

constexpr uint64_t kStreamE1 = 0x100000;
constexpr uint64_t kStreamE2 = 0x200000;
constexpr uint64_t kStreamE3 = 0x300000;

struct QuadGrid {
    std::vector<Point> nodes;
    double cell_area = 0.0;
};

QuadGrid midpoint_nodes(const Region& W, int grid) {
    if (grid < 1) throw std::invalid_argument("quadrature grid must be positive");
    const Box bb = bounding_box(W);
    const double hx = (bb.x1 - bb.x0) / grid;
    const double hy = (bb.y1 - bb.y0) / grid;
    QuadGrid out;
    out.cell_area = hx * hy;
    for (int iy = 0; iy < grid; ++iy) {
        for (int ix = 0; ix < grid; ++ix) {
            const Point p{bb.x0 + (ix + 0.5) * hx, bb.y0 + (iy + 0.5) * hy};
            if (contains(W, p)) out.nodes.push_back(p);
        }
    }
    if (out.nodes.empty()) throw std::runtime_error("quadrature grid misses the window");
    return out;
}

// Conservative: true only if inner is certainly contained in outer.
bool region_subset(const Region& inner, const Region& outer) {
    if (const auto* di = std::get_if<Disk>(&inner)) {
        if (const auto* douter = std::get_if<Disk>(&outer))
            return dist(di->center, douter->center) + di->radius <= douter->radius + 1e-12;
    }
    if (std::holds_alternative<Annulus>(outer)) return false;  // not convex
    const Box bb = bounding_box(inner);
    const Point probes[4] = {{bb.x0, bb.y0}, {bb.x0, bb.y1}, {bb.x1, bb.y0}, {bb.x1, bb.y1}};
    for (const auto& p : probes) {
        if (!contains(outer, p)) return false;
    }
    return true;
}

PointPattern with_atoms(const PointPattern& base, std::initializer_list<Point> atoms) {
    PointPattern out = base;
    for (const auto& a : atoms) out.points.push_back(a);
    return out;
}

void monotone_spot_check(const ScoreFunction& g, const Point& x, const PointPattern& omega,
                         double offset) {
    const int before = g.score(x, omega);
    const int after = g.score(x, with_atoms(omega, {Point{x.x + offset, x.y}}));
    const bool ok = g.direction == ScoreFunction::Direction::decreasing ? after <= before
                                                                        : after >= before;
    if (!ok) {
        std::ostringstream msg;
        msg << "score violates declared "
            << (g.direction == ScoreFunction::Direction::decreasing ? "decreasing" : "increasing")
            << " monotonicity at (" << x.x << ", " << x.y << ")";
        throw contract_violation(msg.str());
    }
}

std::string fmt17(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace

VoidProbability void_probability(double r) {
    if (r < 0) throw std::invalid_argument("void_probability: r < 0");
    VoidProbability out;
    if (r == 0) return out;
    const double x = r * r;
    long I = static_cast<long>(std::ceil(x)) + 10;
    // Tail control: |sum_{i>I} ln Q(i,x)| <= 2 sum_{i>I} (1-Q(i,x)) once Q(I,x) >= 1/2.
    while (poisson_mean_excess(I, x) >= 0.5e-12 || regularized_upper_gamma(I, x) < 0.5)
        I += std::max<long>(8, I / 4);
    double sum = 0.0, comp = 0.0;
    for (long i = 1; i <= I; ++i) {
        const double y = log_regularized_upper_gamma(i, x) - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    const double tail = 2.0 * poisson_mean_excess(I, x);
    const double fp = 1e-12 * static_cast<double>(I) + 1e-15;
    out.log_value = sum;
    out.value = std::exp(sum);
    out.bracket.lower = std::exp(sum - tail - fp);
    out.bracket.upper = std::exp(sum + fp);
    return out;
}

double log_palm_void_probability(double v) {
    if (v < 0) throw std::invalid_argument("palm_void_probability: v < 0");
    const double lv = v * v + void_probability(v).log_value;
    if (lv > 1e-9)
        throw std::runtime_error("palm_void_probability: value exceeds 1, internal inconsistency");
    return std::min(lv, 0.0);
}

double palm_void_probability(double v) { return std::exp(log_palm_void_probability(v)); }

VnSolution solve_vn(double n, double tau) {
    if (!(n > 1) || !(tau > 0)) throw std::invalid_argument("solve_vn: need n > 1, tau > 0");
    const double t = tau / (n * n);
    if (t >= 1) throw invalid_regime("solve_vn: tau/n^2 >= 1 has no solution");
    double lo = 0.0;
    double hi = 2.0 * std::pow(std::log(n), 0.25) + 2.0;
    while (palm_void_probability(hi) > t) {
        lo = hi;
        hi *= 1.5;
        if (hi > 1e4) throw std::runtime_error("solve_vn: bracket growth failed");
    }
    const double rtol = 1e-10 * t;
    double best_v = hi, best_f = palm_void_probability(hi) - t;
    for (int it = 0; it < 300 && std::abs(best_f) > rtol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = palm_void_probability(mid) - t;
        if (std::abs(fm) < std::abs(best_f)) {
            best_v = mid;
            best_f = fm;
        }
        (fm > 0 ? lo : hi) = mid;
        if (lo == hi) break;
    }
    if (std::abs(best_f) > rtol)
        throw std::runtime_error("solve_vn: residual tolerance not reached");
    VnSolution sol;
    sol.n = n;
    sol.tau = tau;
    sol.v_n = best_v;
    sol.residual = best_f;
    sol.asymptotic_ratio = std::pow(best_v, 4) / (4.0 * std::log(n));
    return sol;
}

double chernoff_gamma_tail(long k, double r2) {
    if (k < 1 || !(r2 > 0)) throw std::invalid_argument("chernoff_gamma_tail: need k >= 1, r2 > 0");
    const double kd = static_cast<double>(k);
    if (kd >= r2) return 1.0;
    return std::exp(-r2 + kd - kd * std::log(kd / r2));
}

FewPointsBound few_points_log_bound(double v) {
    if (!(v * v >= 4.0)) throw invalid_regime("few_points_log_bound: requires v^2 >= 4");
    const double v2 = v * v;
    double sum = 4.0 * std::log(v);
    const long kmax = static_cast<long>(std::floor(v2));
    for (long k = 3; k <= kmax; ++k) {
        const double kd = static_cast<double>(k);
        sum += -v2 + kd - kd * std::log(kd / v2);
    }
    FewPointsBound out;
    out.log_bound = sum;
    out.proxy = -std::pow(v, 4) / 4.0;
    return out;
}

double theorem2_rate(double n, double epsilon, double C, bool* vacuous) {
    if (!(n > 1) || !(C > 0) || !(epsilon > 0))
        throw std::invalid_argument("theorem2_rate: need n > 1, C > 0, epsilon > 0");
    if (vacuous) *vacuous = epsilon >= 1.0 / 16.0;
    return C * std::exp((epsilon - 1.0 / 16.0) * std::log(n));
}

std::vector<WitnessStat> default_witness_family(const Region& window) {
    const auto [center, R] = std::visit(
        [](const auto& w) -> std::pair<Point, double> {
            using T = std::decay_t<decltype(w)>;
            if constexpr (std::is_same_v<T, Disk>) return {w.center, w.radius};
            else if constexpr (std::is_same_v<T, Annulus>) return {w.center, w.r_outer};
            else
                return {Point{0.5 * (w.x0 + w.x1), 0.5 * (w.y0 + w.y1)},
                        0.5 * std::min(w.x1 - w.x0, w.y1 - w.y0)};
        },
        window);
    std::vector<WitnessStat> fam;
    auto count_in = [](const Region& reg) {
        return [reg](const PointPattern& p) {
            double c = 0;
            for (const auto& q : p.points)
                if (contains(reg, q)) c += 1.0;
            return c;
        };
    };
    double r = R;
    for (int j = 0; j < 4; ++j, r *= 0.5) {
        std::ostringstream name;
        name << "count_disk_r" << fmt17(r);
        fam.push_back({name.str(), count_in(Disk{center, r})});
        if (j > 0) {
            std::ostringstream aname;
            aname << "count_annulus_r" << fmt17(r) << "_" << fmt17(2 * r);
            fam.push_back({aname.str(), count_in(Annulus{center, r, 2 * r})});
        }
    }
    for (int k = 1; k <= 3; ++k) {
        std::ostringstream name;
        name << "min_count_" << k;
        const Disk full{center, R};
        fam.push_back({name.str(), [full, k](const PointPattern& p) {
                           long c = 0;
                           for (const auto& q : p.points)
                               if (contains(Region{full}, q)) ++c;
                           return static_cast<double>(std::min<long>(c, k));
                       }});
    }
    return fam;
}

KrEstimate kr_witness(const SampleBatch& A, const SampleBatch& B,
                      const std::vector<WitnessStat>& tests) {
    if (!same_region(A.window, B.window))
        throw std::invalid_argument("kr_witness: mismatched windows");
    if (A.patterns.size() < 2 || B.patterns.size() < 2)
        throw std::invalid_argument("kr_witness: need at least 2 replicates per batch");
    KrEstimate best;
    double best_cand = -1e300;
    for (const auto& t : tests) {
        auto moments = [&](const SampleBatch& batch) {
            double mean = 0.0;
            for (const auto& p : batch.patterns) mean += t.fn(p);
            mean /= static_cast<double>(batch.patterns.size());
            double var = 0.0;
            for (const auto& p : batch.patterns) {
                const double d = t.fn(p) - mean;
                var += d * d;
            }
            var /= static_cast<double>(batch.patterns.size() - 1);
            return std::pair<double, double>{mean, var / static_cast<double>(batch.patterns.size())};
        };
        const auto [ma, va] = moments(A);
        const auto [mb, vb] = moments(B);
        const double se = std::sqrt(va + vb);
        const double cand = std::abs(ma - mb) - 2.0 * se;
        if (cand > best_cand) {
            best_cand = cand;
            best.se = se;
            best.best_witness = t.name;
        }
    }
    best.lower_bound = std::max(0.0, best_cand);
    return best;
}

BoundReport theorem_bound(const KernelSpec& K, const ScoreFunction& g, const Region& W,
                          const Disk& S, const Disk& T, std::optional<double> target_intensity,
                          uint64_t seed, const TheoremOptions& opt) {
    const auto* dW = std::get_if<Disk>(&W);
    if (!dW) throw std::invalid_argument("theorem_bound: window must be a disk");
    if (std::hypot(S.center.x, S.center.y) > 1e-12 || std::hypot(T.center.x, T.center.y) > 1e-12)
        throw std::invalid_argument("theorem_bound: S and T must be centered at the origin");
    if (!(S.radius > 0) || S.radius > T.radius)
        throw std::invalid_argument("theorem_bound: need o in S and S subset T");
    if (!K.stationary)
        throw std::invalid_argument("theorem_bound: sampled terms require a stationary kernel");

    BoundReport rep;
    rep.c_constant = opt.c_constant;
    rep.seed = seed;
    rep.replicates = opt.inner_replicates;
    rep.quad_grid = opt.quad_grid;
    rep.window_radius = dW->radius;
    rep.S_radius = S.radius;
    rep.T_radius = T.radius;

    const double rho = K.rho;
    const double area_w = area(W);
    const double probe = g.nn_ball_radius   ? *g.nn_ball_radius
                         : g.deterministic_radius ? *g.deterministic_radius
                                                  : S.radius;
    const long R = opt.inner_replicates;

    // E1: P(S(x, xi^x) not subset of S_x). Exact for deterministic stopping sets.
    if (g.deterministic_radius) {
        rep.E1.value = *g.deterministic_radius <= S.radius + 1e-12 ? 0.0 : rho * area_w;
        rep.E1.se = 0.0;
    } else {
        const QuadGrid qg = midpoint_nodes(W, opt.quad_grid);
        const double pw = S.radius + opt.palm_margin;
        const SpectralBasis pb =
            palm_basis(K, {Point{0, 0}}, Disk{{0, 0}, pw}, opt.palm_grid_n, opt.palm_tail_tol);
        auto node_est = run_replicated<double>(
            qg.nodes.size(), seed, kStreamE1, [&](std::size_t i, RngStream& rng) {
                const Point x = qg.nodes[i];
                long bad = 0;
                for (long rep_i = 0; rep_i < R; ++rep_i) {
                    PointPattern omega = sample_dpp(pb, rng);
                    for (auto& p : omega.points) {  // translate the origin draw to x
                        p.x += x.x;
                        p.y += x.y;
                    }
                    omega.window = Disk{x, pw};
                    const Region reg = g.stabilization_region(x, with_atoms(omega, {x}));
                    if (!region_subset(reg, Region{Disk{x, S.radius}})) ++bad;
                }
                return static_cast<double>(bad) / static_cast<double>(R);
            });
        double acc = 0.0, var = 0.0;
        for (const double p : node_est) {
            acc += p;
            var += p * (1.0 - p) / static_cast<double>(R);
        }
        rep.E1.value = rho * qg.cell_area * acc;
        rep.E1.se = rho * qg.cell_area * std::sqrt(var);
    }

    // Shared Palm sampling at the origin (translation invariance of the law)
    // for E2, the intensity of the thinned process, and the dTV term.
    const QuadGrid qg = midpoint_nodes(W, opt.quad_grid);
    const QuadGrid qg_fine = midpoint_nodes(W, 2 * opt.quad_grid);
    const std::size_t NN = qg.nodes.size();
    const double pw = probe + opt.palm_margin;
    const bool det_inside =
        g.deterministic_radius && *g.deterministic_radius <= S.radius + 1e-12;
    const SpectralBasis pb =
        palm_basis(K, {Point{0, 0}}, Disk{{0, 0}, pw}, opt.palm_grid_n, opt.palm_tail_tol);

    struct NodeEst {
        double p_tilde = 0.0;
        double p_raw = 0.0;
    };
    const Point origin{0, 0};
    auto ests = run_replicated<NodeEst>(NN, seed, kStreamE2, [&](std::size_t, RngStream& rng) {
        long n_tilde = 0, n_raw = 0;
        for (long rep_i = 0; rep_i < R; ++rep_i) {
            const PointPattern omega = sample_dpp(pb, rng);
            const PointPattern omega_o = with_atoms(omega, {origin});
            if (rep_i % 256 == 0) monotone_spot_check(g, origin, omega_o, 0.5 * probe);
            const int s = g.score(origin, omega_o);
            n_raw += s;
            if (!s) continue;
            const bool trunc_ok =
                g.deterministic_radius
                    ? det_inside
                    : region_subset(g.stabilization_region(origin, omega_o),
                                    Region{Disk{origin, S.radius}});
            if (trunc_ok) ++n_tilde;
        }
        NodeEst e;
        e.p_tilde = static_cast<double>(n_tilde) / static_cast<double>(R);
        e.p_raw = static_cast<double>(n_raw) / static_cast<double>(R);
        return e;
    });
    double p_bar = 0.0, p_raw_bar = 0.0;
    for (const auto& e : ests) {
        p_bar += e.p_tilde;
        p_raw_bar += e.p_raw;
    }
    p_bar /= static_cast<double>(NN);
    p_raw_bar /= static_cast<double>(NN);
    const double draws_total = static_cast<double>(NN) * static_cast<double>(R);
    const double se_p = std::sqrt(std::max(0.0, p_bar * (1.0 - p_bar)) / draws_total);
    const double se_praw = std::sqrt(std::max(0.0, p_raw_bar * (1.0 - p_raw_bar)) / draws_total);
    rep.score_mean = p_raw_bar;

    auto lens_integral = [&](const QuadGrid& grid) {
        double acc = 0.0;
        for (const auto& x : grid.nodes)
            acc += disk_intersection_area(dW->radius, T.radius, dist(x, dW->center));
        return grid.cell_area * acc;
    };
    const double G = lens_integral(qg);
    const double G_fine = lens_integral(qg_fine);
    double e2_weighted = 0.0;
    for (std::size_t i = 0; i < NN; ++i)
        e2_weighted += qg.cell_area *
                       disk_intersection_area(dW->radius, T.radius, dist(qg.nodes[i], dW->center)) *
                       ests[i].p_tilde;
    rep.E2.value = rho * rho * p_bar * e2_weighted;
    rep.E2.se = rho * rho * G * 2.0 * p_bar * se_p;
    const double E2_fine = rho * rho * p_bar * p_bar * G_fine;

    // E3: the two-point integrand depends only on d = |x - y|; estimate it on a
    // radial knot table and integrate over (x, s) with arc-length weights.
    const double v0 = g.nn_ball_radius ? std::min(*g.nn_ball_radius, T.radius) : 0.0;
    std::vector<double> knots, q_hat, q_se;
    if (T.radius - v0 > 1e-9) {
        const int m = std::max(2, opt.e3_knots);
        for (int j = 0; j < m; ++j) {
            const double f = (j + 1.0) / m;
            knots.push_back(v0 + (T.radius - v0) * (0.15 + 0.85 * f));  // over (v0, R_T]
        }
        knots.back() = T.radius;
        q_hat = run_replicated<double>(
            knots.size(), seed, kStreamE3, [&](std::size_t j, RngStream& rng) {
                const double d = knots[j];
                const Point xm{-0.5 * d, 0.0}, yp{0.5 * d, 0.0};
                const double wrad = 0.5 * d + probe + opt.palm_margin;
                const SpectralBasis basis = palm_basis(K, {xm, yp}, Disk{{0, 0}, wrad},
                                                       opt.palm_grid_n, opt.palm_tail_tol);
                long joint = 0;
                for (long rep_i = 0; rep_i < R; ++rep_i) {
                    const PointPattern omega = sample_dpp(basis, rng);
                    const PointPattern full = with_atoms(omega, {xm, yp});
                    const int a = g.score(xm, full);
                    if (!a) continue;
                    const int b = g.score(yp, full);
                    if (!b) continue;
                    bool ok = true;
                    if (g.deterministic_radius) {
                        ok = det_inside;
                    } else {
                        ok = region_subset(g.stabilization_region(xm, full),
                                           Region{Disk{xm, S.radius}}) &&
                             region_subset(g.stabilization_region(yp, full),
                                           Region{Disk{yp, S.radius}});
                    }
                    if (ok) ++joint;
                }
                return static_cast<double>(joint) / static_cast<double>(R);
            });
        for (const double q : q_hat)
            q_se.push_back(std::sqrt(std::max(0.0, q * (1.0 - q)) / static_cast<double>(R)));
    }

    auto assemble_e3 = [&](const QuadGrid& grid, std::vector<double>* weights) {
        if (knots.empty()) return 0.0;
        const int Ns = 256;
        const double ds = T.radius / Ns;
        double total = 0.0;
        for (const auto& x : grid.nodes) {
            const double dx = dist(x, dW->center);
            for (int si = 0; si < Ns; ++si) {
                const double s = (si + 0.5) * ds;
                if (s <= v0) continue;
                const double frac = circle_fraction_inside_disk(s, dx, dW->radius);
                if (frac <= 0) continue;
                const double coef = rho * rho * grid.cell_area * 2.0 * kPi * s * frac * ds;
                // piecewise-linear in the knot estimates; anchored at (v0, 0)
                // when the score carries a hard-exclusion radius
                double lo_d = v0, lo_q = 0.0;
                std::size_t j = 0;
                while (j < knots.size() && knots[j] < s) {
                    lo_d = knots[j];
                    lo_q = q_hat[j];
                    ++j;
                }
                if (j == 0 && !g.nn_ball_radius) {
                    total += coef * q_hat[0];
                    if (weights) (*weights)[0] += coef;
                    continue;
                }
                if (j >= knots.size()) {
                    total += coef * q_hat.back();
                    if (weights) (*weights)[knots.size() - 1] += coef;
                    continue;
                }
                const double t = (s - lo_d) / (knots[j] - lo_d);
                total += coef * ((1.0 - t) * lo_q + t * q_hat[j]);
                if (weights) {
                    if (j > 0) (*weights)[j - 1] += coef * (1.0 - t);
                    (*weights)[j] += coef * t;
                }
            }
        }
        return total;
    };
    std::vector<double> e3_weights(knots.size(), 0.0);
    rep.E3.value = assemble_e3(qg, &e3_weights);
    double e3_var = 0.0;
    for (std::size_t j = 0; j < knots.size(); ++j) {
        const double w = e3_weights[j] * q_se[j];
        e3_var += w * w;
    }
    rep.E3.se = std::sqrt(e3_var);
    const double E3_fine = assemble_e3(qg_fine, nullptr);

    rep.quad_error = std::abs(E2_fine - rho * rho * p_bar * p_bar * G) +
                     std::abs(E3_fine - rep.E3.value);

    // F = c ||K|| max(|S|,1) |W + S|^2 phi(d(T,S)), separation d = R_T - R_S.
    const double area_S = kPi * S.radius * S.radius;
    const double area_WS = kPi * (dW->radius + S.radius) * (dW->radius + S.radius);
    rep.F = opt.c_constant * K.sup_norm * std::max(area_S, 1.0) * area_WS * area_WS *
            K.phi(T.radius - S.radius);

    if (target_intensity) {
        rep.dtv_term = std::abs(rho * p_raw_bar - *target_intensity) * area_w;
        rep.dtv_se = rho * area_w * se_praw;
    } else {
        rep.dtv_term = 0.0;  // M matched to the estimated intensity of the thinned process
        rep.dtv_se = 0.0;
    }

    rep.total = rep.dtv_term + 2.0 * (rep.E1.value + rep.E2.value + rep.E3.value) + rep.F;
    rep.total_se = std::sqrt(rep.dtv_se * rep.dtv_se +
                             4.0 * (rep.E1.se * rep.E1.se + rep.E2.se * rep.E2.se +
                                    rep.E3.se * rep.E3.se));
    return rep;
}

std::string bound_report_json(const BoundReport& r) {
    nlohmann::ordered_json j;
    j["dtv_term"] = r.dtv_term;
    j["dtv_se"] = r.dtv_se;
    j["E1"] = {{"value", r.E1.value}, {"se", r.E1.se}};
    j["E2"] = {{"value", r.E2.value}, {"se", r.E2.se}};
    j["E3"] = {{"value", r.E3.value}, {"se", r.E3.se}};
    j["F"] = r.F;
    j["c_constant"] = r.c_constant;
    j["total"] = r.total;
    j["total_se"] = r.total_se;
    j["replicates"] = r.replicates;
    j["seed"] = r.seed;
    j["quad_grid"] = r.quad_grid;
    j["quad_error"] = r.quad_error;
    j["window_radius"] = r.window_radius;
    j["S_radius"] = r.S_radius;
    j["T_radius"] = r.T_radius;
    j["score_mean"] = r.score_mean;
    return j.dump(2);
}

std::string bound_report_csv_header() {
    return "window_radius,S_radius,T_radius,c_constant,replicates,seed,quad_grid,dtv_term,dtv_se,"
           "E1,E1_se,E2,E2_se,E3,E3_se,F,total,total_se,quad_error,score_mean";
}

std::string bound_report_csv_row(const BoundReport& r) {
    std::ostringstream os;
    os << fmt17(r.window_radius) << ',' << fmt17(r.S_radius) << ',' << fmt17(r.T_radius) << ','
       << fmt17(r.c_constant) << ',' << r.replicates << ',' << r.seed << ',' << r.quad_grid << ','
       << fmt17(r.dtv_term) << ',' << fmt17(r.dtv_se) << ',' << fmt17(r.E1.value) << ','
       << fmt17(r.E1.se) << ',' << fmt17(r.E2.value) << ',' << fmt17(r.E2.se) << ','
       << fmt17(r.E3.value) << ',' << fmt17(r.E3.se) << ',' << fmt17(r.F) << ','
       << fmt17(r.total) << ',' << fmt17(r.total_se) << ',' << fmt17(r.quad_error) << ','
       << fmt17(r.score_mean);
    return os.str();
}

}  // namespace dpplab
