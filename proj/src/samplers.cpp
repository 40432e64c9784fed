#include "dpplab/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "dpplab/kernels.hpp"
#include "dpplab/numerics.hpp"
#include "dpplab/serialize.hpp"

namespace dpplab {

namespace {
constexpr double kPi = 3.14159265358979323846;
}  // namespace

Point uniform_in_region(const Region& region, RngStream& rng) {
    return std::visit(
        [&](const auto& w) -> Point {
            using T = std::decay_t<decltype(w)>;
            if constexpr (std::is_same_v<T, Disk>) {
                const double r = w.radius * std::sqrt(rng.uniform());
                const double th = 2.0 * kPi * rng.uniform();
                return {w.center.x + r * std::cos(th), w.center.y + r * std::sin(th)};
            } else if constexpr (std::is_same_v<T, Annulus>) {
                const double a2 = w.r_inner * w.r_inner;
                const double b2 = w.r_outer * w.r_outer;
                const double r = std::sqrt(a2 + rng.uniform() * (b2 - a2));
                const double th = 2.0 * kPi * rng.uniform();
                return {w.center.x + r * std::cos(th), w.center.y + r * std::sin(th)};
            } else {
                const double x = w.x0 + rng.uniform() * (w.x1 - w.x0);
                const double y = w.y0 + rng.uniform() * (w.y1 - w.y0);
                return {x, y};
            }
        },
        region);
}

namespace {

// Coarse grid of in-window probe nodes used to track the running maximum of
// the conditional density. Node spacing is tied to the kernel decay length
// (unit scale), capped so the cached feature matrix stays small.
struct ProbeGrid {
    std::vector<Point> nodes;

    static ProbeGrid build(const Region& window, const SamplerOptions& opt) {
        const Box bb = bounding_box(window);
        const double width = std::max(bb.x1 - bb.x0, bb.y1 - bb.y0);
        int side = std::clamp(static_cast<int>(std::ceil(width / 1.3)),
                              opt.min_grid_side, opt.max_grid_side);
        for (;; side *= 2) {
            ProbeGrid g;
            const double hx = (bb.x1 - bb.x0) / side;
            const double hy = (bb.y1 - bb.y0) / side;
            for (int iy = 0; iy < side; ++iy) {
                for (int ix = 0; ix < side; ++ix) {
                    const Point c{bb.x0 + (ix + 0.5) * hx, bb.y0 + (iy + 0.5) * hy};
                    if (contains(window, c)) g.nodes.push_back(c);
                }
            }
            if (!g.nodes.empty()) return g;
            if (side > 512) throw std::runtime_error("sample_dpp: no probe node inside window");
        }
    }
};

[[noreturn]] void throw_envelope_failure(std::size_t stage, std::size_t k_sel, long rejects,
                                         const SamplerDiagnostics& diag, double env,
                                         double last_d) {
    std::ostringstream msg;
    msg << "sample_dpp: rejection cap exceeded at stage " << stage << "/" << k_sel
        << " (rejects=" << rejects << ", proposals=" << diag.proposals
        << ", accepts=" << diag.accepts
        << ", acceptance=" << (diag.proposals ? double(diag.accepts) / double(diag.proposals) : 0.0)
        << ", envelope=" << env << ", last density=" << last_d << ")";
    throw envelope_failure(msg.str());
}

}  // namespace

PointPattern sample_dpp(const SpectralBasis& basis, RngStream& rng, SamplerDiagnostics* diag,
                        const SamplerOptions& opt) {
    SamplerDiagnostics local;
    SamplerDiagnostics& dg = diag ? *diag : local;
    dg = SamplerDiagnostics{};

    const std::size_t K = basis.size();
    std::vector<int> sel;
    sel.reserve(K);
    for (std::size_t j = 0; j < K; ++j) {
        const double lam = std::clamp(basis.eigenvalues[j], 0.0, 1.0);
        if (rng.uniform() < lam) sel.push_back(static_cast<int>(j));
    }
    PointPattern out;
    out.window = basis.window;
    const std::size_t k_sel = sel.size();
    if (k_sel == 0) return out;

    std::vector<std::complex<double>> feat(K);
    auto gather = [&](const Point& p, Eigen::VectorXcd& v) {
        basis.eval_all(p, feat.data());
        for (std::size_t j = 0; j < k_sel; ++j) v[static_cast<Eigen::Index>(j)] = feat[sel[j]];
    };

    // Probe-node feature cache and running density estimates d_grid.
    ProbeGrid grid = ProbeGrid::build(basis.window, opt);
    const std::size_t n_nodes = grid.nodes.size();
    Eigen::MatrixXcd node_feat(k_sel, n_nodes);
    Eigen::VectorXd d_grid(n_nodes);
    {
        Eigen::VectorXcd v(k_sel);
        for (std::size_t i = 0; i < n_nodes; ++i) {
            gather(grid.nodes[i], v);
            node_feat.col(static_cast<Eigen::Index>(i)) = v;
            d_grid[static_cast<Eigen::Index>(i)] = v.squaredNorm();
        }
    }

    Eigen::MatrixXcd E(k_sel, k_sel);  // orthonormal columns from accepted points
    std::vector<Point> accepted;
    accepted.reserve(k_sel);
    const double area_w = area(basis.window);
    const double r_ortho2 = opt.r_ortho * opt.r_ortho;
    const double r_env2 = opt.r_env * opt.r_env;

    Eigen::VectorXcd v(k_sel);
    std::vector<std::pair<double, int>> near;  // (dist2, accepted index)
    std::vector<std::complex<double>> coeff;

    for (std::size_t m = 0; m < k_sel; ++m) {
        double env = opt.safety * d_grid.maxCoeff();
        env = std::max(env, 1e-12 * double(k_sel - m) / area_w);
        long rejects = 0;
        for (;;) {
            const Point p = uniform_in_region(basis.window, rng);
            const double u_acc = rng.uniform();
            ++dg.proposals;

            // Nearest-first ordering lets the early-reject cutoff fire after a
            // handful of projections for typical rejected proposals.
            near.clear();
            for (std::size_t i = 0; i < accepted.size(); ++i) {
                const double d2 = dist2(p, accepted[i]);
                if (d2 <= r_ortho2) near.emplace_back(d2, static_cast<int>(i));
            }
            std::sort(near.begin(), near.end());

            gather(p, v);
            double d_raw = v.squaredNorm();
            const double norm0 = d_raw;
            const double cutoff = u_acc * env;
            coeff.assign(near.size(), {});
            bool early_reject = false;
            for (std::size_t t = 0; t < near.size(); ++t) {
                const auto c = E.col(near[t].second).dot(v);
                coeff[t] = c;
                d_raw -= std::norm(c);
                if (d_raw < cutoff) {  // projections only shrink the density
                    early_reject = true;
                    break;
                }
            }
            if (d_raw < 0) d_raw = 0;

            if (!early_reject && d_raw > env) {
                env = std::max(opt.safety * d_raw, 1.8 * env);
                ++dg.bumps;
                ++rejects;
                if (rejects >= opt.max_rejects_per_stage)
                    throw_envelope_failure(m, k_sel, rejects, dg, env, d_raw);
                continue;
            }
            if (early_reject || cutoff >= d_raw) {
                ++rejects;
                dg.max_stage_rejects = std::max(dg.max_stage_rejects, rejects);
                if (rejects >= opt.max_rejects_per_stage)
                    throw_envelope_failure(m, k_sel, rejects, dg, env, d_raw);
                continue;
            }

            // Accept: orthonormalize the feature vector against the near set.
            ++dg.accepts;
            for (std::size_t t = 0; t < near.size(); ++t)
                v -= coeff[t] * E.col(near[t].second);
            if (v.squaredNorm() < 1e-8 * norm0) {
                ++dg.reorths;
                for (const auto& [d2, idx] : near) {
                    (void)d2;
                    v -= E.col(idx).dot(v) * E.col(idx);
                }
            }
            const double rn = v.norm();
            if (!(rn > 0)) throw_envelope_failure(m, k_sel, rejects, dg, env, d_raw);
            E.col(static_cast<Eigen::Index>(m)) = v / rn;

            for (std::size_t i = 0; i < n_nodes; ++i) {
                if (dist2(p, grid.nodes[i]) > r_env2) continue;
                const auto idx = static_cast<Eigen::Index>(i);
                const auto c = E.col(static_cast<Eigen::Index>(m)).dot(node_feat.col(idx));
                d_grid[idx] = std::max(0.0, d_grid[idx] - std::norm(c));
            }
            accepted.push_back(p);
            break;
        }
    }
    out.points = std::move(accepted);
    return out;
}

long sample_kostlan_counts(double r, RngStream& rng) {
    if (r < 0) throw std::invalid_argument("sample_kostlan_counts: r < 0");
    const double x = r * r;
    long I = static_cast<long>(std::ceil(x)) + 10;
    while (poisson_mean_excess(I, x) >= 1e-12) I += std::max<long>(8, I / 4);
    long count = 0;
    for (long i = 1; i <= I; ++i) {
        const double p = 1.0 - regularized_upper_gamma(i, x);
        if (rng.uniform() < p) ++count;
    }
    return count;
}

SpectralBasis palm_basis(const KernelSpec& K, const std::vector<Point>& conditioning,
                         const Region& window, int grid_n, double tail_tol) {
    KernelSpec kp;
    if (conditioning.size() == 1) {
        kp = palm_kernel(K, conditioning[0]);
    } else if (conditioning.size() == 2) {
        kp = two_point_palm_kernel(K, conditioning[0], conditioning[1]);
    } else {
        throw std::invalid_argument("palm_basis: conditioning must hold 1 or 2 points");
    }
    SpectralBasis basis = nystrom_basis(kp, window, grid_n);
    basis.truncate(tail_tol);
    return basis;
}

PointPattern sample_palm(const KernelSpec& K, const std::vector<Point>& conditioning,
                         const Region& window, double tail_tol, RngStream& rng, int grid_n) {
    const SpectralBasis basis = palm_basis(K, conditioning, window, grid_n, tail_tol);
    return sample_dpp(basis, rng);
}

PointPattern sample_poisson(double intensity, const Region& window, RngStream& rng) {
    if (intensity < 0) throw std::invalid_argument("sample_poisson: negative intensity");
    PointPattern out;
    out.window = window;
    const long n = rng.poisson(intensity * area(window));
    out.points.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) out.points.push_back(uniform_in_region(window, rng));
    return out;
}

PointPattern sample_ginibre_ensemble(int N, RngStream& rng) {
    if (N < 1 || N > 4096)
        throw std::invalid_argument("sample_ginibre_ensemble: N must be in [1, 4096]");
    Eigen::MatrixXcd A(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) A(i, j) = rng.complex_normal();
    const auto eig = general_eigenvalues(A);
    PointPattern out;
    out.points.reserve(eig.size());
    double max_abs = 0;
    for (const auto& z : eig) {
        out.points.push_back(to_point(z));
        max_abs = std::max(max_abs, std::abs(z));
    }
    out.window = Disk{{0, 0}, std::max(std::sqrt(double(N)) + 3.0, max_abs + 1e-9)};
    return out;
}

nlohmann::ordered_json region_to_json(const Region& region) {
    return std::visit(
        [](const auto& w) -> nlohmann::ordered_json {
            using T = std::decay_t<decltype(w)>;
            nlohmann::ordered_json j;
            if constexpr (std::is_same_v<T, Disk>) {
                j["type"] = "disk";
                j["center"] = {w.center.x, w.center.y};
                j["radius"] = w.radius;
            } else if constexpr (std::is_same_v<T, Annulus>) {
                j["type"] = "annulus";
                j["center"] = {w.center.x, w.center.y};
                j["r_inner"] = w.r_inner;
                j["r_outer"] = w.r_outer;
            } else {
                j["type"] = "box";
                j["x0"] = w.x0;
                j["y0"] = w.y0;
                j["x1"] = w.x1;
                j["y1"] = w.y1;
            }
            return j;
        },
        region);
}

Region region_from_json(const nlohmann::json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "disk") {
        return Disk{{j.at("center")[0].get<double>(), j.at("center")[1].get<double>()},
                    j.at("radius").get<double>()};
    }
    if (type == "annulus") {
        return Annulus{{j.at("center")[0].get<double>(), j.at("center")[1].get<double>()},
                       j.at("r_inner").get<double>(), j.at("r_outer").get<double>()};
    }
    if (type == "box") {
        return Box{j.at("x0").get<double>(), j.at("y0").get<double>(), j.at("x1").get<double>(),
                   j.at("y1").get<double>()};
    }
    throw std::runtime_error("unknown window type: " + type);
}

void write_jsonl(const SampleBatch& batch, const std::string& path) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
    {
        std::ofstream os(tmp);
        if (!os) throw std::runtime_error("write_jsonl: cannot open " + tmp.string());
        for (std::size_t i = 0; i < batch.patterns.size(); ++i) {
            nlohmann::ordered_json line;
            line["seed"] = batch.seed;
            line["stream"] = batch.stream_base + i;
            line["window"] = region_to_json(batch.patterns[i].window);
            auto pts = nlohmann::ordered_json::array();
            for (const auto& p : batch.patterns[i].points) pts.push_back({p.x, p.y});
            line["points"] = std::move(pts);
            os << line.dump() << "\n";
        }
        if (!os) throw std::runtime_error("write_jsonl: write failed on " + tmp.string());
    }
    fs::rename(tmp, target);
}

SampleBatch read_jsonl(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_jsonl: cannot open " + path);
    SampleBatch batch;
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        PointPattern p;
        p.window = region_from_json(j.at("window"));
        for (const auto& xy : j.at("points")) p.points.push_back({xy[0].get<double>(), xy[1].get<double>()});
        if (first) {
            batch.seed = j.at("seed").get<uint64_t>();
            batch.stream_base = j.at("stream").get<uint64_t>();
            batch.window = p.window;
            first = false;
        }
        batch.patterns.push_back(std::move(p));
    }
    return batch;
}

int worker_count() {
    const char* e = std::getenv("DPPLAB_WORKERS");
    if (!e || !*e) return 1;
    const long v = std::strtol(e, nullptr, 10);
    return static_cast<int>(std::clamp<long>(v, 1, 64));
}

}  // namespace dpplab
