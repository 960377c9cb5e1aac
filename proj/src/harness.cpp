#include "randman/harness.hpp"

#include "randman/curvature.hpp"
#include "randman/embedding.hpp"
#include "randman/errors.hpp"
#include "randman/gkf.hpp"
#include "randman/rng.hpp"
#include "randman/zeros.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <memory>
#include <mutex>
#include <numbers>
#include <thread>

#ifndef RANDMAN_VERSION
#define RANDMAN_VERSION "unknown"
#endif

namespace randman {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kZeroCountTag = 0x7a65726fULL;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

json finite_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

json column_stats(const std::vector<double>& v) {
    json s;
    s["n"] = v.size();
    if (v.empty()) return s;
    s["median"] = median(v);
    s["q1"] = quantile(v, 0.25);
    s["q3"] = quantile(v, 0.75);
    s["mean"] = mean(v);
    s["se"] = finite_or_null(standard_error(v));
    return s;
}

struct WorkItem {
    int k_pos;
    int k;
    int replicate;
    std::uint64_t seed;
};

std::vector<WorkItem> work_items(const ExperimentConfig& cfg) {
    std::vector<WorkItem> items;
    for (std::size_t i = 0; i < cfg.k_list.size(); ++i)
        for (int r = 0; r < cfg.replicates; ++r)
            items.push_back({static_cast<int>(i), cfg.k_list[i], r,
                             replicate_seed(cfg.seed, cfg.k_list[i], r)});
    return items;
}

using Payload = std::function<std::vector<double>(const WorkItem&)>;

/// Runs every item, turning a NumericalDegeneracy into an exclusion.
std::vector<ReplicateResult> run_items(const std::vector<WorkItem>& items, int threads,
                                       const Payload& payload) {
    std::vector<ReplicateResult> out(items.size());
    parallel_for(items.size(), threads, [&](std::size_t i) {
        const WorkItem& it = items[i];
        ReplicateResult& r = out[i];
        r.k = it.k;
        r.replicate = it.replicate;
        r.seed = it.seed;
        auto t0 = Clock::now();
        try {
            r.payload = payload(it);
        } catch (const NumericalDegeneracy& e) {
            r.excluded = true;
            r.reason = e.what();
        }
        r.wall_seconds = seconds_since(t0);
    });
    return out;
}

/// Per-k block of the summary: counts, exclusions and column statistics.
json per_k_summary(const ExperimentResult& res, int k) {
    json block;
    block["k"] = k;
    int included = 0, excluded = 0;
    json exclusions = json::array();
    std::vector<std::vector<double>> cols(res.columns.size());
    for (const auto& r : res.replicates) {
        if (r.k != k) continue;
        if (r.excluded) {
            ++excluded;
            exclusions.push_back({{"replicate", r.replicate}, {"seed", r.seed}, {"reason", r.reason}});
            continue;
        }
        ++included;
        for (std::size_t c = 0; c < cols.size(); ++c) cols[c].push_back(r.payload[c]);
    }
    block["included"] = included;
    block["excluded"] = excluded;
    block["exclusions"] = exclusions;
    json stats;
    for (std::size_t c = 0; c < cols.size(); ++c) stats[res.columns[c]] = column_stats(cols[c]);
    block["stats"] = stats;
    return block;
}

json base_summary(const ExperimentResult& res) {
    json s;
    s["experiment"] = to_string(res.config.kind);
    s["version"] = version();
    s["root_seed"] = res.config.seed;
    s["config"] = config_to_json(res.config);
    s["replicates_configured"] = res.config.replicates;
    json seeds = json::array();
    for (const auto& r : res.replicates)
        seeds.push_back({{"k", r.k}, {"replicate", r.replicate}, {"seed", r.seed}});
    s["replicate_seeds"] = seeds;
    json per_k = json::array();
    std::vector<int> seen;
    for (const auto& r : res.replicates) {
        if (std::find(seen.begin(), seen.end(), r.k) != seen.end()) continue;
        seen.push_back(r.k);
        per_k.push_back(per_k_summary(res, r.k));
    }
    s["per_k"] = per_k;
    s["wall_seconds"] = res.wall_seconds;
    return s;
}

std::vector<double> column_of(const ExperimentResult& res, int k, std::size_t c) {
    std::vector<double> v;
    for (const auto& r : res.replicates)
        if (r.k == k && !r.excluded) v.push_back(r.payload[c]);
    return v;
}

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    double den = n * sxx - sx * sx;
    return (n * sxy - sx * sy) / den;
}

struct Setup {
    ManifoldAtlas atlas;
    std::shared_ptr<const GPModel> model;
};

Setup make_setup(const ExperimentConfig& cfg) {
    Setup s;
    s.atlas = parse_manifold(cfg.manifold, cfg.nodes);
    s.model = std::make_shared<const GPModel>(
        build_model(s.atlas, cfg.waves, cfg.spectrum, cfg.seed));
    return s;
}

std::vector<std::vector<Coord>> quadrature_points(const ManifoldAtlas& atlas) {
    std::vector<std::vector<Coord>> pts(atlas.charts.size());
    for (std::size_t c = 0; c < atlas.charts.size(); ++c)
        for (const auto& node : atlas.quadrature[c]) pts[c].push_back(node.x);
    return pts;
}

std::vector<WaveBasis> bases_at(const Setup& s, const std::vector<std::vector<Coord>>& pts) {
    std::vector<WaveBasis> bases;
    for (std::size_t c = 0; c < s.atlas.charts.size(); ++c)
        bases.push_back(wave_basis(*s.model, s.atlas.charts[c], pts[c]));
    return bases;
}

std::vector<std::vector<MetricJet>> pulled_jets(const EmbeddingRealization& e,
                                                const std::vector<WaveBasis>& bases) {
    std::vector<std::vector<MetricJet>> jets;
    for (const auto& b : bases) jets.push_back(pullback_jets(e, b));
    return jets;
}

std::vector<double> pullback_lkc_values(const Setup& s, const std::vector<WaveBasis>& bases,
                                        const WorkItem& it) {
    auto e = draw_realization(s.model, it.k, it.seed);
    return lkc(s.atlas, pulled_jets(e, bases)).values;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Converge: return "converge";
        case ExperimentKind::LkcConverge: return "lkc-converge";
        case ExperimentKind::Unbiased: return "unbiased";
        case ExperimentKind::ZeroCount: return "zero-count";
    }
    return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
    if (name == "converge") return ExperimentKind::Converge;
    if (name == "lkc-converge") return ExperimentKind::LkcConverge;
    if (name == "unbiased") return ExperimentKind::Unbiased;
    if (name == "zero-count") return ExperimentKind::ZeroCount;
    throw ConfigError("unknown experiment kind '" + name + "'");
}

void validate(const ExperimentConfig& cfg) {
    if (cfg.k_list.empty()) throw ConfigError("k_list is empty");
    for (int k : cfg.k_list)
        if (k < 1) throw ConfigError("k_list entries must be >= 1, got " + std::to_string(k));
    if (cfg.replicates < 1) throw ConfigError("replicates must be >= 1");
    if (cfg.waves < 1) throw ConfigError("waves must be >= 1");
    if (cfg.grid < 1) throw ConfigError("grid must be >= 1");
    if (cfg.order < 0 || cfg.order > 2) throw ConfigError("order must be 0, 1 or 2");
    if (cfg.zero_grid < 1) throw ConfigError("zero_grid must be >= 1");
    if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
    int m = 0;
    try {
        m = parse_manifold(cfg.manifold, 8).dim;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("manifold: ") + e.what());
    }
    if (cfg.kind == ExperimentKind::Unbiased)
        for (int k : cfg.k_list)
            if (k <= 2 * m)
                throw ConfigError("unbiased requires every k > 2m = " + std::to_string(2 * m) +
                                  ", got " + std::to_string(k));
    if (cfg.kind == ExperimentKind::ZeroCount && m != 2)
        throw ConfigError("zero-count requires a 2-dimensional manifold");
}

json config_to_json(const ExperimentConfig& cfg) {
    return json{{"experiment", to_string(cfg.kind)},
                {"manifold", cfg.manifold},
                {"nodes", cfg.nodes},
                {"waves", cfg.waves},
                {"spectrum", to_string(cfg.spectrum)},
                {"seed", cfg.seed},
                {"k_list", cfg.k_list},
                {"replicates", cfg.replicates},
                {"grid", cfg.grid},
                {"order", cfg.order},
                {"zero_grid", cfg.zero_grid},
                {"threads", cfg.threads},
                {"out_dir", cfg.out_dir},
                {"plot", cfg.plot}};
}

ExperimentConfig config_from_json(const json& j, ExperimentConfig base) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    try {
        for (auto it = j.begin(); it != j.end(); ++it) {
            const std::string& key = it.key();
            const json& v = it.value();
            if (key == "experiment") base.kind = parse_experiment_kind(v.get<std::string>());
            else if (key == "manifold") base.manifold = v.get<std::string>();
            else if (key == "nodes") base.nodes = v.get<int>();
            else if (key == "waves") base.waves = v.get<int>();
            else if (key == "spectrum") base.spectrum = parse_spectral_shape(v.get<std::string>());
            else if (key == "seed") base.seed = v.get<std::uint64_t>();
            else if (key == "k_list") base.k_list = v.get<std::vector<int>>();
            else if (key == "replicates") base.replicates = v.get<int>();
            else if (key == "grid") base.grid = v.get<int>();
            else if (key == "order") base.order = v.get<int>();
            else if (key == "zero_grid") base.zero_grid = v.get<int>();
            else if (key == "threads") base.threads = v.get<int>();
            else if (key == "out_dir") base.out_dir = v.get<std::string>();
            else if (key == "plot") base.plot = v.get<bool>();
            else throw ConfigError("unknown config key '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return base;
}

std::uint64_t replicate_seed(std::uint64_t root, int k, int rep) {
    return derive_seed(root, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(rep));
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), std::max<std::size_t>(count, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(count);
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

ExperimentResult run_converge(const ExperimentConfig& cfg) {
    ExperimentConfig c = cfg;
    c.kind = ExperimentKind::Converge;
    validate(c);
    auto t0 = Clock::now();
    Setup s = make_setup(c);
    auto grid = evaluation_grid(s.atlas, c.grid);
    auto bases = bases_at(s, grid);
    std::vector<std::vector<MetricJet>> target(grid.size());
    auto ref = reference_metric(s.atlas);
    for (std::size_t ch = 0; ch < grid.size(); ++ch)
        for (const auto& x : grid[ch]) target[ch].push_back(ref(static_cast<int>(ch), x));

    ExperimentResult res;
    res.config = c;
    res.columns = {"order0", "order1", "order2"};
    res.replicates = run_items(work_items(c), c.threads, [&](const WorkItem& it) {
        auto e = draw_realization(s.model, it.k, it.seed);
        auto pulled = pulled_jets(e, bases);
        for (std::size_t ch = 0; ch < pulled.size(); ++ch)
            for (std::size_t p = 0; p < pulled[ch].size(); ++p) {
                Eigen::LLT<Eigen::MatrixXd> llt(pulled[ch][p].metric());
                if (llt.info() != Eigen::Success)
                    throw NumericalDegeneracy("degenerate pullback metric in chart " +
                                              std::to_string(ch) + " at grid point " +
                                              std::to_string(p));
            }
        auto n = deviation_norms(pulled, target, c.order);
        return std::vector<double>{n[0], n[1], n[2]};
    });
    res.wall_seconds = seconds_since(t0);
    res.summary = base_summary(res);

    std::vector<double> ks, med;
    for (int k : c.k_list) {
        auto v = column_of(res, k, 0);
        if (v.empty()) continue;
        ks.push_back(k);
        med.push_back(median(v));
    }
    res.summary["order0_loglog_slope"] = finite_or_null(loglog_slope(ks, med));
    return res;
}

ExperimentResult run_lkc_converge(const ExperimentConfig& cfg) {
    ExperimentConfig c = cfg;
    c.kind = ExperimentKind::LkcConverge;
    validate(c);
    auto t0 = Clock::now();
    Setup s = make_setup(c);
    auto bases = bases_at(s, quadrature_points(s.atlas));
    const auto& exact = s.atlas.exact_lkc;
    const int m = s.atlas.dim;

    ExperimentResult res;
    res.config = c;
    for (int j = 0; j <= m; ++j) res.columns.push_back("L" + std::to_string(j));
    for (int j = 0; j <= m; ++j) res.columns.push_back("dev" + std::to_string(j));
    res.replicates = run_items(work_items(c), c.threads, [&](const WorkItem& it) {
        auto values = pullback_lkc_values(s, bases, it);
        std::vector<double> row = values;
        for (int j = 0; j <= m; ++j) row.push_back(std::abs(values[j] - exact[j]));
        return row;
    });
    res.wall_seconds = seconds_since(t0);
    res.summary = base_summary(res);
    res.summary["exact_lkc"] = exact;
    return res;
}

ExperimentResult run_unbiased(const ExperimentConfig& cfg) {
    ExperimentConfig c = cfg;
    c.kind = ExperimentKind::Unbiased;
    validate(c);
    auto t0 = Clock::now();
    Setup s = make_setup(c);
    auto bases = bases_at(s, quadrature_points(s.atlas));
    const auto& exact = s.atlas.exact_lkc;
    const int m = s.atlas.dim;

    ExperimentResult res;
    res.config = c;
    for (int j = 0; j <= m; ++j) res.columns.push_back("L" + std::to_string(j));
    res.replicates = run_items(work_items(c), c.threads, [&](const WorkItem& it) {
        return pullback_lkc_values(s, bases, it);
    });
    res.wall_seconds = seconds_since(t0);
    res.summary = base_summary(res);
    res.summary["exact_lkc"] = exact;

    json z = json::array();
    for (int k : c.k_list)
        for (int j = m; j >= 0; j -= 2) {
            auto v = column_of(res, k, j);
            if (v.empty()) continue;
            double mu = mean(v), se = standard_error(v);
            z.push_back({{"k", k},
                         {"j", j},
                         {"mean", mu},
                         {"se", finite_or_null(se)},
                         {"z", finite_or_null((mu - exact[j]) / se)}});
        }
    res.summary["z_scores"] = z;

    json diag = json::array();
    for (std::size_t a = 0; a + 1 < c.k_list.size(); ++a)
        for (int j = m; j >= 0; j -= 2) {
            auto va = column_of(res, c.k_list[a], j), vb = column_of(res, c.k_list[a + 1], j);
            if (va.size() < 2 || vb.size() < 2) continue;
            double sa = standard_error(va), sb = standard_error(vb);
            double joint = std::sqrt(sa * sa + sb * sb);
            double diff = mean(va) - mean(vb);
            diag.push_back({{"k_a", c.k_list[a]},
                            {"k_b", c.k_list[a + 1]},
                            {"j", j},
                            {"difference", diff},
                            {"joint_se", joint},
                            {"z", finite_or_null(diff / joint)}});
        }
    res.summary["k_independence"] = diag;
    return res;
}

ExperimentResult run_zero_count(const ExperimentConfig& cfg) {
    ExperimentConfig c = cfg;
    c.kind = ExperimentKind::ZeroCount;
    c.k_list = {2};
    validate(c);
    auto t0 = Clock::now();
    Setup s = make_setup(c);
    ZeroCountOptions opts;
    opts.grid = c.zero_grid;

    std::vector<WorkItem> items;
    for (int r = 0; r < c.replicates; ++r)
        items.push_back({0, 2, r, derive_seed(c.seed, kZeroCountTag, static_cast<std::uint64_t>(r))});

    ExperimentResult res;
    res.config = c;
    res.columns = {"count", "flagged_cells"};
    res.replicates = run_items(items, c.threads, [&](const WorkItem& it) {
        auto f1 = sample(s.model, derive_seed(it.seed, 0));
        auto f2 = sample(s.model, derive_seed(it.seed, 1));
        auto z = count_common_zeros(f1, f2, s.atlas, opts);
        return std::vector<double>{static_cast<double>(z.count),
                                   static_cast<double>(z.flagged_cells)};
    });
    res.wall_seconds = seconds_since(t0);
    res.summary = base_summary(res);

    LKCVector exact(s.atlas.exact_lkc);
    double predicted = gkf_rhs(0, exact, gmf_point(2), s.atlas.dim);
    std::vector<double> all, clean;
    json flagged = json::array();
    for (const auto& r : res.replicates) {
        if (r.excluded) continue;
        all.push_back(r.payload[0]);
        if (r.payload[1] > 0) {
            flagged.push_back({{"replicate", r.replicate}, {"seed", r.seed},
                               {"count", r.payload[0]}, {"flagged_cells", r.payload[1]}});
            continue;
        }
        clean.push_back(r.payload[0]);
    }
    double mu = all.empty() ? 0.0 : mean(all);
    double se = standard_error(all);
    res.summary["predicted_mean"] = predicted;
    res.summary["mean"] = mu;
    res.summary["se"] = finite_or_null(se);
    res.summary["z"] = finite_or_null((mu - predicted) / se);
    res.summary["unflagged_replicates"] = clean.size();
    res.summary["unflagged_mean"] = clean.empty() ? json(nullptr) : json(mean(clean));
    res.summary["unflagged_se"] = finite_or_null(standard_error(clean));
    res.summary["flagged_replicates"] = flagged;
    return res;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    switch (cfg.kind) {
        case ExperimentKind::Converge: return run_converge(cfg);
        case ExperimentKind::LkcConverge: return run_lkc_converge(cfg);
        case ExperimentKind::Unbiased: return run_unbiased(cfg);
        case ExperimentKind::ZeroCount: return run_zero_count(cfg);
    }
    throw ConfigError("unknown experiment kind");
}

json lkc_report(const std::string& manifold, int nodes, MetricSource source, int k, int waves,
                SpectralShape spectrum, std::uint64_t seed) {
    ManifoldAtlas atlas = parse_manifold(manifold, nodes);
    json out;
    out["manifold"] = manifold;
    out["dim"] = atlas.dim;
    out["exact"] = atlas.exact_lkc;
    if (source == MetricSource::Reference) {
        out["metric"] = "reference";
        out["lkc"] = reference_lkc(atlas).values;
        return out;
    }
    if (k < 1) throw InvalidArgument("lkc: k must be >= 1");
    Setup s{atlas, std::make_shared<const GPModel>(build_model(atlas, waves, spectrum, seed))};
    auto bases = bases_at(s, quadrature_points(s.atlas));
    WorkItem it{0, k, 0, replicate_seed(seed, k, 0)};
    out["metric"] = "pullback";
    out["k"] = k;
    out["waves"] = waves;
    out["spectrum"] = to_string(spectrum);
    out["seed"] = seed;
    out["realization_seed"] = it.seed;
    out["lkc"] = pullback_lkc_values(s, bases, it);
    return out;
}

json gmf_report(int n, int j_max) {
    auto t = gmf_point(n, j_max);
    return json{{"n", n}, {"j_max", j_max}, {"gmf", t.values}};
}

json gkf_table(const std::string& manifold, int nodes, int codim) {
    ManifoldAtlas atlas = parse_manifold(manifold, nodes);
    if (codim < 0) throw InvalidArgument("gkf-table: codim must be >= 0");
    LKCVector l(atlas.exact_lkc);
    auto gmf = gmf_point(codim, std::max(atlas.dim, codim) + 1);
    std::vector<double> expected;
    for (int i = 0; i <= atlas.dim; ++i) expected.push_back(gkf_rhs(i, l, gmf, atlas.dim));
    return json{{"manifold", manifold},
                {"codim", codim},
                {"lkc", atlas.exact_lkc},
                {"gmf", gmf.values},
                {"expected_lkc", expected}};
}

std::string version() { return RANDMAN_VERSION; }

double quantile(std::vector<double> v, double q) {
    if (v.empty()) throw InvalidArgument("quantile of an empty sample");
    std::sort(v.begin(), v.end());
    double pos = q * static_cast<double>(v.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    std::size_t hi = std::min(lo + 1, v.size() - 1);
    double t = pos - static_cast<double>(lo);
    return v[lo] + t * (v[hi] - v[lo]);
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

double mean(const std::vector<double>& v) {
    if (v.empty()) throw InvalidArgument("mean of an empty sample");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double standard_error(const std::vector<double>& v) {
    if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    double mu = mean(v), ss = 0.0;
    for (double x : v) ss += (x - mu) * (x - mu);
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace randman
