#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "nira/nira.hpp"

namespace {

using namespace nira;

constexpr int exit_ok = 0;
constexpr int exit_usage = 2;
constexpr int exit_numerical = 3;

Vec3 to_vec3(const std::vector<double>& v, const std::string& flag)
{
    if (v.size() != 3) throw ContractError(flag + " expects 3 comma-separated values");
    return {v[0], v[1], v[2]};
}

std::array<std::size_t, 3> to_dims(const std::vector<std::size_t>& v)
{
    if (v.size() != 3) throw ContractError("--dims expects nx,ny,nz");
    for (std::size_t d : v)
        if (d == 0) throw ContractError("--dims entries must be positive");
    return {v[0], v[1], v[2]};
}

std::string join(const Vec3& v, std::size_t n = 3)
{
    std::string s;
    for (std::size_t d = 0; d < n; ++d) s += (d ? "," : "") + format_double(v[d]);
    return s;
}

std::string stats_path_for(const std::string& stats, const std::string& out)
{
    return stats.empty() ? out + ".stats" : stats;
}

void put_bound_config(StatsFile& st, const BoundConfig& b, std::size_t input_dim)
{
    st.set("config.method", std::string(to_string(b.method)));
    st.set("config.t", b.t);
    st.set("config.ra_limit", static_cast<std::uint64_t>(b.resolved_limit(input_dim)));
    st.set("config.ra_ua_inner", std::string(to_string(b.ra_ua_inner)));
}

void put_network_info(StatsFile& st, const MlpNetwork& net)
{
    st.set("network.activation", std::string(to_string(net.activation)));
    st.set("network.input_dim", static_cast<std::uint64_t>(net.input_dim));
    st.set("network.layers", static_cast<std::uint64_t>(net.layers.size()));
    st.set("network.max_width", static_cast<std::uint64_t>(net.max_width()));
    Vec3 lo{}, hi{};
    for (std::size_t d = 0; d < net.input_dim; ++d) {
        lo[d] = net.domain_lower[d];
        hi[d] = net.domain_upper[d];
    }
    st.set("network.domain_lower", join(lo, net.input_dim));
    st.set("network.domain_upper", join(hi, net.input_dim));
}

// Bound-method flags shared by extract, raycast and bench.
struct BoundFlags {
    std::string method = "up";
    double t = 5.0;
    std::size_t ra_limit = 0;
    std::string ra_ua_inner = "ra-full";

    void add(CLI::App* app, bool with_method = true)
    {
        if (with_method)
            app->add_option("--method", method, "Bound method: up, ra-full, ra-fixed, ra-truncate, ra-append, ra-ua, dense")
                ->capture_default_str();
        app->add_option("--t", t, "Confidence level t for soft bounds (up, ra-ua)")->capture_default_str();
        app->add_option("--ra-limit", ra_limit, "Truncate k / Append budget; 0 = input_dim + 16")->capture_default_str();
        app->add_option("--ra-ua-inner", ra_ua_inner, "Range-analysis variant used inside ra-ua")->capture_default_str();
    }

    BoundConfig resolve() const
    {
        BoundConfig b;
        b.method = parse_method(method);
        b.t = t;
        b.ra_limit = ra_limit;
        b.ra_ua_inner = parse_method(ra_ua_inner);
        return b;
    }
};

struct SynthFlags {
    std::string field = "wave";
    std::vector<std::size_t> dims{64, 64, 64};
    std::vector<double> lower{-1, -1, -1}, upper{1, 1, 1};
    std::uint64_t seed = 7;
    std::string out, stats;
};

int cmd_synth(const SynthFlags& f)
{
    const auto kind = fields::parse_kind(f.field);
    const auto dims = to_dims(f.dims);
    const Vec3 lo = to_vec3(f.lower, "--lower"), hi = to_vec3(f.upper, "--upper");
    for (std::size_t d = 0; d < 3; ++d)
        if (!(lo[d] < hi[d])) throw ContractError("--lower must be below --upper");
    const ScalarVolume vol = fields::sample(fields::make_field(kind, f.seed), dims, lo, hi);
    write_volume_f32(vol, f.out);
    StatsFile st;
    st.set("command", "synth");
    st.set("config.field", f.field);
    st.set("config.dims", std::to_string(dims[0]) + "," + std::to_string(dims[1]) + "," + std::to_string(dims[2]));
    st.set("config.lower", join(lo));
    st.set("config.upper", join(hi));
    st.set("config.seed", f.seed);
    const auto [mn, mx] = std::minmax_element(vol.data.begin(), vol.data.end());
    st.set("volume.min", static_cast<double>(static_cast<float>(*mn)));
    st.set("volume.max", static_cast<double>(static_cast<float>(*mx)));
    st.save(stats_path_for(f.stats, f.out));
    return exit_ok;
}

struct TrainFlags {
    std::string volume;
    std::vector<std::size_t> dims;
    std::string activation = "sine";
    TrainConfig cfg;
    std::vector<double> domain_lower{-1, -1, -1}, domain_upper{1, 1, 1};
    std::size_t log_every = 10;
    unsigned threads = 1;
    std::string out, stats;
};

int cmd_train(TrainFlags f)
{
    const auto dims = to_dims(f.dims);
    f.cfg.activation = parse_activation(f.activation);
    f.cfg.domain_lower = to_vec3(f.domain_lower, "--domain-lower");
    f.cfg.domain_upper = to_vec3(f.domain_upper, "--domain-upper");
    const ScalarVolume vol = read_volume_f32(f.volume, dims);
    TrainReport rep;
    const MlpNetwork net = train(vol, f.cfg, &rep, [&](std::size_t epoch, double loss) {
        if (f.log_every && (epoch % f.log_every == 0 || epoch + 1 == f.cfg.epochs))
            std::cerr << "epoch " << epoch << " loss " << format_double(loss) << '\n';
    });
    save_network(net, f.out);

    const ScalarVolume rec = dense_reconstruct(net, dims, f.threads);
    StatsFile st;
    st.set("command", "train");
    st.set("input.volume", f.volume);
    st.set("config.dims", std::to_string(dims[0]) + "," + std::to_string(dims[1]) + "," + std::to_string(dims[2]));
    st.set("config.activation", f.activation);
    st.set("config.width", static_cast<std::uint64_t>(f.cfg.width));
    st.set("config.depth", static_cast<std::uint64_t>(f.cfg.depth));
    st.set("config.epochs", static_cast<std::uint64_t>(f.cfg.epochs));
    st.set("config.learning_rate", f.cfg.learning_rate);
    st.set("config.final_lr_fraction", f.cfg.final_lr_fraction);
    st.set("config.batch_size", static_cast<std::uint64_t>(f.cfg.batch_size));
    st.set("config.seed", f.cfg.seed);
    st.set("config.omega0", f.cfg.omega0);
    st.set("config.domain_lower", join(f.cfg.domain_lower));
    st.set("config.domain_upper", join(f.cfg.domain_upper));
    st.set("report.epochs_run", static_cast<std::uint64_t>(rep.epochs_run));
    st.set("report.final_loss", rep.final_loss);
    st.set("report.rmse", rmse(vol, rec));
    try {
        st.set("report.psnr_db", psnr(vol, rec));
    } catch (const UndefinedMetricError&) {
        st.set("report.psnr_db", "undefined");
    }
    st.save(stats_path_for(f.stats, f.out));
    return exit_ok;
}

struct ExtractFlags {
    std::string weights;
    BoundFlags bound;
    std::size_t depth = 9;
    double iso = 0.0;
    bool truth = false;
    unsigned threads = 1;
    std::string out, stats;
};

int cmd_extract(const ExtractFlags& f)
{
    const MlpNetwork net = load_network(f.weights);
    ExtractConfig cfg;
    cfg.iso_value = f.iso;
    cfg.max_depth = f.depth;
    cfg.bound = f.bound.resolve();
    cfg.threads = f.threads;
    cfg.validate(net);

    StatsFile st;
    st.set("command", "extract");
    st.set("input.weights", f.weights);
    put_network_info(st, net);
    put_bound_config(st, cfg.bound, net.input_dim);
    st.set("config.depth", static_cast<std::uint64_t>(cfg.max_depth));
    st.set("config.iso", cfg.iso_value);
    st.set("config.cells_per_axis", static_cast<std::uint64_t>(cfg.cells_per_axis()));
    st.set("config.truth", f.truth);

    const Interval whole = ra_output_range(net, net.domain(), RaVariant::full());
    const bool outside = cfg.iso_value < whole.lo || cfg.iso_value > whole.hi;
    if (outside) std::cerr << "warning: iso value " << format_double(cfg.iso_value) << " lies outside the network range\n";
    st.set("warning.iso_outside_network_range", outside);

    const Extraction ex = extract_surface(net, cfg);
    export_obj(ex.surface.mesh, f.out);
    const auto& c = ex.active.counters;
    st.set("result.active_cells", static_cast<std::uint64_t>(ex.active.cells.size()));
    st.set("result.root_pruned", ex.active.root_pruned);
    st.set("result.triangles", static_cast<std::uint64_t>(ex.surface.mesh.triangles.size()));
    st.set("counters.nodes_visited", c.nodes_visited);
    st.set("counters.bound_queries", c.bound_queries);
    st.set("counters.inr_point_evals", c.inr_point_evals);
    st.set("counters.pruned_nodes", c.pruned_nodes);
    st.set("counters.mean_pruned_volume", ex.active.mean_pruned_volume());
    if (f.truth) {
        const ActiveCellSet truth = true_active_cells(net, cfg);
        const CellScore s = score_cells(ex.active, truth);
        st.set("score.tp", s.tp);
        st.set("score.fp", s.fp);
        st.set("score.tn", s.tn);
        st.set("score.fn", s.fn);
        st.set("score.fpr", s.fpr);
        st.set("score.fnr", s.fnr);
        st.set("score.dense_inr_point_evals", truth.counters.inr_point_evals);
    }
    st.save(stats_path_for(f.stats, f.out));
    return exit_ok;
}

struct RaycastFlags {
    std::string weights;
    BoundFlags bound;
    std::size_t width = 256, height = 256;
    std::vector<double> eye{0, 0, 3}, target{0, 0, 0}, up{0, 1, 0};
    double fov = 45.0;
    double min_segment_fraction = 1.0 / 16384.0;
    int refine = 60;
    unsigned threads = 1;
    std::string out, stats;
};

int cmd_raycast(const RaycastFlags& f)
{
    const MlpNetwork net = load_network(f.weights);
    Camera cam;
    cam.eye = to_vec3(f.eye, "--eye");
    cam.target = to_vec3(f.target, "--target");
    cam.up = to_vec3(f.up, "--up");
    cam.fov_y_deg = f.fov;
    cam.width = f.width;
    cam.height = f.height;
    cam.validate();
    RaycastConfig cfg;
    cfg.bound = f.bound.resolve();
    cfg.min_segment_fraction = f.min_segment_fraction;
    cfg.refine_iterations = f.refine;
    cfg.threads = f.threads;
    if (!(cfg.min_segment_fraction > 0.0 && cfg.min_segment_fraction <= 1.0))
        throw ContractError("--min-segment-fraction must be in (0, 1]");
    if (cfg.refine_iterations < 0) throw ContractError("--refine-iterations must be non-negative");

    const DepthImage img = raycast(net, cam, cfg);
    write_pgm(img, f.out);
    StatsFile st;
    st.set("command", "raycast");
    st.set("input.weights", f.weights);
    put_network_info(st, net);
    put_bound_config(st, cfg.bound, net.input_dim);
    st.set("config.width", static_cast<std::uint64_t>(cam.width));
    st.set("config.height", static_cast<std::uint64_t>(cam.height));
    st.set("config.eye", join(cam.eye));
    st.set("config.target", join(cam.target));
    st.set("config.up", join(cam.up));
    st.set("config.fov_y_deg", cam.fov_y_deg);
    st.set("config.min_segment_fraction", cfg.min_segment_fraction);
    st.set("config.refine_iterations", cfg.refine_iterations);
    st.set("result.depth_scale", img.depth_scale);
    st.set("result.hit_pixels", static_cast<std::uint64_t>(img.hit_count()));
    st.set("counters.bound_queries", img.counters.bound_queries);
    st.set("counters.point_evals", img.counters.point_evals);
    st.save(stats_path_for(f.stats, f.out));
    return exit_ok;
}

struct EvalDistFlags {
    std::string weights;
    std::size_t blocks = 100;
    double block_fraction = 0.125;
    std::size_t samples = 1000000;
    std::size_t sample_k = 100;
    std::size_t bins = 64;
    std::uint64_t seed = 1;
    std::string ra_ua_inner = "ra-full";
    unsigned threads = 1;
    std::string out;
};

int cmd_eval_dist(const EvalDistFlags& f)
{
    const MlpNetwork net = load_network(f.weights);
    if (f.blocks == 0) throw ContractError("--blocks must be positive");
    if (!(f.block_fraction > 0.0 && f.block_fraction <= 1.0)) throw ContractError("--block-fraction must be in (0, 1]");
    if (f.samples == 0) throw ContractError("--samples must be positive");
    if (f.sample_k < 2) throw ContractError("--sample-k must be at least 2");
    if (f.bins == 0) throw ContractError("--bins must be positive");
    BoundConfig inner;
    inner.ra_ua_inner = parse_method(f.ra_ua_inner);
    inner.validate(net.input_dim);
    const RaVariant variant = inner.variant_for(inner.ra_ua_inner, net.input_dim);

    Vec3 extent{};
    for (std::size_t d = 0; d < net.input_dim; ++d) extent[d] = f.block_fraction * (net.domain_upper[d] - net.domain_lower[d]);
    const auto blocks = random_blocks(net, f.blocks, extent, f.seed);

    StatsFile st;
    st.set("command", "eval-dist");
    st.set("input.weights", f.weights);
    put_network_info(st, net);
    st.set("config.blocks", static_cast<std::uint64_t>(f.blocks));
    st.set("config.block_fraction", f.block_fraction);
    st.set("config.samples", static_cast<std::uint64_t>(f.samples));
    st.set("config.sample_k", static_cast<std::uint64_t>(f.sample_k));
    st.set("config.bins", static_cast<std::uint64_t>(f.bins));
    st.set("config.histogram_range", "sample-min-max");
    st.set("config.seed", f.seed);
    st.set("config.ra_ua_inner", f.ra_ua_inner);

    const char* names[3] = {"up", "ra-ua", "sample"};
    double sum[3] = {0, 0, 0};
    std::size_t defined[3] = {0, 0, 0};
    st.begin_table("blocks", {"index", "lower", "mc_mean", "mc_std", "up_mu", "up_sigma", "raua_mu", "raua_sigma",
                              "sample_mu", "sample_sigma", "kl_up", "kl_raua", "kl_sample"});
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const Box& box = blocks[b];
        const McHistogram h = mc_sample_region(net, box, f.samples, derive_seed(f.seed, 2 * b), f.bins, f.threads);
        const GaussianEstimate est[3] = {up_output_estimate(net, box), ra_ua_estimate(net, box, variant),
                                         sample_gaussian_baseline(net, box, f.sample_k, derive_seed(f.seed, 2 * b + 1))};
        std::vector<std::string> row{std::to_string(b), join(box.lower, net.input_dim), format_double(h.mean),
                                     format_double(h.stddev)};
        for (const auto& e : est) {
            row.push_back(format_double(e.mu));
            row.push_back(format_double(e.sigma));
        }
        for (int m = 0; m < 3; ++m) {
            try {
                const double kl = kl_divergence(h, est[m]);
                sum[m] += kl;
                ++defined[m];
                row.push_back(format_double(kl));
            } catch (const UndefinedMetricError&) {
                row.push_back("undefined");
            }
        }
        st.row(row);
        if ((b + 1) % 10 == 0) std::cerr << "block " << b + 1 << "/" << blocks.size() << '\n';
    }
    st.end_table();
    st.begin_table("kl_mean", {"method", "mean_kl_nats", "blocks_defined"});
    for (int m = 0; m < 3; ++m)
        st.row({names[m], defined[m] ? format_double(sum[m] / static_cast<double>(defined[m])) : "undefined",
                std::to_string(defined[m])});
    st.end_table();
    st.save(f.out);
    return exit_ok;
}

struct BenchFlags {
    std::string weights;
    BoundFlags bound;
    std::vector<std::string> methods{"up", "ra-full", "ra-fixed", "dense"};
    bool all = false;
    std::size_t depth = 9;
    double iso = 0.0;
    std::string out;
};

int cmd_bench(const BenchFlags& f)
{
    const MlpNetwork net = load_network(f.weights);
    ExtractConfig cfg;
    cfg.iso_value = f.iso;
    cfg.max_depth = f.depth;
    cfg.bound = f.bound.resolve();
    std::vector<BoundMethod> methods;
    if (f.all)
        methods.assign(std::begin(all_methods), std::end(all_methods));
    else
        for (const auto& m : f.methods) methods.push_back(parse_method(m));
    if (methods.empty()) throw ContractError("no methods selected");
    cfg.validate(net);

    const auto rows = bench_extraction(net, cfg, methods);
    StatsFile st;
    st.set("command", "bench");
    st.set("input.weights", f.weights);
    put_network_info(st, net);
    put_bound_config(st, cfg.bound, net.input_dim);
    st.set("config.depth", static_cast<std::uint64_t>(cfg.max_depth));
    st.set("config.iso", cfg.iso_value);
    st.set("config.timing_threads", 1);
    st.begin_table("methods", {"method", "nodes_visited", "bound_queries", "inr_point_evals", "pruned_nodes",
                               "mean_pruned_volume", "active_cells", "triangles", "fpr", "fnr"});
    for (const auto& r : rows)
        st.row({std::string(to_string(r.method)), std::to_string(r.counters.nodes_visited),
                std::to_string(r.counters.bound_queries), std::to_string(r.counters.inr_point_evals),
                std::to_string(r.counters.pruned_nodes), format_double(r.mean_pruned_volume), std::to_string(r.active_cells),
                std::to_string(r.triangles), format_double(r.score.fpr), format_double(r.score.fnr)});
    st.end_table();
    // Wall-clock section; not reproducible run to run.
    st.begin_table("timing", {"method", "acp_seconds", "inr_seconds", "mc_seconds", "relative_inference_cost"});
    for (const auto& r : rows)
        st.row({std::string(to_string(r.method)), format_double(r.timings.acp_seconds), format_double(r.timings.inr_seconds),
                format_double(r.timings.mc_seconds), format_double(r.timings.relative_inference_cost)});
    st.end_table();
    auto cost = [&](BoundMethod m) {
        for (const auto& r : rows)
            if (r.method == m) return r.timings.relative_inference_cost;
        return std::numeric_limits<double>::quiet_NaN();
    };
    const double fixed = cost(BoundMethod::RaFixed), up = cost(BoundMethod::UP), full = cost(BoundMethod::RaFull);
    if (fixed == fixed && up == up && full == full)
        st.set("timing.ordering_rafixed_lt_up_lt_rafull", fixed < up && up < full);
    st.save(f.out);
    return exit_ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"nira: bounds, iso-surfaces and ray casting for small MLP implicit neural representations"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for all subcommands");

    SynthFlags synth;
    auto* s = app.add_subcommand("synth", "Sample a synthetic field to a raw f32 volume");
    s->add_option("--field", synth.field, "wave, gaussians, sphere, torus")->capture_default_str();
    s->add_option("--dims", synth.dims, "nx,ny,nz")->delimiter(',')->capture_default_str();
    s->add_option("--lower", synth.lower, "Domain lower corner")->delimiter(',')->capture_default_str();
    s->add_option("--upper", synth.upper, "Domain upper corner")->delimiter(',')->capture_default_str();
    s->add_option("--seed", synth.seed, "Seed for the gaussians field")->capture_default_str();
    s->add_option("--out", synth.out, "Output volume file")->required();
    s->add_option("--stats", synth.stats, "Stats file (default: <out>.stats)");

    TrainFlags tr;
    auto* t = app.add_subcommand("train", "Fit an MLP to a volume");
    t->add_option("--volume", tr.volume, "Raw little-endian f32 volume, x fastest")->required();
    t->add_option("--dims", tr.dims, "nx,ny,nz (nz = 1 for a 2-D field)")->delimiter(',')->required();
    t->add_option("--activation", tr.activation, "sine, relu, elu")->capture_default_str();
    t->add_option("--width", tr.cfg.width, "Hidden width")->capture_default_str();
    t->add_option("--depth", tr.cfg.depth, "Number of linear layers")->capture_default_str();
    t->add_option("--epochs", tr.cfg.epochs, "Training epochs")->capture_default_str();
    t->add_option("--lr", tr.cfg.learning_rate, "Initial learning rate")->capture_default_str();
    t->add_option("--final-lr-fraction", tr.cfg.final_lr_fraction, "Cosine schedule floor, fraction of --lr")->capture_default_str();
    t->add_option("--batch", tr.cfg.batch_size, "Mini-batch size")->capture_default_str();
    t->add_option("--seed", tr.cfg.seed, "Initialization and shuffling seed")->capture_default_str();
    t->add_option("--omega0", tr.cfg.omega0, "First-layer frequency scale (sine)")->capture_default_str();
    t->add_option("--domain-lower", tr.domain_lower, "World position of voxel (0,0,0)")->delimiter(',')->capture_default_str();
    t->add_option("--domain-upper", tr.domain_upper, "World position of the last voxel")->delimiter(',')->capture_default_str();
    t->add_option("--log-every", tr.log_every, "Progress line every N epochs (0 = quiet)")->capture_default_str();
    t->add_option("--threads", tr.threads, "Worker threads for the final reconstruction")->capture_default_str();
    t->add_option("--out", tr.out, "Output weight file")->required();
    t->add_option("--stats", tr.stats, "Stats file (default: <out>.stats)");

    ExtractFlags ex;
    auto* e = app.add_subcommand("extract", "Hierarchical iso-surface extraction to OBJ");
    e->add_option("--weights", ex.weights, "inr-weights-v1 file")->required();
    ex.bound.add(e);
    e->add_option("--depth", ex.depth, "Maximum kd-tree depth (multiple of 3)")->capture_default_str();
    e->add_option("--iso", ex.iso, "Iso value in data units")->capture_default_str();
    e->add_flag("--truth", ex.truth, "Score the prediction against the dense ground truth");
    e->add_option("--threads", ex.threads, "Worker threads")->capture_default_str();
    e->add_option("--out", ex.out, "Output OBJ file")->required();
    e->add_option("--stats", ex.stats, "Stats file (default: <out>.stats)");

    RaycastFlags rc;
    auto* r = app.add_subcommand("raycast", "Ray cast the zero level set to a 16-bit PGM depth image");
    r->add_option("--weights", rc.weights, "inr-weights-v1 file")->required();
    rc.bound.add(r);
    r->add_option("--width", rc.width, "Image width")->capture_default_str();
    r->add_option("--height", rc.height, "Image height")->capture_default_str();
    r->add_option("--eye", rc.eye, "Camera position")->delimiter(',')->capture_default_str();
    r->add_option("--target", rc.target, "Look-at point")->delimiter(',')->capture_default_str();
    r->add_option("--up", rc.up, "Up vector")->delimiter(',')->capture_default_str();
    r->add_option("--fov", rc.fov, "Vertical field of view, degrees")->capture_default_str();
    r->add_option("--min-segment-fraction", rc.min_segment_fraction, "Minimum segment length / clipped ray length")
        ->capture_default_str();
    r->add_option("--refine-iterations", rc.refine, "Bisection steps on a bracketed hit")->capture_default_str();
    r->add_option("--threads", rc.threads, "Worker threads")->capture_default_str();
    r->add_option("--out", rc.out, "Output PGM file")->required();
    r->add_option("--stats", rc.stats, "Stats file (default: <out>.stats)");

    EvalDistFlags ev;
    auto* d = app.add_subcommand("eval-dist", "KL divergence of Monte Carlo histograms from UP, RA-UA and SAMPLE estimates");
    d->add_option("--weights", ev.weights, "inr-weights-v1 file")->required();
    d->add_option("--blocks", ev.blocks, "Number of random blocks")->capture_default_str();
    d->add_option("--block-fraction", ev.block_fraction, "Block edge as a fraction of the domain edge")->capture_default_str();
    d->add_option("--samples", ev.samples, "Monte Carlo samples per block")->capture_default_str();
    d->add_option("--sample-k", ev.sample_k, "Samples for the SAMPLE baseline")->capture_default_str();
    d->add_option("--bins", ev.bins, "Histogram bins over the sample range")->capture_default_str();
    d->add_option("--seed", ev.seed, "Seed for block placement and sampling")->capture_default_str();
    d->add_option("--ra-ua-inner", ev.ra_ua_inner, "Range-analysis variant used inside ra-ua")->capture_default_str();
    d->add_option("--threads", ev.threads, "Worker threads for Monte Carlo sampling")->capture_default_str();
    d->add_option("--out", ev.out, "Report (nira-stats-v1)")->required();

    BenchFlags bn;
    auto* b = app.add_subcommand("bench", "Phase timings, relative bound cost and pruning per method");
    b->add_option("--weights", bn.weights, "inr-weights-v1 file")->required();
    bn.bound.add(b, false);
    b->add_option("--methods", bn.methods, "Comma-separated methods")->delimiter(',')->capture_default_str();
    b->add_flag("--all", bn.all, "Run all seven methods");
    b->add_option("--depth", bn.depth, "Maximum kd-tree depth (multiple of 3)")->capture_default_str();
    b->add_option("--iso", bn.iso, "Iso value in data units")->capture_default_str();
    b->add_option("--out", bn.out, "Report (nira-stats-v1)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& err) {
        return app.exit(err);
    } catch (const CLI::CallForAllHelp& err) {
        return app.exit(err);
    } catch (const CLI::ParseError& err) {
        app.exit(err);
        return exit_usage;
    }

    try {
        if (*s) return cmd_synth(synth);
        if (*t) return cmd_train(tr);
        if (*e) return cmd_extract(ex);
        if (*r) return cmd_raycast(rc);
        if (*d) return cmd_eval_dist(ev);
        if (*b) return cmd_bench(bn);
    } catch (const NumericalError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return exit_numerical;
    } catch (const Error& err) {
        std::cerr << "error: " << err.what() << '\n';
        return exit_usage;
    }
    return exit_usage;
}
