// qtomo: batch front door for the tomography library. Five subcommands
// (simulate, reconstruct, mlfit, test, image), each driven by a JSON config.
// Every report embeds the SHA-256 of its inputs; no timestamps, so re-running
// a command on the same inputs yields byte-identical outputs.
//
// Exit codes: 0 success, 2 config error, 3 I/O error, 4 efficiency-domain
// violation, 1 anything else.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "qtomo/applications.hpp"
#include "qtomo/dataset.hpp"
#include "qtomo/detector_sim.hpp"
#include "qtomo/errors.hpp"
#include "qtomo/estimators.hpp"
#include "qtomo/imaging.hpp"
#include "qtomo/maxlik.hpp"
#include "qtomo/multimode.hpp"
#include "qtomo/states.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qtomo;

namespace {

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for hashing: " + path);
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[65536];
    while (in) {
        in.read(buf, sizeof buf);
        if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xf]);
    }
    return out;
}

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
}

template <typename T>
T require(const json& j, const char* key) {
    if (!j.contains(key))
        throw ConfigError(std::string("config: missing required field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: bad value for '") + key + "': " + e.what());
    }
}

Complex complex_field(const json& j, const char* key, Complex def = {0.0, 0.0}) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2)
        return {v.at(0).get<double>(), v.at(1).get<double>()};
    throw ConfigError(std::string("config: '") + key + "' must be a number or [re, im]");
}

// Output paths are taken relative to --out (when given); parent directories
// are created.
struct Paths {
    std::string out_dir;

    std::string resolve(const std::string& p) const {
        fs::path pp(p);
        if (!out_dir.empty() && pp.is_relative()) pp = fs::path(out_dir) / pp;
        if (pp.has_parent_path()) fs::create_directories(pp.parent_path());
        return pp.string();
    }
};

void write_report(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("failed writing: " + path);
}

json provenance(const std::vector<std::pair<std::string, std::string>>& files) {
    json j = json::object();
    for (const auto& [role, path] : files) j[role] = {{"path", path}, {"sha256", sha256_file(path)}};
    return j;
}

// QTOMO_SEED, when set, wins over any config seed.
std::optional<std::uint64_t> env_seed() {
    const char* v = std::getenv("QTOMO_SEED");
    if (v == nullptr || *v == '\0') return std::nullopt;
    char* end = nullptr;
    const unsigned long long parsed = std::strtoull(v, &end, 10);
    if (end == v || *end != '\0') throw ConfigError("QTOMO_SEED is not an unsigned integer");
    return static_cast<std::uint64_t>(parsed);
}

std::uint64_t pick_seed(const json& cfg) {
    if (const auto env = env_seed()) {
        std::cerr << "note: seed overridden by QTOMO_SEED=" << *env << '\n';
        return *env;
    }
    if (!cfg.contains("seed"))
        throw ConfigError("config: missing required field 'seed' (reproducibility contract)");
    return require<std::uint64_t>(cfg, "seed");
}

PhasePolicy phase_policy(const json& cfg) {
    if (!cfg.contains("phases")) return PhasePolicy::uniform_random();
    const json& p = cfg.at("phases");
    const std::string kind = require<std::string>(p, "kind");
    if (kind == "uniform_random") return PhasePolicy::uniform_random();
    if (kind == "equally_spaced") return PhasePolicy::equally_spaced(require<int>(p, "count"));
    throw ConfigError("config: phases.kind must be uniform_random or equally_spaced");
}

int cmd_simulate(const json& cfg, const std::string& config_path, int threads,
                 const Paths& paths) {
    const std::uint64_t seed = pick_seed(cfg);
    const std::size_t n = require<std::size_t>(cfg, "n_records");
    const double eta = cfg.value("eta", 1.0);
    const std::string output = paths.resolve(require<std::string>(cfg, "output"));
    if (!cfg.contains("state")) throw ConfigError("config: missing required field 'state'");
    StateSpec spec;
    try {
        from_json(cfg.at("state"), spec);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: bad state spec: ") + e.what());
    }

    std::string detection = cfg.value("detection", std::string());
    if (spec.kind == StateKind::twin_beam) {
        if (detection.empty()) detection = "single_lo";
        if (detection == "single_lo") {
            DataSet ds = sample_twin_beam_homodyne(spec.xi, n, eta, seed, threads);
            ds.save(output);
        } else if (detection == "two_lo") {
            const Complex displace = complex_field(cfg, "displace");
            TwoModeDataSet ds = sample_twin_beam_two_lo(spec.xi, n, eta, seed, displace, threads);
            ds.save(output);
        } else {
            throw ConfigError("config: detection must be single_lo or two_lo for twin_beam");
        }
    } else {
        if (!detection.empty() && detection != "homodyne")
            throw ConfigError("config: single-mode simulation only supports homodyne detection");
        DataSet ds = sample_homodyne(spec, n, eta, phase_policy(cfg), seed, threads);
        ds.save(output);
    }
    const json state_echo = cfg.at("state");
    std::cout << "simulate: wrote " << output << " (N=" << n << ", eta=" << eta
              << ", state=" << state_echo.value("kind", std::string("?")) << ", seed=" << seed
              << ")\n";
    (void)config_path;
    return 0;
}

int cmd_reconstruct(const json& cfg, const std::string& config_path, int threads,
                    const Paths& paths) {
    const std::string data_path = require<std::string>(cfg, "data");
    const std::string report_path = paths.resolve(require<std::string>(cfg, "report"));
    const std::string mode = cfg.value("mode", std::string("matrix"));
    const int cutoff = require<int>(cfg, "cutoff");

    json rep;
    rep["schema"] = "qtomo-report-v1";
    rep["command"] = "reconstruct";
    rep["mode"] = mode;

    if (mode == "matrix") {
        DataSet data = DataSet::load(data_path);
        const double eta = cfg.value("eta", data.eta);
        Reconstruction rec = reconstruct_matrix(data, cutoff, eta, threads);
        json body;
        to_json(body, rec);
        rep["result"] = std::move(body);
        rep["eta"] = eta;
        rep["n_records"] = data.size();
        if (cfg.contains("table"))
            save_reconstruction_csv(rec, paths.resolve(cfg.at("table").get<std::string>()));
        std::cout << "reconstruct: rho00 = " << rec.rho.entries(0, 0).real() << " +- "
                  << rec.std_error(0, 0) << " (N=" << data.size() << ")\n";
    } else if (mode == "joint_pmf") {
        DataSet data = DataSet::load(data_path);
        const double eta = cfg.value("eta", data.eta);
        JointPmf pmf = reconstruct_joint_pmf(data, cutoff, eta, threads);
        json p = json::array(), se = json::array(), im = json::array();
        for (Eigen::Index i = 0; i < pmf.p.rows(); ++i)
            for (Eigen::Index j = 0; j < pmf.p.cols(); ++j) {
                p.push_back(pmf.p(i, j));
                se.push_back(pmf.std_error(i, j));
                im.push_back(pmf.imag(i, j));
            }
        rep["result"] = {{"schema", "qtomo-joint-pmf-v1"}, {"cutoff", cutoff},
                         {"p", std::move(p)},             {"std_error", std::move(se)},
                         {"imag", std::move(im)},         {"n", pmf.n}};
        rep["eta"] = eta;
        if (cfg.contains("table"))
            save_joint_pmf_csv(pmf, paths.resolve(cfg.at("table").get<std::string>()));
        std::cout << "reconstruct: joint pmf p(0,0) = " << pmf.p(0, 0) << " +- "
                  << pmf.std_error(0, 0) << " (N=" << pmf.n << ")\n";
    } else if (mode == "total_pmf") {
        DataSet data = DataSet::load(data_path);
        const double eta = cfg.value("eta", data.eta);
        TotalPmf pmf = reconstruct_total_pmf(data, cutoff, eta, threads);
        rep["result"] = {{"schema", "qtomo-total-pmf-v1"},
                         {"cutoff", cutoff},
                         {"p", pmf.p},
                         {"std_error", pmf.std_error},
                         {"imag", pmf.imag},
                         {"n", pmf.n}};
        rep["eta"] = eta;
        std::cout << "reconstruct: total pmf p(0) = " << pmf.p[0] << " +- " << pmf.std_error[0]
                  << " (N=" << pmf.n << ")\n";
    } else {
        throw ConfigError("config: mode must be matrix, joint_pmf or total_pmf");
    }

    rep["inputs"] = provenance({{"config", config_path}, {"data", data_path}});
    write_report(rep, report_path);
    std::cout << "reconstruct: wrote " << report_path << '\n';
    return 0;
}

MlOptions ml_options(const json& cfg, int threads) {
    MlOptions opts;
    opts.restarts = cfg.value("restarts", opts.restarts);
    opts.max_iter = cfg.value("max_iter", opts.max_iter);
    opts.tol = cfg.value("tol", opts.tol);
    opts.seed = cfg.value("ml_seed", opts.seed);
    opts.threads = threads;
    return opts;
}

int cmd_mlfit(const json& cfg, const std::string& config_path, int threads, const Paths& paths) {
    const std::string data_path = require<std::string>(cfg, "data");
    const std::string report_path = paths.resolve(require<std::string>(cfg, "report"));
    const std::string mode = cfg.value("mode", std::string("povm"));
    DataSet data = DataSet::load(data_path);

    json rep;
    rep["schema"] = "qtomo-report-v1";
    rep["command"] = "mlfit";
    rep["mode"] = mode;
    if (mode == "povm") {
        const int cutoff = require<int>(cfg, "cutoff");
        MlFit fit = ml_reconstruct(data, cutoff, ml_options(cfg, threads));
        json body;
        to_json(body, fit);
        rep["result"] = std::move(body);
        std::cout << "mlfit: logL = " << fit.log_likelihood
                  << (fit.converged ? "" : " (not converged)") << ", rho00 = "
                  << fit.rho.entries(0, 0).real() << '\n';
    } else if (mode == "gaussian") {
        GaussianFit fit = ml_gaussian_fit(data, ml_options(cfg, threads));
        json body;
        to_json(body, fit);
        rep["result"] = std::move(body);
        std::cout << "mlfit: logL = " << fit.log_likelihood << ", n_th = " << fit.params.n_th()
                  << ", n_sq = " << fit.params.n_sq() << ", n_coh = " << fit.params.n_coh()
                  << '\n';
    } else {
        throw ConfigError("config: mode must be povm or gaussian");
    }

    rep["inputs"] = provenance({{"config", config_path}, {"data", data_path}});
    write_report(rep, report_path);
    std::cout << "mlfit: wrote " << report_path << '\n';
    return 0;
}

int cmd_test(const json& cfg, const std::string& config_path, int threads, const Paths& paths) {
    const std::string which = require<std::string>(cfg, "test");
    const std::string report_path = paths.resolve(require<std::string>(cfg, "report"));
    const int blocks = cfg.value("blocks", 20);

    json rep;
    rep["schema"] = "qtomo-report-v1";
    rep["command"] = "test";
    rep["test"] = which;
    std::vector<std::pair<std::string, std::string>> inputs{{"config", config_path}};

    if (which == "b") {
        const std::string data_path = require<std::string>(cfg, "data");
        DataSet data = DataSet::load(data_path);
        inputs.emplace_back("data", data_path);
        const int cutoff = require<int>(cfg, "cutoff");
        const std::string mode = cfg.value("mode", std::string("noisy_state"));
        EtaMode em;
        if (mode == "noisy_state")
            em = EtaMode::noisy_state;
        else if (mode == "deconvolved")
            em = EtaMode::deconvolved;
        else
            throw ConfigError("config: mode must be noisy_state or deconvolved");
        NonclassicalityReport r = test_b(data, cutoff, em, blocks, threads);
        json body;
        to_json(body, r);
        rep["result"] = std::move(body);
        std::cout << "test b: verdict count = " << r.verdict << " (N=" << r.n << ")\n";
    } else if (which == "c") {
        const std::string data_path = require<std::string>(cfg, "data");
        TwoModeDataSet data = TwoModeDataSet::load(data_path);
        inputs.emplace_back("data", data_path);
        NonclassicalityReport r = test_c(data, blocks, threads);
        json body;
        to_json(body, r);
        rep["result"] = std::move(body);
        std::cout << "test c: C = " << r.value[0] << " +- " << r.std_error[0]
                  << ", verdict = " << r.verdict << '\n';
    } else if (which == "sr_fidelity") {
        const std::string data_path = require<std::string>(cfg, "data");
        DataSet data = DataSet::load(data_path);
        inputs.emplace_back("data", data_path);
        if (!cfg.contains("reduction")) throw ConfigError("config: missing 'reduction' spec");
        const json& rj = cfg.at("reduction");
        ReducedStateSpec spec;
        const std::string kind = require<std::string>(rj, "kind");
        if (kind == "heterodyne")
            spec.kind = ReducedStateSpec::Kind::heterodyne;
        else if (kind == "photocount")
            spec.kind = ReducedStateSpec::Kind::photocount;
        else
            throw ConfigError("config: reduction.kind must be heterodyne or photocount");
        spec.xi = complex_field(rj, "xi");
        spec.eta_r = rj.value("eta_r", 1.0);
        spec.alpha = complex_field(rj, "alpha");
        spec.n = rj.value("n", 0);
        SrFidelity f = sr_fidelity(spec, data, blocks, threads);
        json body;
        to_json(body, f);
        rep["result"] = std::move(body);
        std::cout << "test sr_fidelity: F = " << f.f << " +- " << f.std_error
                  << " (theory " << f.f_theory << ")\n";
    } else if (which == "process") {
        const std::uint64_t seed = pick_seed(cfg);
        const Complex z = complex_field(cfg, "z");
        const Complex xi = complex_field(cfg, "xi");
        const double eta = cfg.value("eta", 1.0);
        const std::size_t n_records = require<std::size_t>(cfg, "n_records");
        const int cutoff = require<int>(cfg, "cutoff");
        ProcessMatrix pm =
            estimate_process_matrix(z, xi, eta, n_records, cutoff, cfg.value("blocks", 150),
                                    seed, threads);
        json body;
        to_json(body, pm);
        rep["result"] = std::move(body);
        if (cfg.contains("table"))
            save_process_diag_csv(pm, paths.resolve(cfg.at("table").get<std::string>()));
        std::cout << "test process: A00 = " << pm.a_diag[0] << " +- " << pm.a_std_error[0]
                  << " (theory " << pm.a_theory[0] << ")"
                  << (pm.variance_warning ? " [variance warning: |xi| < 1/2]" : "") << '\n';
    } else {
        throw ConfigError("config: test must be b, c, sr_fidelity or process");
    }

    rep["inputs"] = provenance(inputs);
    write_report(rep, report_path);
    std::cout << "test: wrote " << report_path << '\n';
    return 0;
}

int cmd_image(const json& cfg, const std::string& config_path, int threads, const Paths& paths) {
    const std::string report_path = paths.resolve(require<std::string>(cfg, "report"));
    std::vector<std::pair<std::string, std::string>> inputs{{"config", config_path}};

    if (!cfg.contains("source")) throw ConfigError("config: missing 'source'");
    const json& src = cfg.at("source");
    const std::string src_kind = require<std::string>(src, "kind");

    // stage 1: profiles (analytic disc, projected raster image, or none when
    // the source is an already-sampled spot file)
    RadonProfileSet profiles;
    std::optional<DataSet> spots;
    std::optional<DensityMatrix> reference;
    if (src_kind == "disc") {
        const double radius = require<double>(src, "radius");
        profiles = disc_profiles(radius, src.value("angles", 100),
                                 src.value("half_range", radius + 0.5),
                                 src.value("step", 0.002));
    } else if (src_kind == "image_csv") {
        const std::string path = require<std::string>(src, "path");
        inputs.emplace_back("image", path);
        ImagePlane img = load_image_csv(path);
        const int f = src.value("angles", 100);
        std::vector<double> angles(f);
        for (int a = 0; a < f; ++a) angles[a] = M_PI * a / f;
        profiles = radon_project(img, angles, threads);
    } else if (src_kind == "spots") {
        const std::string path = require<std::string>(src, "path");
        inputs.emplace_back("spots", path);
        spots = DataSet::load(path);
    } else {
        throw ConfigError("config: source.kind must be disc, image_csv or spots");
    }

    // stage 2: optionally sample spots from the profiles
    if (cfg.contains("spots")) {
        if (profiles.empty())
            throw ConfigError("config: spot sampling needs a profile source");
        const json& sj = cfg.at("spots");
        const std::uint64_t seed = pick_seed(sj);
        spots = sample_spots(profiles, require<std::size_t>(sj, "n_per_angle"), seed);
        if (sj.contains("save"))
            spots->save(paths.resolve(sj.at("save").get<std::string>()));
    }

    // reference matrix for the distance table
    if (cfg.contains("reference")) {
        const json& rj = cfg.at("reference");
        if (require<std::string>(rj, "kind") != "disc")
            throw ConfigError("config: reference.kind must be disc");
        reference = disc_matrix(require<double>(rj, "radius"), cfg.value("embed", 32));
    } else if (src_kind == "disc") {
        reference = disc_matrix(require<double>(src, "radius"), cfg.value("embed", 32));
    }

    std::vector<int> cutoffs = cfg.value("cutoffs", std::vector<int>{2, 4, 8, 16, 32});
    if (cutoffs.empty()) throw ConfigError("config: cutoffs must be non-empty");
    const int d_max = *std::max_element(cutoffs.begin(), cutoffs.end());

    // stage 3: reconstruct at each cutoff; spots win over profiles when both
    // are present (that is the point of sampling them)
    const bool from_spots = spots.has_value();
    auto reconstruct_at = [&](int d_h) {
        return from_spots ? image_reconstruct(*spots, d_h, threads)
                          : image_reconstruct_profiles(profiles, d_h, threads);
    };

    json rep;
    rep["schema"] = "qtomo-report-v1";
    rep["command"] = "image";
    json body;
    body["schema"] = "qtomo-image-v1";
    body["source"] = src_kind;
    body["from_spots"] = from_spots;

    Reconstruction best = reconstruct_at(d_max);
    if (!reference) reference = best.rho; // self-referenced distance table

    json table = json::array();
    std::string csv_rows = "d_h,distance\n";
    for (const int d_h : cutoffs) {
        const Reconstruction rec = d_h == d_max ? best : reconstruct_at(d_h);
        const double dist = hilbert_distance(rec.rho, *reference);
        table.push_back({{"d_h", d_h}, {"distance", dist}});
        char row[64];
        std::snprintf(row, sizeof row, "%d,%.17g\n", d_h, dist);
        csv_rows += row;
        std::cout << "image: d_H = " << d_h << "  D = " << dist << '\n';
    }
    body["d_table"] = std::move(table);
    if (cfg.contains("table")) {
        const std::string tpath = paths.resolve(cfg.at("table").get<std::string>());
        std::ofstream out(tpath);
        if (!out) throw IoError("cannot open for writing: " + tpath);
        out << csv_rows;
    }

    // the matrices reconstruct unit-integral profiles; the physical image
    // mass is pi times the mean profile integral
    double mass = M_PI;
    if (!profiles.empty()) {
        double acc = 0.0;
        for (const auto& pr : profiles.profiles) acc += pr.integral();
        mass = M_PI * acc / static_cast<double>(profiles.size());
    }
    body["mass"] = mass;

    if (cfg.contains("render")) {
        const json& rj = cfg.at("render");
        const double x0 = require<double>(rj, "x0");
        const double y0 = require<double>(rj, "y0");
        const double step = require<double>(rj, "step");
        ImagePlane img = image_render(best.rho, x0, y0, step, require<int>(rj, "rows"),
                                      require<int>(rj, "cols"), threads);
        img.values *= mass;
        if (rj.contains("pgm")) save_image_pgm(img, paths.resolve(rj.at("pgm").get<std::string>()));
        if (rj.contains("csv")) save_image_csv(img, paths.resolve(rj.at("csv").get<std::string>()));
        body["render"] = {{"x0", x0},           {"y0", y0},
                          {"step", step},       {"rows", rj.at("rows").get<int>()},
                          {"cols", rj.at("cols").get<int>()}, {"scale", mass}};
    }

    if (cfg.contains("baseline")) {
        if (profiles.empty())
            throw ConfigError("config: the back-projection baseline needs profiles");
        const json& bj = cfg.at("baseline");
        ImagePlane img = inverse_radon_baseline(profiles, require<double>(bj, "x0"),
                                                require<double>(bj, "y0"),
                                                require<double>(bj, "step"),
                                                require<int>(bj, "rows"),
                                                require<int>(bj, "cols"), threads);
        if (bj.contains("pgm")) save_image_pgm(img, paths.resolve(bj.at("pgm").get<std::string>()));
        if (bj.contains("csv")) save_image_csv(img, paths.resolve(bj.at("csv").get<std::string>()));
    }

    rep["result"] = std::move(body);
    rep["inputs"] = provenance(inputs);
    write_report(rep, report_path);
    std::cout << "image: wrote " << report_path << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"homodyne tomography toolkit: simulate, reconstruct, fit, test, image"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    int threads = 1;
    for (const char* name : {"simulate", "reconstruct", "mlfit", "test", "image"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--threads", threads, "worker cap (0 = hardware)");
        sub->add_option("--out", out_dir, "directory for relative output paths");
    }
    CLI11_PARSE(app, argc, argv);
    const std::string cmd = app.get_subcommands().front()->get_name();

    try {
        const json cfg = load_config(config_path);
        const Paths paths{out_dir};
        if (cmd == "simulate") return cmd_simulate(cfg, config_path, threads, paths);
        if (cmd == "reconstruct") return cmd_reconstruct(cfg, config_path, threads, paths);
        if (cmd == "mlfit") return cmd_mlfit(cfg, config_path, threads, paths);
        if (cmd == "test") return cmd_test(cfg, config_path, threads, paths);
        return cmd_image(cfg, config_path, threads, paths);
    } catch (const EtaOutOfDomain& e) {
        std::cerr << "error (efficiency domain): " << e.what()
                  << "\nmatrix-element estimators are bounded only for eta > 1/2\n";
        return 4;
    } catch (const EtaBoundViolation& e) {
        std::cerr << "error (efficiency domain): " << e.what() << '\n';
        return 4;
    } catch (const IoError& e) {
        std::cerr << "error (io): " << e.what() << '\n';
        return 3;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error (io): " << e.what() << '\n';
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "error (config): " << e.what() << '\n';
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "error (config): " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "error (config): " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
