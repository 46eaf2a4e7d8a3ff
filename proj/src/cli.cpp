#include "phaselim/cli.hpp"

#include "phaselim/errors.hpp"
#include "phaselim/limits.hpp"
#include "phaselim/rng.hpp"
#include "phaselim/simulator.hpp"
#include "phaselim/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

namespace phaselim::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < length; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

namespace {

std::string trim(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = text.find_last_not_of(" \t\r\n");
    return text.substr(first, last - first + 1);
}

std::string flag_name(std::string key) {
    for (auto& c : key)
        if (c == '_') c = '-';
    return "--" + key;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char text[32];
    std::strftime(text, sizeof text, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return text;
}

std::string fmt(double x) {
    char text[40];
    std::snprintf(text, sizeof text, "%.10g", x);
    return text;
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("PHASELIM_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw std::invalid_argument("PHASELIM_SEED must be a non-negative integer");
        }
    }
    return 1;
}

// Options shared by every data-producing command.
struct Common {
    std::string out_dir = "phaselim-out";
    std::uint64_t seed = 1;
    unsigned threads = 0;
};

void add_common(CLI::App* sub, Common& common) {
    sub->add_option("--out-dir", common.out_dir, "Directory for data outputs and the run manifest");
    sub->add_option("--seed", common.seed, "Master seed (default: $PHASELIM_SEED or 1)");
    sub->add_option("--threads", common.threads, "Worker threads, 0 = all cores (results do not depend on it)");
}

// Collects the output files of one command and writes its manifest.
class Run {
public:
    Run(std::string command, const Common& common, std::vector<std::string> args)
        : command_(std::move(command)), common_(common), args_(std::move(args)), started_(utc_timestamp()) {
        std::error_code ec;
        fs::create_directories(common_.out_dir, ec);
        if (ec || !fs::is_directory(common_.out_dir)) throw IoError("cannot create output directory " + common_.out_dir);
    }

    void write(const std::string& name, const std::string& content) {
        const fs::path path = fs::path(common_.out_dir) / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write " + path.string());
        out << content;
        out.close();
        if (!out) throw IoError("failed writing " + path.string());
        outputs_[name] = sha256_hex(content);
    }

    void finish(const json& params, int exit_code) {
        json manifest;
        manifest["command"] = command_;
        manifest["args"] = args_;
        manifest["params"] = params;
        manifest["seed"] = common_.seed;
        manifest["version"] = kVersion;
        manifest["threads"] = common_.threads;
        manifest["started"] = started_;
        manifest["finished"] = utc_timestamp();
        manifest["outputs"] = outputs_;
        manifest["exit_code"] = exit_code;
        const fs::path path = fs::path(common_.out_dir) / "manifest.json";
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write " + path.string());
        out << manifest.dump(2) << '\n';
    }

private:
    std::string command_;
    Common common_;
    std::vector<std::string> args_;
    std::string started_;
    std::map<std::string, std::string> outputs_;
};

std::vector<Complex> parse_values(const std::string& text) {
    std::vector<Complex> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            values.emplace_back(std::stod(item), 0.0);
        } else {
            values.emplace_back(std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
        }
    }
    if (values.empty()) throw std::invalid_argument("--values is empty");
    return values;
}

struct ThresholdArgs {
    std::string model = "discrete-flat";
    std::size_t p = 0;
    std::size_t k = 0;
    double c_beta = 1.0;
    double sigma = 1.0;
    double alpha_star = 0.1;
    std::string mode = "floor";
    std::string values;
    double alpha_step = 1e-3;
    bool json_output = false;
};

int cmd_thresholds(const ThresholdArgs& a, Run& run, std::ostream& out) {
    ThresholdQuery q;
    q.p = a.p;
    q.k = a.k;
    q.alpha_star = a.alpha_star;
    q.alpha_grid_step = a.alpha_step;
    if (!(a.sigma > 0.0)) throw std::invalid_argument("--sigma must be positive");
    q.noise = NoiseModel::gaussian(a.sigma * a.sigma);
    if (a.mode == "floor") q.mode = PartitionMode::FloorExact;
    else if (a.mode == "asymptotic") q.mode = PartitionMode::Asymptotic;
    else throw std::invalid_argument("--mode must be floor or asymptotic");
    if (a.model == "gaussian") {
        q.signal = SignalModel::gaussian_iid(a.c_beta, a.k);
    } else if (a.model == "discrete-flat") {
        q.signal = SignalModel::discrete_flat(a.c_beta, a.k);
    } else if (a.model == "discrete-general") {
        if (a.values.empty()) throw std::invalid_argument("discrete-general needs --values");
        q.signal = SignalModel::discrete_general(parse_values(a.values));
    } else {
        throw std::invalid_argument("--model must be gaussian, discrete-flat or discrete-general");
    }
    const auto r = threshold(q);

    json record{{"model", a.model},
                {"p", a.p},
                {"k", a.k},
                {"alpha_star", a.alpha_star},
                {"c_beta", q.signal.c_beta()},
                {"sigma", a.sigma},
                {"mode", a.model == "gaussian" ? "n/a" : a.mode},
                {"snr_db", snr_db(q.signal, q.noise)},
                {"n_ach", r.n_achievability},
                {"n_con", r.n_converse},
                {"alpha_ach", r.alpha_ach},
                {"alpha_con", r.alpha_con},
                {"n_ach_norm", r.normalized_ach},
                {"n_con_norm", r.normalized_con},
                {"caveat", regime_caveat(q.signal)}};
    run.write("thresholds.json", record.dump(2) + "\n");
    if (a.json_output) {
        out << record.dump() << '\n';
    } else {
        out << "model        " << a.model << '\n'
            << "p, k         " << a.p << ", " << a.k << '\n'
            << "alpha*       " << fmt(a.alpha_star) << '\n'
            << "SNR (dB)     " << fmt(record["snr_db"].get<double>()) << '\n'
            << "n_ach        " << fmt(r.n_achievability) << "  (alpha = " << fmt(r.alpha_ach) << ")\n"
            << "n_con        " << fmt(r.n_converse) << "  (alpha = " << fmt(r.alpha_con) << ")\n"
            << "normalized   " << fmt(r.normalized_ach) << " / " << fmt(r.normalized_con) << "  [n / (k ln(p/k))]\n"
            << "note: " << regime_caveat(q.signal) << '\n';
    }
    run.finish(record, kExitPass);
    return kExitPass;
}

struct FigureArgs {
    double alpha_star = 0.1;
    double snr_min = -10.0;
    double snr_max = 40.0;
    double snr_step = 1.0;
    double alpha_step = 1e-3;
};

int cmd_figure(const FigureArgs& a, Run& run, std::ostream& out) {
    if (!(a.snr_step > 0.0) || a.snr_max < a.snr_min) throw std::invalid_argument("invalid SNR grid");
    const auto count = static_cast<std::size_t>(std::llround((a.snr_max - a.snr_min) / a.snr_step)) + 1;
    std::vector<double> grid(count);
    for (std::size_t i = 0; i < count; ++i) grid[i] = a.snr_min + a.snr_step * static_cast<double>(i);
    for (auto kind : {ModelKind::DiscreteFlat, ModelKind::Gaussian}) {
        const auto rows = figure_data(a.alpha_star, grid, kind, a.alpha_step);
        std::ostringstream csv;
        write_figure_csv(csv, rows);
        std::string name = "figure_" + std::string(to_string(kind)) + ".csv";
        for (auto& c : name)
            if (c == '-') c = '_';
        run.write(name, csv.str());
        out << "wrote " << name << " (" << rows.size() << " rows)\n";
    }
    run.finish({{"alpha_star", a.alpha_star},
                {"snr_min", a.snr_min},
                {"snr_max", a.snr_max},
                {"snr_step", a.snr_step},
                {"alpha_step", a.alpha_step}},
               kExitPass);
    return kExitPass;
}

struct VerifyArgs {
    std::string suite = "all";
    std::optional<std::size_t> trials;
    std::size_t mi_samples = 1000000;
    double resolution = 0.01;
    std::size_t gconv_k = 10000;
    std::size_t gconv_seeds = 20;
};

constexpr std::uint64_t kSuiteSandwich = 1;
constexpr std::uint64_t kSuiteConcentration = 2;
constexpr std::uint64_t kSuiteGconv = 3;

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t suite, std::uint64_t index) {
    return substream(master, suite, index)();
}

int cmd_verify(const VerifyArgs& a, const Common& common, Run& run, std::ostream& out, std::ostream& err) {
    static const std::vector<std::string> known{"sandwich", "concentration", "gconv", "logconcavity", "negative-control",
                                                "all"};
    if (std::find(known.begin(), known.end(), a.suite) == known.end()) {
        throw std::invalid_argument("unknown suite '" + a.suite + "'");
    }
    VerifyOptions options;
    options.resolution = a.resolution;
    options.threads = common.threads;
    const bool all = a.suite == "all";
    std::vector<VerificationReport> reports;
    auto note = [&](const std::string& suite, std::size_t first) {
        std::size_t pass = 0, fail = 0, inconclusive = 0;
        for (std::size_t i = first; i < reports.size(); ++i) {
            switch (reports[i].verdict) {
                case Verdict::Pass: ++pass; break;
                case Verdict::Fail: ++fail; break;
                case Verdict::Inconclusive: ++inconclusive; break;
            }
        }
        out << suite << ": " << pass << " pass, " << fail << " fail, " << inconclusive << " inconclusive\n";
    };

    if (all || a.suite == "sandwich") {
        const std::size_t first = reports.size();
        const auto battery = sandwich_battery();
        for (std::size_t i = 0; i < battery.size(); ++i) {
            const auto& [powers, sigma] = battery[i];
            reports.push_back(sandwich_check(powers, NoiseModel::gaussian(sigma * sigma), a.trials.value_or(100000),
                                             derive_seed(common.seed, kSuiteSandwich, i), options));
        }
        note("sandwich", first);
    }
    if (all || a.suite == "concentration") {
        const std::size_t first = reports.size();
        const auto battery = concentration_battery(a.trials.value_or(10000));
        for (std::size_t i = 0; i < battery.size(); ++i) {
            const auto& setup = battery[i];
            const auto info = mi_estimate(setup.powers, setup.noise, a.mi_samples,
                                          derive_seed(common.seed, kSuiteConcentration, 2 * i), options);
            auto part = concentration_check(setup, info, derive_seed(common.seed, kSuiteConcentration, 2 * i + 1),
                                            options);
            reports.insert(reports.end(), part.begin(), part.end());
        }
        note("concentration", first);
    }
    if (all || a.suite == "gconv") {
        const std::size_t first = reports.size();
        const auto grid = default_alpha_grid();
        for (std::size_t s = 0; s < a.gconv_seeds; ++s) {
            reports.push_back(g_convergence_check(1.0, a.gconv_k, grid, derive_seed(common.seed, kSuiteGconv, s)));
        }
        note("gconv", first);
    }
    if (all || a.suite == "logconcavity") {
        const std::size_t first = reports.size();
        const auto battery = logconcavity_battery();
        auto part = logconcavity_check(battery, options);
        reports.insert(reports.end(), part.begin(), part.end());
        note("logconcavity", first);
    }
    if (a.suite == "negative-control") {
        const std::size_t first = reports.size();
        reports.push_back(bimodal_negative_control());
        note("negative-control", first);
    }

    std::ostringstream lines;
    write_json_lines(lines, reports);
    run.write("verify.jsonl", lines.str());

    std::size_t fails = 0, inconclusive = 0;
    for (const auto& r : reports) {
        fails += r.verdict == Verdict::Fail;
        inconclusive += r.verdict == Verdict::Inconclusive;
    }
    if (inconclusive > 0) err << "warning: " << inconclusive << " inconclusive report(s)\n";
    const int code = fails > 0 ? kExitFail : kExitPass;
    run.finish({{"suite", a.suite},
                {"trials", a.trials ? json(*a.trials) : json(nullptr)},
                {"mi_samples", a.mi_samples},
                {"resolution", a.resolution},
                {"gconv_k", a.gconv_k},
                {"gconv_seeds", a.gconv_seeds},
                {"reports", reports.size()},
                {"fails", fails},
                {"inconclusive", inconclusive}},
               code);
    return code;
}

struct SimulateArgs {
    std::size_t p = 10;
    std::size_t k = 2;
    std::string n_grid = "0:50:5";
    double alpha_star = 0.5;
    std::string signal = "flat";
    double c_beta = 1.0;
    double sigma2 = 1e-6;
    std::size_t trials = 400;
    std::string decoder;
    std::size_t mc_samples = 256;
};

int cmd_simulate(const SimulateArgs& a, const Common& common, Run& run, std::ostream& out) {
    SimConfig c;
    c.p = a.p;
    c.k = a.k;
    c.n_grid = parse_n_grid(a.n_grid);
    c.alpha_star = a.alpha_star;
    if (a.signal == "flat") c.signal = SignalModel::discrete_flat(a.c_beta, a.k);
    else if (a.signal == "gaussian") c.signal = SignalModel::gaussian_iid(a.c_beta, a.k);
    else throw std::invalid_argument("--signal must be flat or gaussian");
    c.noise = NoiseModel::gaussian(a.sigma2);
    c.trials = a.trials;
    c.decoder = a.decoder.empty() ? (a.signal == "gaussian" ? DecoderKind::McMarginal : DecoderKind::FlatMl)
                                  : parse_decoder(a.decoder);
    c.mc_samples = a.mc_samples;
    c.master_seed = common.seed;
    c.threads = common.threads;
    validate(c);

    std::vector<std::string> comments;
    if (c.k < c.p) {
        ThresholdQuery q;
        q.p = c.p;
        q.k = c.k;
        q.alpha_star = c.alpha_star;
        q.signal = c.signal;
        q.noise = c.noise;
        const auto r = threshold(q);
        comments.push_back("reference thresholds (asymptotic, not finite-p): n_ach=" + fmt(r.n_achievability) +
                           " n_con=" + fmt(r.n_converse));
    }
    const auto curve = error_curve(c);
    std::ostringstream csv;
    write_error_curve_csv(csv, curve, comments);
    run.write("error_curve.csv", csv.str());
    for (const auto& point : curve) out << "n=" << point.n << " pe=" << fmt(point.pe) << " se=" << fmt(point.se) << '\n';
    for (const auto& line : comments) out << line << '\n';
    run.finish({{"p", c.p},
                {"k", c.k},
                {"n_grid", c.n_grid},
                {"alpha_star", c.alpha_star},
                {"signal", a.signal},
                {"c_beta", a.c_beta},
                {"sigma2", a.sigma2},
                {"trials", c.trials},
                {"decoder", to_string(c.decoder)},
                {"mc_samples", c.mc_samples}},
               kExitPass);
    return kExitPass;
}

int cmd_replay(const std::string& manifest_path, const std::string& out_dir, unsigned threads, std::ostream& out,
               std::ostream& err) {
    const json manifest = json::parse(read_file(manifest_path));
    std::vector<std::string> args{"phaselim"};
    for (const auto& a : manifest.at("args")) args.push_back(a.get<std::string>());
    args.insert(args.end(), {"--out-dir", out_dir, "--threads", std::to_string(threads)});
    std::ostringstream inner_out;
    const int code = run(args, inner_out, err);
    if (code >= kExitUsage) return code;
    bool identical = true;
    for (const auto& [name, digest] : manifest.at("outputs").items()) {
        std::string actual;
        try {
            actual = sha256_hex(read_file(fs::path(out_dir) / name));
        } catch (const IoError&) {
            actual = "missing";
        }
        const bool same = actual == digest.get<std::string>();
        identical = identical && same;
        out << (same ? "identical " : "DIFFERENT ") << name << '\n';
    }
    return identical ? kExitPass : kExitFail;
}

// Args worth recording for replay: everything except output location,
// thread count and the config indirection (already expanded).
std::vector<std::string> replay_args(const std::vector<std::string>& args, std::uint64_t seed) {
    std::vector<std::string> out;
    for (std::size_t i = 1; i < args.size(); ++i) {
        const auto& a = args[i];
        if (a == "--out-dir" || a == "--threads" || a == "--seed") {
            ++i;
            continue;
        }
        if (a.rfind("--out-dir=", 0) == 0 || a.rfind("--threads=", 0) == 0 || a.rfind("--seed=", 0) == 0) continue;
        out.push_back(a);
    }
    out.push_back("--seed");
    out.push_back(std::to_string(seed));
    return out;
}

}  // namespace

std::vector<std::string> config_to_args(const std::string& text) {
    std::vector<std::string> args;
    const std::string body = trim(text);
    if (!body.empty() && body.front() == '{') {
        const auto j = json::parse(body);
        if (!j.is_object()) throw std::invalid_argument("config JSON must be an object");
        for (const auto& [key, value] : j.items()) {
            args.push_back(flag_name(key));
            if (value.is_string()) {
                args.push_back(value.get<std::string>());
            } else if (value.is_array()) {
                std::string joined;
                for (const auto& item : value) joined += (joined.empty() ? "" : ",") + item.dump();
                args.push_back(joined);
            } else if (value.is_boolean()) {
                if (!value.get<bool>()) args.pop_back();
            } else {
                args.push_back(value.dump());
            }
        }
        return args;
    }
    std::stringstream ss(body);
    std::string line;
    while (std::getline(ss, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("config line without '=': " + line);
        args.push_back(flag_name(trim(line.substr(0, eq))));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        args.push_back(value);
    }
    return args;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"phaselim: support-recovery limits for noisy phase retrieval"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    Common common;
    ThresholdArgs ta;
    FigureArgs fa;
    VerifyArgs va;
    SimulateArgs sa;
    std::string manifest_path;
    std::string replay_dir = "phaselim-replay";
    unsigned replay_threads = 0;
    std::string config_path;

    auto* thresholds = app.add_subcommand("thresholds", "Achievability and converse measurement thresholds");
    thresholds->add_option("--model", ta.model, "gaussian | discrete-flat | discrete-general")->capture_default_str();
    thresholds->add_option("--p", ta.p, "Ambient dimension")->required();
    thresholds->add_option("--k", ta.k, "Sparsity")->required();
    thresholds->add_option("--c-beta", ta.c_beta, "Signal power ||b||^2")->capture_default_str();
    thresholds->add_option("--sigma", ta.sigma, "Noise standard deviation")->capture_default_str();
    thresholds->add_option("--alpha-star", ta.alpha_star, "Distortion level in (0, 1)")->capture_default_str();
    thresholds->add_option("--mode", ta.mode, "floor | asymptotic partition of discrete signals")->capture_default_str();
    thresholds->add_option("--values", ta.values, "discrete-general entries, comma separated re or re:im");
    thresholds->add_option("--alpha-step", ta.alpha_step, "Alpha grid step")->capture_default_str();
    thresholds->add_flag("--json", ta.json_output, "Print a JSON record instead of a table");
    add_common(thresholds, common);

    auto* figure = app.add_subcommand("figure", "Normalized threshold curves over an SNR grid");
    figure->add_option("--alpha-star", fa.alpha_star, "Distortion level")->capture_default_str();
    figure->add_option("--snr-min", fa.snr_min, "First SNR in dB")->capture_default_str();
    figure->add_option("--snr-max", fa.snr_max, "Last SNR in dB")->capture_default_str();
    figure->add_option("--snr-step", fa.snr_step, "SNR step in dB")->capture_default_str();
    figure->add_option("--alpha-step", fa.alpha_step, "Alpha grid step")->capture_default_str();
    add_common(figure, common);

    auto* verify = app.add_subcommand("verify", "Monte-Carlo and quadrature verification batteries");
    verify->add_option("--suite", va.suite, "sandwich | concentration | gconv | logconcavity | negative-control | all")
        ->capture_default_str();
    verify->add_option("--trials", va.trials, "Trials per check (sandwich default 1e5, concentration 1e4)");
    verify->add_option("--mi-samples", va.mi_samples, "Samples for the mutual information used by concentration")
        ->capture_default_str();
    verify->add_option("--resolution", va.resolution, "Standard error above which a check is inconclusive")
        ->capture_default_str();
    verify->add_option("--gconv-k", va.gconv_k, "k for the order-statistics check")->capture_default_str();
    verify->add_option("--gconv-seeds", va.gconv_seeds, "Independent draws for the order-statistics check")
        ->capture_default_str();
    add_common(verify, common);

    auto* simulate = app.add_subcommand("simulate", "Exhaustive-decoder error curves");
    simulate->add_option("--p", sa.p, "Ambient dimension")->capture_default_str();
    simulate->add_option("--k", sa.k, "Sparsity")->capture_default_str();
    simulate->add_option("--n-grid", sa.n_grid, "Measurement counts: a,b,c or start:stop:step")->capture_default_str();
    simulate->add_option("--alpha-star", sa.alpha_star, "Distortion level")->capture_default_str();
    simulate->add_option("--signal", sa.signal, "flat | gaussian")->capture_default_str();
    simulate->add_option("--c-beta", sa.c_beta, "Signal power")->capture_default_str();
    simulate->add_option("--sigma2", sa.sigma2, "Noise variance")->capture_default_str();
    simulate->add_option("--trials", sa.trials, "Trials per n")->capture_default_str();
    simulate->add_option("--decoder", sa.decoder, "flat-ml | mc-marginal (default follows --signal)");
    simulate->add_option("--mc-samples", sa.mc_samples, "Signal draws for mc-marginal")->capture_default_str();
    add_common(simulate, common);

    auto* replay = app.add_subcommand("replay", "Re-run a command from its manifest and compare output digests");
    replay->add_option("--manifest", manifest_path, "manifest.json of the original run")->required();
    replay->add_option("--out-dir", replay_dir, "Directory for the replayed outputs")->capture_default_str();
    replay->add_option("--threads", replay_threads, "Worker threads for the replay");

    for (auto* sub : {thresholds, figure, verify, simulate}) {
        sub->add_option("--config", config_path, "Flat key = value or JSON file; keys mirror the flags");
    }

    try {
        // Expand --config in place so explicit flags that follow still win.
        std::vector<std::string> args;
        for (std::size_t i = 0; i < raw_args.size(); ++i) {
            const auto& a = raw_args[i];
            std::string path;
            if (a == "--config" && i + 1 < raw_args.size()) {
                path = raw_args[++i];
            } else if (a.rfind("--config=", 0) == 0) {
                path = a.substr(9);
            } else {
                args.push_back(a);
                continue;
            }
            const auto extra = config_to_args(read_file(path));
            const std::size_t at = std::min<std::size_t>(2, args.size());
            args.insert(args.begin() + static_cast<std::ptrdiff_t>(at), extra.begin(), extra.end());
        }

        common.seed = default_seed();
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        try {
            app.parse(static_cast<int>(argv.size()), argv.data());
        } catch (const CLI::ParseError& e) {
            const int code = app.exit(e, out, err);
            return code == 0 ? kExitPass : kExitUsage;
        }

        if (replay->parsed()) return cmd_replay(manifest_path, replay_dir, replay_threads, out, err);

        const auto* sub = app.get_subcommands().front();
        Run run(sub->get_name(), common, replay_args(args, common.seed));
        if (thresholds->parsed()) return cmd_thresholds(ta, run, out);
        if (figure->parsed()) return cmd_figure(fa, run, out);
        if (verify->parsed()) return cmd_verify(va, common, run, out, err);
        if (simulate->parsed()) return cmd_simulate(sa, common, run, out);
        return kExitUsage;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const NumericFailure& e) {
        err << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::logic_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const json::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumeric;
    }
}

}  // namespace phaselim::cli
