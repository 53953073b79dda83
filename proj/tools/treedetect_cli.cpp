/*
 * Copyright 2026 The treedetect Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

     http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.

*/
// treedetect: command-line front end for the tree-search MIMO detectors.
//
//   treedetect sweep  [--config FILE] [--out FILE] [--gnuplot FILE] [overrides]
//   treedetect verify [--instances N] [--seed S] [--snr DB]
//   treedetect single [--seed S] [--snr DB] [overrides]
//
// Exit status: 0 success, 1 verification failure, 2 configuration or I/O error.

#include <treedetect/treedetect.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

namespace {

constexpr int kExitOk          = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitConfigError = 2;

/// Experiment flags. Each maps 1:1 onto a config-file key and is applied after the file.
struct Overrides {
    std::map<std::string, std::string> values;

    void add_to(CLI::App& app) {
        static const std::pair<const char*, const char*> flags[] = {
            {"t", "transmit antennas"},
            {"r", "receive antennas"},
            {"qam", "constellation order (4, 16, 64)"},
            {"snr", "comma-separated SNR grid in dB"},
            {"signals", "signals per SNR point"},
            {"fading_block", "signals per channel realization"},
            {"M", "QRD-MLD breadth"},
            {"X", "improved QRD-MLD threshold factor"},
            {"L", "comma-separated Dijkstra list bounds"},
            {"N", "number of most likely vectors per detection"},
            {"detectors", "comma-separated detector families"},
            {"seed", "random seed"},
            {"workers", "worker threads (0 = all cores); results do not depend on it"},
        };
        for (const auto& [key, help] : flags) {
            app.add_option(std::string("--") + key, values[key], help);
        }
    }

    void apply(treedetect::ConfigBuilder& b) const {
        for (const auto& [key, value] : values) {
            if (!value.empty()) {
                b.apply(key, value);
            }
        }
    }
};

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw treedetect::IoError("cannot open " + path);
    }
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

int run_sweep_cmd(const std::string& config_path, const Overrides& ov, const std::string& out,
                  const std::string& gnuplot) {
    treedetect::ConfigBuilder b;
    if (!config_path.empty()) {
        b.apply_text(read_file(config_path));
    }
    ov.apply(b);
    const auto cfg    = b.finish();
    const auto result = treedetect::run_sweep(cfg);
    if (out.empty() || out == "-") {
        treedetect::write_csv(result, std::cout);
    } else {
        treedetect::emit_csv(result, out);
    }
    if (!gnuplot.empty()) {
        std::ofstream g(gnuplot, std::ios::binary);
        if (!g) {
            throw treedetect::IoError("cannot open " + gnuplot + " for writing");
        }
        treedetect::write_gnuplot(result, g);
    }
    return kExitOk;
}

int run_verify_cmd(const treedetect::VerifyOptions& opt) {
    const auto report = treedetect::run_verification(opt);
    for (const auto& c : report.cases) {
        std::cout << c.name << ": " << c.exact << "/" << c.instances << " exact"
                  << " (dijkstra_L1 heuristic agrees with ML on " << c.heuristic_agree << "/" << c.instances
                  << ")\n";
    }
    const bool ok = report.passed();
    std::cout << (ok ? "verification passed" : "verification FAILED") << '\n';
    return ok ? kExitOk : kExitVerifyFailed;
}

std::string format_vector(const treedetect::ComplexVector& v) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
        os << (i ? " " : "") << v[i].real() << (v[i].imag() < 0 ? "" : "+") << v[i].imag() << 'i';
    }
    os << ']';
    return os.str();
}

int run_single_cmd(const Overrides& ov) {
    treedetect::ConfigBuilder b;
    ov.apply(b);
    const auto cfg = b.finish();
    const auto c   = treedetect::make_qam(cfg.qam_order);

    std::mt19937_64 rng(cfg.seed);
    const auto      ch  = treedetect::draw_usable_channel(rng, cfg.t, cfg.r);
    const auto      x   = treedetect::draw_indices(c, rng, cfg.t);
    const double    var = treedetect::noise_variance(cfg.snr_db.front(), cfg.t, c.energy);
    const auto      z   = treedetect::draw_noise(rng, cfg.r, var);

    std::cout << cfg.t << "x" << cfg.r << " " << c.name << ", SNR " << cfg.snr_db.front() << " dB, phi^2 = " << var
              << "\ntransmitted " << format_vector(treedetect::symbols_of(c, x)) << "\n\n";

    const auto y = treedetect::transmit(ch, treedetect::symbols_of(c, x), z);
    treedetect::OpCounters rot;
    const treedetect::DetectionProblem p(ch.r, treedetect::rotate_received(ch.q, y, rot), c);
    for (auto d : cfg.detectors) {
        d.noise_variance = var;
        auto ctx         = rot;
        const auto res   = treedetect::detect(p, d, ctx);
        std::cout << d.label() << ":\n";
        for (std::size_t k = 0; k < res.estimates.size(); ++k) {
            std::size_t errs = 0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                errs += res.indices[k][i] != x[i] ? 1 : 0;
            }
            std::cout << "  #" << k + 1 << " " << format_vector(res.estimates[k]) << " metric " << res.metrics[k]
                      << " symbol errors " << errs << '\n';
        }
        std::cout << "  muldiv " << res.counters.complex_mul_div << ", detection nodes "
                  << res.counters.detection_nodes << ", comparisons " << res.counters.real_comparisons << '\n';
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tree-search MIMO detectors with exact operation counting"};
    app.require_subcommand(1);

    Overrides   sweep_ov;
    std::string config_path, out_path = "-", gnuplot_path;
    auto*       sweep = app.add_subcommand("sweep", "run a Monte Carlo SNR sweep and write CSV");
    sweep->add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
    sweep->add_option("--out", out_path, "CSV output path ('-' for stdout)");
    sweep->add_option("--gnuplot", gnuplot_path, "also write a gnuplot data file");
    sweep_ov.add_to(*sweep);

    treedetect::VerifyOptions vopt;
    auto* verify = app.add_subcommand("verify", "check exact configurations against direct ML enumeration");
    verify->add_option("--instances", vopt.instances, "random instances per case")->check(CLI::PositiveNumber);
    verify->add_option("--seed", vopt.seed, "random seed");
    verify->add_option("--snr", vopt.snr_db, "SNR in dB");
    verify->add_flag("--inject-fault", vopt.corrupt_metric, "corrupt one reported metric (negative control)");

    Overrides single_ov;
    auto*     single = app.add_subcommand("single", "detect one random signal with every detector and explain");
    single_ov.add_to(*single);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfigError;
    }

    try {
        if (*sweep) {
            return run_sweep_cmd(config_path, sweep_ov, out_path, gnuplot_path);
        }
        if (*verify) {
            return run_verify_cmd(vopt);
        }
        return run_single_cmd(single_ov);
    } catch (const treedetect::Error& e) {
        std::cerr << "treedetect: " << e.what() << '\n';
        return kExitConfigError;
    }
}
