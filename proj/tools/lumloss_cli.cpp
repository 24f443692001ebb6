// lumloss command line: corpus generation, training, evaluation, benchmark
// tables, inference, metrics, gradient checks and pixel optimization.
//
// Exit codes: 0 success, 1 invalid input, 2 numerical failure, 3 I/O or format error.

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lumloss/lumloss.hpp"

namespace fs = std::filesystem;
using namespace lumloss;

namespace {

enum ExitCode { kOk = 0, kInvalid = 1, kNumerical = 2, kIo = 3 };

void write_text(const fs::path& path, const std::string& text) { detail::write_file(path, text); }

std::string read_text(const fs::path& path) {
    const auto bytes = detail::read_file(path);
    return {bytes.begin(), bytes.end()};
}

int cmd_gen(std::uint64_t seed, std::size_t count, const std::string& size, double sigma, const fs::path& out) {
    const auto [h, w] = parse_size(size, "--size");
    fs::create_directories(out);
    const auto clean = gen_clean(seed, count, h, w);
    std::string manifest = "# index sigma_255 clean noisy\n";
    for (std::size_t i = 0; i < clean.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof name, "clean_%04zu.ppm", i);
        const std::string clean_name = name;
        std::snprintf(name, sizeof name, "noisy_%04zu.lumf", i);
        const std::string noisy_name = name;
        save_image(clean[i], out / clean_name);
        save_image(add_noise(clean[i], {sigma, mix_seed(seed ^ 0x67656eull, i)}), out / noisy_name);
        manifest += std::to_string(i) + " " + format_sigma(sigma) + " " + clean_name + " " + noisy_name + "\n";
    }
    write_text(out / "manifest.txt", manifest);
    std::cout << "wrote " << clean.size() << " pairs to " << out.string() << "\n";
    return kOk;
}

// Clean images of a data directory: manifest order when present, else sorted *.ppm.
std::vector<Image> load_clean_dir(const fs::path& dir) {
    std::vector<fs::path> paths;
    const fs::path manifest = dir / "manifest.txt";
    if (fs::exists(manifest)) {
        for (const auto& line : split(read_text(manifest), '\n')) {
            if (line.empty() || line[0] == '#') continue;
            std::istringstream is(line);
            std::string index, sigma, clean;
            if (!(is >> index >> sigma >> clean)) {
                throw FormatError(manifest.string() + ": malformed line '" + line + "'");
            }
            paths.push_back(dir / clean);
        }
    } else {
        if (!fs::is_directory(dir)) throw FormatError("'" + dir.string() + "' is not a directory");
        for (const auto& e : fs::directory_iterator(dir)) {
            if (e.path().extension() == ".ppm") paths.push_back(e.path());
        }
        std::sort(paths.begin(), paths.end());
    }
    if (paths.empty()) throw InvalidInput("no images found in '" + dir.string() + "'");
    std::vector<Image> out;
    for (const auto& p : paths) out.push_back(load_image(p));
    return out;
}

void print_deltas(const BenchReport& report) {
    for (const auto& d : delta_pairs(report)) {
        const auto& ours = report.cells[d.ours];
        const auto& base = report.cells[d.base];
        std::fprintf(stderr, "%s minus %s (PSNR dB):", ours.name.c_str(), base.name.c_str());
        std::size_t positive = 0;
        for (std::size_t r = 0; r < report.eval_sigmas.size(); ++r) {
            const double delta = round4(ours.scores.psnr[r]) - round4(base.scores.psnr[r]);
            positive += delta > 0.0 ? 1 : 0;
            std::fprintf(stderr, " %s:%+.4f", format_sigma(report.eval_sigmas[r]).c_str(), delta);
        }
        std::fprintf(stderr, "\n  positive at %zu of %zu noise levels\n", positive, report.eval_sigmas.size());
    }
}

int run(int argc, char** argv) {
    CLI::App app{"LuminanceL1 loss toolkit and blind denoising benchmark"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen", "Write a synthetic clean/noisy corpus and manifest");
    std::uint64_t gen_seed = 1;
    std::size_t gen_count = 8;
    std::string gen_size = "40x40";
    double gen_sigma = 25.0;
    std::string gen_out;
    gen->add_option("--seed", gen_seed, "Corpus seed");
    gen->add_option("--count", gen_count, "Number of images");
    gen->add_option("--size", gen_size, "Image size HxW");
    gen->add_option("--sigma", gen_sigma, "Noise std-dev on the 0-255 scale");
    gen->add_option("--out", gen_out, "Output directory")->required();

    auto* train_cmd = app.add_subcommand("train", "Train a denoiser from a key=value config");
    std::string train_config, train_out, train_log, train_loss, train_pixel_base;
    std::optional<double> train_lambda, train_sigma_max;
    std::optional<std::uint64_t> train_seed_opt;
    train_cmd->add_option("--config", train_config, "Config file")->required();
    train_cmd->add_option("--loss", train_loss, "l1, l2 or luml1");
    train_cmd->add_option("--lambda", train_lambda, "Luminance term weight");
    train_cmd->add_option("--pixel-base", train_pixel_base, "Pixel term of luml1: l1 or l2");
    train_cmd->add_option("--sigma-max", train_sigma_max, "Upper bound of the blind noise range (0-255 scale)");
    train_cmd->add_option("--seed", train_seed_opt, "Run seed");
    train_cmd->add_option("--out", train_out, "Checkpoint path")->required();
    train_cmd->add_option("--log", train_log, "Training log CSV");

    auto* eval_cmd = app.add_subcommand("eval", "Score a checkpoint across noise levels");
    std::string eval_ckpt, eval_data, eval_csv, eval_sigmas = "5,10,...,75";
    std::uint64_t eval_seed_opt = 1;
    eval_cmd->add_option("--ckpt", eval_ckpt, "Checkpoint")->required();
    eval_cmd->add_option("--data", eval_data, "Directory of clean images (manifest.txt or *.ppm)")->required();
    eval_cmd->add_option("--sigmas", eval_sigmas, "Comma list; 'a,b,...,c' expands");
    eval_cmd->add_option("--seed", eval_seed_opt, "Noise seed");
    eval_cmd->add_option("--csv", eval_csv, "Output CSV")->required();

    auto* bench = app.add_subcommand("bench", "Train every (loss, sigma_max) cell and emit the comparison table");
    std::string bench_plan, bench_csv;
    bench->add_option("--plan", bench_plan, "Plan file")->required();
    bench->add_option("--csv", bench_csv, "Output CSV")->required();

    auto* den = app.add_subcommand("denoise", "Denoise one image with a checkpoint");
    std::string den_ckpt, den_in, den_out;
    den->add_option("--ckpt", den_ckpt, "Checkpoint")->required();
    den->add_option("--in", den_in, "Input image (PPM or LUMF1)")->required();
    den->add_option("--out", den_out, "Output image")->required();

    auto* metric = app.add_subcommand("metric", "Compare two images");
    std::string met_a, met_b;
    bool met_psnr = false, met_ssim = false, met_luml1 = false;
    double met_lambda = 1.0;
    metric->add_option("--a", met_a, "First image")->required();
    metric->add_option("--b", met_b, "Second image")->required();
    metric->add_flag("--psnr", met_psnr, "Print PSNR (dB)");
    metric->add_flag("--ssim", met_ssim, "Print SSIM");
    metric->add_flag("--luml1", met_luml1, "Print the LuminanceL1 loss value");
    metric->add_option("--lambda", met_lambda, "Luminance term weight for --luml1");

    auto* gc = app.add_subcommand("gradcheck", "Run the finite-difference gradient suite");
    std::uint64_t gc_seed = 1;
    gc->add_option("--seed", gc_seed, "Suite seed");

    auto* pix = app.add_subcommand("pixopt", "Gradient descent directly on pixels toward a target");
    std::string pix_init, pix_target, pix_out, pix_loss = "luml1", pix_base = "l1";
    double pix_lambda = 1.0, pix_lr = 1.0;
    std::size_t pix_steps = 100;
    pix->add_option("--init", pix_init, "Starting image")->required();
    pix->add_option("--target", pix_target, "Target image")->required();
    pix->add_option("--loss", pix_loss, "l1, l2 or luml1");
    pix->add_option("--lambda", pix_lambda, "Luminance term weight");
    pix->add_option("--pixel-base", pix_base, "Pixel term of luml1: l1 or l2");
    pix->add_option("--steps", pix_steps, "Descent steps");
    pix->add_option("--lr", pix_lr, "Step size");
    pix->add_option("--out", pix_out, "Output image")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInvalid;
    }

    if (*gen) {
        return cmd_gen(gen_seed, gen_count, gen_size, gen_sigma, gen_out);
    }

    if (*train_cmd) {
        TrainConfig cfg = train_config_from(read_key_values(train_config));
        if (!train_loss.empty()) cfg.loss.kind = parse_loss_kind(train_loss);
        if (train_lambda) cfg.loss.lambda = *train_lambda;
        if (!train_pixel_base.empty()) cfg.loss.pixel_base = parse_pixel_base(train_pixel_base);
        if (train_sigma_max) cfg.sigma_max = *train_sigma_max;
        if (train_seed_opt) cfg.seed = *train_seed_opt;
        cfg.validate();
        TrainHooks hooks;
        hooks.checkpoint_path = train_out;
        hooks.checkpoint_label = cell_name(cfg.loss, cfg.sigma_max);
        const std::size_t every = std::max<std::size_t>(1, cfg.steps / 10);
        hooks.on_step = [every](const StepRecord& r) {
            if (r.step % every == 0) {
                std::fprintf(stderr, "step %zu loss %.6f (%.1f s)\n", r.step, r.loss, r.ms / 1000.0);
            }
        };
        const TrainResult result = train(initial_net(cfg), cfg, hooks);
        if (!train_log.empty()) write_text(train_log, result.log.to_csv());
        std::cout << "checkpoint " << train_out << " fnv1a "
                  << std::hex << checkpoint_checksum(encode_checkpoint(result.net, hooks.checkpoint_label)) << std::dec
                  << "\n";
        return kOk;
    }

    if (*eval_cmd) {
        const Checkpoint ck = load_checkpoint(eval_ckpt);
        const BenchReport report =
            evaluate_checkpoint(ck, load_clean_dir(eval_data), parse_number_list(eval_sigmas, "--sigmas"), eval_seed_opt);
        write_text(eval_csv, report_to_csv(report));
        return kOk;
    }

    if (*bench) {
        const BenchPlan plan = read_bench_plan(bench_plan);
        BenchProgress progress;
        const std::size_t every = std::max<std::size_t>(1, plan.train.steps / 5);
        progress.on_step = [every](const std::string& cell, const StepRecord& r) {
            if (r.step % every == 0) {
                std::fprintf(stderr, "[%s] step %zu loss %.6f (%.1f s)\n", cell.c_str(), r.step, r.loss, r.ms / 1000.0);
            }
        };
        progress.on_cell = [](const BenchCell& c, double ms) {
            std::fprintf(stderr, "[%s] done in %.1f s\n", c.name.c_str(), ms / 1000.0);
        };
        const BenchReport report = run_bench(plan, progress);
        write_text(bench_csv, report_to_csv(report));
        print_deltas(report);
        std::fprintf(stderr, "bench finished in %.1f s\n", report.wall_ms / 1000.0);
        return kOk;
    }

    if (*den) {
        denoise_file(den_ckpt, den_in, den_out);
        return kOk;
    }

    if (*metric) {
        const Image a = load_image(met_a);
        const Image b = load_image(met_b);
        if (!met_psnr && !met_ssim && !met_luml1) met_psnr = met_ssim = true;
        if (met_psnr) std::printf("psnr %.6f\n", psnr(a, b));
        if (met_ssim) std::printf("ssim %.6f\n", ssim(a, b));
        if (met_luml1) std::printf("luml1 %.8f\n", luminance_l1_loss(a, b, LossSpec::luminance_l1(met_lambda)).value);
        return kOk;
    }

    if (*gc) {
        bool ok = true;
        auto print = [&ok](const SuiteEntry& e) {
            ok = ok && e.stats.ok();
            std::printf("%s %-44s checked=%zu skipped=%zu max_rel_err=%.3e tol=%.0e (%.0f ms)\n",
                        e.stats.ok() ? "PASS" : "FAIL", e.name.c_str(), e.stats.checked, e.stats.skipped,
                        e.stats.max_rel_error, e.tolerance, e.ms);
        };
        for (const auto& e : run_loss_gradient_suite(gc_seed)) print(e);
        print(run_net_gradient_suite(gc_seed));
        return ok ? kOk : kNumerical;
    }

    if (*pix) {
        LossSpec spec = parse_loss_spec(pix_loss);
        if (spec.kind == LossKind::LuminanceL1) {
            spec.lambda = pix_lambda;
            spec.pixel_base = parse_pixel_base(pix_base);
        }
        const Image init = load_image(pix_init);
        const Image target = load_image(pix_target);
        const Image out = optimize_pixels(init, target, spec, pix_steps, pix_lr);
        std::printf("loss %.8f -> %.8f\n", eval_loss(spec, init, target).value, eval_loss(spec, out, target).value);
        save_image(out, pix_out);
        return kOk;
    }
    return kInvalid;
}

}

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    } catch (const std::logic_error& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    }
}
