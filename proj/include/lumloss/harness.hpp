#ifndef LUMLOSS_HARNESS_HPP
#define LUMLOSS_HARNESS_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "checkpoint.hpp"
#include "config.hpp"
#include "dataset.hpp"
#include "errors.hpp"
#include "image_io.hpp"
#include "metrics.hpp"
#include "rng.hpp"
#include "trainer.hpp"

namespace lumloss {

/// Train every (loss, sigma_max) cell, then score each on one fixed eval set.
struct BenchPlan {
    std::vector<double> sigma_max_list{55.0, 75.0};
    std::vector<double> eval_sigmas{5, 10, 15, 20, 25, 30, 35, 40, 45, 50, 55, 60, 65, 70, 75};
    std::vector<LossSpec> losses{LossSpec::l1(), LossSpec::luminance_l1(1.0)};
    TrainConfig train{};
    std::size_t eval_count = 8;
    std::size_t eval_height = 40;
    std::size_t eval_width = 40;
    std::uint64_t eval_seed_base = 1;

    void validate() const {
        if (eval_sigmas.empty()) throw InvalidInput("plan: eval_sigmas must not be empty");
        for (std::size_t i = 0; i < eval_sigmas.size(); ++i) {
            if (!(eval_sigmas[i] >= 0.0)) throw InvalidInput("plan: eval sigmas must be >= 0");
            if (i > 0 && !(eval_sigmas[i] > eval_sigmas[i - 1])) {
                throw InvalidInput("plan: eval_sigmas must be strictly increasing");
            }
        }
        if (sigma_max_list.empty()) throw InvalidInput("plan: sigma_max_list must not be empty");
        if (losses.empty()) throw InvalidInput("plan: losses must not be empty");
        if (eval_count == 0) throw InvalidInput("plan: eval_count must be positive");
        for (const auto& l : losses) l.validate();
        train.validate();
    }

    std::uint64_t eval_seed_value() const { return eval_seed(eval_seed_base); }
};

inline std::string format_sigma(double s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", s);
    return buf;
}

inline std::string join_numbers(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += format_sigma(v[i]);
    }
    return s;
}

/// Canonical text form of a plan; its FNV-1a hash identifies the run.
inline std::string to_key_values(const BenchPlan& plan) {
    TrainConfig t = plan.train;
    std::string losses;
    for (std::size_t i = 0; i < plan.losses.size(); ++i) {
        const auto& l = plan.losses[i];
        if (i) losses += ",";
        losses += std::string(to_string(l.kind));
        if (l.kind == LossKind::LuminanceL1) {
            char buf[64];
            std::snprintf(buf, sizeof buf, ":%.17g:%s", l.lambda, std::string(to_string(l.pixel_base)).c_str());
            losses += buf;
        }
    }
    std::string s = "sigma_max_list=" + join_numbers(plan.sigma_max_list) + "\n";
    s += "eval_sigmas=" + join_numbers(plan.eval_sigmas) + "\n";
    s += "losses=" + losses + "\n";
    s += "eval_count=" + std::to_string(plan.eval_count) + "\n";
    s += "eval_size=" + std::to_string(plan.eval_height) + "x" + std::to_string(plan.eval_width) + "\n";
    s += "eval_seed=" + std::to_string(plan.eval_seed_base) + "\n";
    std::string train = to_key_values(t);
    // loss and sigma_max vary per cell.
    std::string filtered;
    for (const auto& line : split(train, '\n')) {
        if (line.empty() || line.rfind("loss=", 0) == 0 || line.rfind("lambda=", 0) == 0 ||
            line.rfind("pixel_base=", 0) == 0 || line.rfind("sigma_max=", 0) == 0) {
            continue;
        }
        filtered += line + "\n";
    }
    return s + filtered;
}

inline BenchPlan bench_plan_from(const KeyValues& kv) {
    BenchPlan plan;
    bool eval_seed_given = false;
    for (const auto& [k, v] : kv) {
        if (k == "sigma_max_list") {
            plan.sigma_max_list = parse_number_list(v, k);
        } else if (k == "eval_sigmas") {
            plan.eval_sigmas = parse_number_list(v, k);
        } else if (k == "losses") {
            plan.losses.clear();
            for (const auto& item : split(v, ',')) plan.losses.push_back(parse_loss_spec(item));
        } else if (k == "eval_count") {
            plan.eval_count = parse_u64(v, k);
        } else if (k == "eval_size") {
            std::tie(plan.eval_height, plan.eval_width) = parse_size(v, k);
        } else if (k == "eval_seed") {
            plan.eval_seed_base = parse_u64(v, k);
            eval_seed_given = true;
        } else if (k == "loss" || k == "lambda" || k == "pixel_base" || k == "sigma_max") {
            throw InvalidInput("plan: '" + k + "' is set per cell; use 'losses' and 'sigma_max_list'");
        } else if (!apply_train_key(plan.train, k, v)) {
            throw InvalidInput("plan: unknown key '" + k + "'");
        }
    }
    if (!eval_seed_given) plan.eval_seed_base = plan.train.seed;
    plan.validate();
    return plan;
}

inline BenchPlan read_bench_plan(const std::filesystem::path& path) { return bench_plan_from(read_key_values(path)); }

/// Clean evaluation images with one fixed noisy copy per eval sigma.
struct EvalCorpus {
    std::vector<double> sigmas;
    std::vector<Image> clean;
    std::vector<std::vector<Image>> noisy;  // [sigma][image]
};

inline std::uint64_t eval_noise_seed(std::uint64_t eval_seed, double sigma_255, std::size_t image) {
    const auto key = static_cast<std::uint64_t>(std::llround(sigma_255 * 1000.0));
    return mix_seed(mix_seed(eval_seed ^ 0x6e6f697365ull, key), image);
}

inline EvalCorpus make_eval_corpus(std::vector<Image> clean, const std::vector<double>& sigmas, std::uint64_t seed) {
    EvalCorpus c{sigmas, std::move(clean), {}};
    for (double s : sigmas) {
        std::vector<Image> row;
        for (std::size_t i = 0; i < c.clean.size(); ++i) {
            row.push_back(add_noise(c.clean[i], {s, eval_noise_seed(seed, s, i)}));
        }
        c.noisy.push_back(std::move(row));
    }
    return c;
}

inline EvalCorpus make_eval_corpus(const BenchPlan& plan) {
    const std::uint64_t seed = plan.eval_seed_value();
    return make_eval_corpus(gen_clean(seed, plan.eval_count, plan.eval_height, plan.eval_width), plan.eval_sigmas, seed);
}

/// Mean per-image PSNR and SSIM for one model across the corpus sigmas.
struct ColumnScores {
    std::vector<double> psnr;
    std::vector<double> ssim;
};

/// Scores `restore` (clamped to [0,1]) against the clean images; mean of per-image values.
inline ColumnScores score_column(const EvalCorpus& corpus, const std::function<Image(const Image&)>& restore) {
    ColumnScores out;
    const double n = static_cast<double>(corpus.clean.size());
    for (std::size_t si = 0; si < corpus.sigmas.size(); ++si) {
        double p = 0.0, s = 0.0;
        for (std::size_t i = 0; i < corpus.clean.size(); ++i) {
            const Image restored = clamp01(restore(corpus.noisy[si][i]));
            p += psnr(restored, corpus.clean[i]);
            s += ssim(restored, corpus.clean[i]);
        }
        out.psnr.push_back(p / n);
        out.ssim.push_back(s / n);
    }
    return out;
}

inline ColumnScores score_net(const EvalCorpus& corpus, const TinyNet& net) {
    return score_column(corpus, [&net](const Image& x) { return denoise(net, x); });
}

inline ColumnScores score_noisy(const EvalCorpus& corpus) {
    return score_column(corpus, [](const Image& x) { return x; });
}

struct BenchCell {
    std::string name;  // "<loss>_<sigma_max>"
    std::optional<LossSpec> loss;
    double sigma_max = 0.0;
    ColumnScores scores;
    std::uint64_t checkpoint_fnv1a = 0;
};

struct BenchReport {
    std::vector<double> eval_sigmas;
    std::vector<BenchCell> cells;
    ColumnScores noisy;
    std::vector<std::string> metadata;  // serialized as '#' comment lines
    double wall_ms = 0.0;               // informational; never serialized
};

inline std::string cell_name(const LossSpec& loss, double sigma_max) {
    return loss.label() + "_" + format_sigma(sigma_max);
}

struct BenchProgress {
    std::function<void(const std::string& cell, const StepRecord&)> on_step;
    std::function<void(const BenchCell&, double ms)> on_cell;
};

/// Trains and scores every cell, sigma_max-major so each base/ours pair is adjacent.
inline BenchReport run_bench(const BenchPlan& plan, const BenchProgress& progress = {}) {
    plan.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const EvalCorpus corpus = make_eval_corpus(plan);
    BenchReport report;
    report.eval_sigmas = plan.eval_sigmas;
    report.noisy = score_noisy(corpus);
    const std::string canonical = to_key_values(plan);
    char buf[160];
    std::snprintf(buf, sizeof buf, "seed=%llu eval_seed=%llu eval_count=%zu eval_size=%zux%zu plan_fnv1a=%016llx",
                  static_cast<unsigned long long>(plan.train.seed),
                  static_cast<unsigned long long>(plan.eval_seed_value()), plan.eval_count, plan.eval_height,
                  plan.eval_width, static_cast<unsigned long long>(fnv1a64(canonical)));
    report.metadata.push_back(buf);

    for (double sigma_max : plan.sigma_max_list) {
        for (const auto& loss : plan.losses) {
            TrainConfig cfg = plan.train;
            cfg.loss = loss;
            cfg.sigma_max = sigma_max;
            BenchCell cell;
            cell.name = cell_name(loss, sigma_max);
            cell.loss = loss;
            cell.sigma_max = sigma_max;
            const auto c0 = std::chrono::steady_clock::now();
            TrainHooks hooks;
            if (progress.on_step) {
                hooks.on_step = [&](const StepRecord& r) { progress.on_step(cell.name, r); };
            }
            TrainResult trained;
            try {
                trained = train(initial_net(cfg), cfg, hooks);
            } catch (const NumericalError& e) {
                throw NumericalError("cell " + cell.name + ": " + e.what());
            }
            cell.scores = score_net(corpus, trained.net);
            cell.checkpoint_fnv1a = checkpoint_checksum(encode_checkpoint(trained.net, cell.name));
            const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - c0).count();
            std::snprintf(buf, sizeof buf, "cell %s checkpoint_fnv1a=%016llx", cell.name.c_str(),
                          static_cast<unsigned long long>(cell.checkpoint_fnv1a));
            report.metadata.push_back(buf);
            if (progress.on_cell) progress.on_cell(cell, ms);
            report.cells.push_back(std::move(cell));
        }
    }
    report.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

/// A base-vs-luminance comparison between two cells at one sigma_max.
struct DeltaPair {
    std::size_t ours = 0;
    std::size_t base = 0;
    std::string name;  // "delta_<ours cell>"
};

/// For each sigma_max: every LuminanceL1 cell against the first non-luminance cell.
inline std::vector<DeltaPair> delta_pairs(const BenchReport& report) {
    std::vector<DeltaPair> out;
    for (std::size_t i = 0; i < report.cells.size(); ++i) {
        const auto& ours = report.cells[i];
        if (!ours.loss || ours.loss->kind != LossKind::LuminanceL1) continue;
        for (std::size_t j = 0; j < report.cells.size(); ++j) {
            const auto& base = report.cells[j];
            if (base.loss && base.loss->kind != LossKind::LuminanceL1 && base.sigma_max == ours.sigma_max) {
                out.push_back({i, j, "delta_" + ours.name});
                break;
            }
        }
    }
    return out;
}

/// Fixed 4-decimal text; +inf as "inf".
inline std::string format_value(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    std::string s = buf;
    if (s == "-0.0000") s = "0.0000";
    return s;
}

inline double parse_value(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    return parse_double(s, "csv cell");
}

inline double round4(double v) { return std::isfinite(v) ? parse_value(format_value(v)) : v; }

/**
 * CSV layout:
 *
 *   # comment lines (metadata)
 *   sigma,<cell>_psnr,<cell>_ssim,...,noisy_psnr,noisy_ssim,delta_<cell>_psnr,delta_<cell>_ssim,...
 *   one row per eval sigma
 *   mean,<per-column mean>...
 *
 * Delta and mean values are derived from the already-rounded cells, so the
 * file is self-consistent when parsed back.
 */
inline std::string report_to_csv(const BenchReport& report) {
    const auto deltas = delta_pairs(report);
    std::ostringstream os;
    os << "# lumloss denoising benchmark: mean per-image PSNR (dB) and SSIM of outputs clamped to [0,1]\n";
    os << "# ssim columns are an extension: luminance projection, 11x11 gaussian window, sigma 1.5\n";
    for (const auto& m : report.metadata) os << "# " << m << "\n";

    std::vector<std::string> header{"sigma"};
    std::vector<std::vector<double>> columns;
    for (const auto& c : report.cells) {
        header.push_back(c.name + "_psnr");
        header.push_back(c.name + "_ssim");
        std::vector<double> p, s;
        for (double v : c.scores.psnr) p.push_back(round4(v));
        for (double v : c.scores.ssim) s.push_back(round4(v));
        columns.push_back(std::move(p));
        columns.push_back(std::move(s));
    }
    header.push_back("noisy_psnr");
    header.push_back("noisy_ssim");
    {
        std::vector<double> p, s;
        for (double v : report.noisy.psnr) p.push_back(round4(v));
        for (double v : report.noisy.ssim) s.push_back(round4(v));
        columns.push_back(std::move(p));
        columns.push_back(std::move(s));
    }
    for (const auto& d : deltas) {
        header.push_back(d.name + "_psnr");
        header.push_back(d.name + "_ssim");
        std::vector<double> p, s;
        const std::size_t ours_col = 2 * d.ours;
        const std::size_t base_col = 2 * d.base;
        for (std::size_t r = 0; r < report.eval_sigmas.size(); ++r) {
            p.push_back(round4(columns[ours_col][r] - columns[base_col][r]));
            s.push_back(round4(columns[ours_col + 1][r] - columns[base_col + 1][r]));
        }
        columns.push_back(std::move(p));
        columns.push_back(std::move(s));
    }
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << "\n";
    for (std::size_t r = 0; r < report.eval_sigmas.size(); ++r) {
        os << format_value(report.eval_sigmas[r]);
        for (const auto& col : columns) os << "," << format_value(col[r]);
        os << "\n";
    }
    os << "mean";
    for (const auto& col : columns) {
        double s = 0.0;
        for (double v : col) s += v;
        os << "," << format_value(s / static_cast<double>(col.size()));
    }
    os << "\n";
    return os.str();
}

/// A report CSV read back: column names, per-sigma rows, and the mean row.
struct ParsedReport {
    std::vector<std::string> columns;  // excludes "sigma"
    std::vector<double> sigmas;
    std::vector<std::vector<double>> rows;  // [row][column]
    std::vector<double> mean;
    std::vector<std::string> comments;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (columns[i] == name) return i;
        }
        throw InvalidInput("report has no column '" + name + "'");
    }

    bool has_column(const std::string& name) const {
        for (const auto& c : columns) {
            if (c == name) return true;
        }
        return false;
    }

    std::vector<double> column_values(const std::string& name) const {
        const std::size_t c = column(name);
        std::vector<double> out;
        for (const auto& r : rows) out.push_back(r[c]);
        return out;
    }
};

inline ParsedReport parse_report_csv(const std::string& text) {
    ParsedReport out;
    bool have_header = false;
    for (const auto& line : split(text, '\n')) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            out.comments.push_back(std::string(detail::trim(std::string_view(line).substr(1))));
            continue;
        }
        auto fields = split(line, ',');
        if (!have_header) {
            if (fields.empty() || fields[0] != "sigma") throw InvalidInput("report csv: missing 'sigma' header");
            out.columns.assign(fields.begin() + 1, fields.end());
            have_header = true;
            continue;
        }
        if (fields.size() != out.columns.size() + 1) throw InvalidInput("report csv: ragged row '" + line + "'");
        std::vector<double> values;
        for (std::size_t i = 1; i < fields.size(); ++i) values.push_back(parse_value(fields[i]));
        if (fields[0] == "mean") {
            out.mean = std::move(values);
        } else {
            out.sigmas.push_back(parse_value(fields[0]));
            out.rows.push_back(std::move(values));
        }
    }
    if (!have_header) throw InvalidInput("report csv: empty");
    return out;
}

/// Single-column report for a stored model on a set of clean images.
inline BenchReport evaluate_checkpoint(const Checkpoint& ck, std::vector<Image> clean, const std::vector<double>& sigmas,
                                       std::uint64_t seed) {
    if (sigmas.empty()) throw InvalidInput("eval: no sigmas given");
    for (std::size_t i = 1; i < sigmas.size(); ++i) {
        if (!(sigmas[i] > sigmas[i - 1])) throw InvalidInput("eval: sigmas must be strictly increasing");
    }
    for (const auto& img : clean) require_channels(img, 3, "eval");
    const EvalCorpus corpus = make_eval_corpus(std::move(clean), sigmas, eval_seed(seed));
    BenchReport report;
    report.eval_sigmas = sigmas;
    report.noisy = score_noisy(corpus);
    BenchCell cell;
    cell.name = ck.label.empty() ? "ckpt" : ck.label;
    cell.scores = score_net(corpus, ck.net);
    cell.checkpoint_fnv1a = checkpoint_checksum(encode_checkpoint(ck.net, ck.label));
    char buf[128];
    std::snprintf(buf, sizeof buf, "eval seed=%llu images=%zu checkpoint_fnv1a=%016llx",
                  static_cast<unsigned long long>(eval_seed(seed)), corpus.clean.size(),
                  static_cast<unsigned long long>(cell.checkpoint_fnv1a));
    report.metadata.push_back(buf);
    report.cells.push_back(std::move(cell));
    return report;
}

/// Loads a checkpoint, denoises one image, writes the clamped result.
inline void denoise_file(const std::filesystem::path& checkpoint, const std::filesystem::path& in_path,
                         const std::filesystem::path& out_path) {
    const Checkpoint ck = load_checkpoint(checkpoint);
    const Image in = load_image(in_path);
    if (in.channels() != 3) {
        throw InvalidInput(in_path.string() + ": denoising needs an RGB image");
    }
    save_image(clamp01(denoise(ck.net, in)), out_path);
}

}

#endif
