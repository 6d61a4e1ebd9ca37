// Command-line front end: analysis, dataset synthesis, training, inference,
// benchmarking, ablations, and a self-test sweep.

#include "pwf/checkpoint.hpp"
#include "pwf/grad_check.hpp"
#include "pwf/imaging.hpp"
#include "pwf/model.hpp"
#include "pwf/swap_lab.hpp"
#include "pwf/training.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace pwf;

namespace {

int g_threads = 1; // reserved: all compute paths are single-threaded today

void echo_config(const std::string& cmd, const std::vector<std::pair<std::string, std::string>>& kv) {
    std::cout << "# " << cmd;
    for (const auto& [k, v] : kv) std::cout << " " << k << "=" << v;
    std::cout << "\n";
}

imaging::Image load_rgb(const std::string& path) { return imaging::load_image(path); }

struct DataPair {
    std::string name;
    imaging::Image degraded, clean;
};

std::vector<DataPair> load_dataset(const std::string& dir) {
    std::vector<DataPair> out;
    const fs::path pairs = fs::path(dir) / "pairs";
    if (!fs::is_directory(pairs)) throw ContractError("dataset directory missing: " + pairs.string());
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(pairs)) {
        const std::string fn = e.path().filename().string();
        const std::string sfx = ".clean.png";
        if (fn.size() > sfx.size() && fn.compare(fn.size() - sfx.size(), sfx.size(), sfx) == 0)
            names.push_back(fn.substr(0, fn.size() - sfx.size()));
    }
    std::sort(names.begin(), names.end());
    for (const auto& n : names) {
        DataPair p;
        p.name = n;
        p.clean = load_rgb((pairs / (n + ".clean.png")).string());
        p.degraded = load_rgb((pairs / (n + ".degraded.png")).string());
        out.push_back(std::move(p));
    }
    if (out.empty()) throw ContractError("no .clean.png/.degraded.png pairs found in " + pairs.string());
    return out;
}

template <class T>
std::vector<train::Pair<T>> to_pairs(const std::vector<DataPair>& ds) {
    std::vector<train::Pair<T>> out;
    for (const auto& d : ds)
        out.push_back({d.degraded.template cast<T>(), d.clean.template cast<T>()});
    return out;
}

model::ModelConfig read_model_config(const std::string& path, train::TrainConfig* tc) {
    std::ifstream f(path);
    if (!f) throw ContractError("cannot open config: " + path);
    ckpt::json j = ckpt::json::parse(f);
    model::ModelConfig mc = ckpt::config_from_json(j.at("model"));
    if (tc && j.contains("train")) {
        const auto& t = j.at("train");
        auto get = [&](const char* k, auto& dst) {
            if (t.contains(k)) dst = t.at(k).template get<std::decay_t<decltype(dst)>>();
        };
        get("iterations", tc->iterations);
        get("batch", tc->batch);
        get("patch", tc->patch);
        get("lr0", tc->lr0);
        get("lr_min", tc->lr_min);
        get("beta1", tc->beta1);
        get("beta2", tc->beta2);
        get("weight_decay", tc->weight_decay);
        get("seed", tc->seed);
        get("eval_period", tc->eval_period);
        get("loss", tc->loss);
        get("fourier_modulus", tc->fourier_modulus);
    }
    return mc;
}

// deterministic split: last quarter (at least 1) held out for eval
template <class T>
void split_pairs(std::vector<train::Pair<T>> all, std::vector<train::Pair<T>>& tr,
                 std::vector<train::Pair<T>>& ev) {
    const std::size_t n_eval = std::max<std::size_t>(1, all.size() / 4);
    for (std::size_t i = 0; i < all.size(); ++i)
        (i + n_eval >= all.size() ? ev : tr).push_back(std::move(all[i]));
    if (tr.empty()) tr = ev;
}

double input_baseline_psnr(const std::vector<train::Pair<float>>& ev) {
    double acc = 0.0;
    for (const auto& p : ev)
        acc += imaging::psnr(p.input.cast<double>(), p.target.cast<double>());
    return ev.empty() ? 0.0 : acc / static_cast<double>(ev.size());
}

// ---- subcommand bodies ----

int cmd_analyze(const std::string& degraded, const std::string& clean, int levels,
                const std::string& bands, const std::string& mode, double cutoff,
                const std::string& family, const std::string& out) {
    swap::SwapSpec spec;
    spec.levels = levels;
    spec.bands = swap::parse_bands(bands);
    spec.mode = (mode == "masked") ? swap::Mode::Masked : swap::Mode::Whole;
    spec.cutoff = cutoff;
    echo_config("analyze", {{"degraded", degraded}, {"clean", clean}, {"levels", std::to_string(levels)},
                            {"bands", swap::bands_str(spec.bands)}, {"mode", mode},
                            {"cutoff", std::to_string(cutoff)}, {"family", family}, {"out", out}});
    const auto fam = wavelet::filter_bank(family);
    imaging::Image d = load_rgb(degraded), c = load_rgb(clean);
    imaging::Image result = swap::subband_swap(d, c, spec, fam);
    std::cout << "baseline_psnr_db=" << imaging::psnr(imaging::clamp01(d), c) << "\n";
    std::cout << "swapped_psnr_db=" << imaging::psnr(result, c) << "\n";
    std::cout << "swapped_ssim=" << imaging::ssim(result, c) << "\n";
    if (!out.empty()) imaging::save_image(out, result);
    return 0;
}

int cmd_table(const std::string& degraded, const std::string& clean, int levels,
              const std::string& family, const std::string& mode, double cutoff,
              const std::string& csv) {
    echo_config("table", {{"degraded", degraded}, {"clean", clean}, {"levels", std::to_string(levels)},
                          {"family", family}, {"mode", mode}, {"cutoff", std::to_string(cutoff)},
                          {"csv", csv}});
    const auto fam = wavelet::filter_bank(family);
    imaging::Image d = load_rgb(degraded), c = load_rgb(clean);
    const auto rep = swap::swap_table(d, c, levels, fam,
                                      mode == "masked" ? swap::Mode::Masked : swap::Mode::Whole, cutoff);
    swap::write_text(std::cout, rep);
    if (!csv.empty()) {
        std::ofstream f(csv);
        if (!f) throw ContractError("cannot write CSV: " + csv);
        swap::write_csv(f, rep);
    }
    return 0;
}

int cmd_synth(const std::string& clean_dir, const std::string& out_dir, std::uint64_t seed,
              double density) {
    echo_config("synth", {{"clean", clean_dir}, {"out", out_dir}, {"seed", std::to_string(seed)},
                          {"density", std::to_string(density)}});
    const fs::path pairs = fs::path(out_dir) / "pairs";
    fs::create_directories(pairs);
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(clean_dir)) {
        const std::string fn = e.path().filename().string();
        if (fn.size() > 4 && (fn.substr(fn.size() - 4) == ".png" || fn.substr(fn.size() - 4) == ".ppm"))
            files.push_back(e.path().string());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ContractError("no .png/.ppm files in " + clean_dir);
    imaging::RainParams rp;
    rp.streaks = std::max(1, static_cast<int>(rp.streaks * density));
    int idx = 0;
    for (const auto& f : files) {
        imaging::Image clean = load_rgb(f);
        imaging::Image degraded = imaging::synth_rain(clean, seed + static_cast<std::uint64_t>(idx), rp);
        const std::string name = fs::path(f).stem().string();
        imaging::save_png((pairs / (name + ".clean.png")).string(), clean);
        imaging::save_png((pairs / (name + ".degraded.png")).string(), degraded);
        ++idx;
    }
    std::cout << "pairs_written=" << idx << "\n";
    return 0;
}

int cmd_train(const std::string& config, const std::string& data, const std::string& out,
              const std::string& log, std::uint64_t seed_override, bool seed_set,
              const std::string& variant_str) {
    train::TrainConfig tc;
    model::ModelConfig mc = read_model_config(config, &tc);
    if (seed_set) tc.seed = seed_override;
    echo_config("train", {{"config", config}, {"data", data}, {"out", out}, {"log", log},
                          {"seed", std::to_string(tc.seed)}, {"variant", variant_str},
                          {"loss", tc.loss}});
    const model::Variant variant = model::variant_from_string(variant_str);
    auto all = to_pairs<float>(load_dataset(data));
    std::vector<train::Pair<float>> tr, ev;
    split_pairs(std::move(all), tr, ev);
    std::cout << "train_pairs=" << tr.size() << " eval_pairs=" << ev.size() << "\n";
    std::cout << "input_baseline_psnr_db=" << input_baseline_psnr(ev) << "\n";
    model::Model<float> m(mc);
    std::ofstream csv;
    if (!log.empty()) {
        csv.open(log);
        if (!csv) throw ContractError("cannot write log: " + log);
    }
    auto on_ckpt = [&](const std::string& tag, long long it) {
        if (out.empty()) return;
        const std::string path = tag == "final" ? out : out + "." + tag;
        ckpt::save_checkpoint(path, m, it);
    };
    auto rep = train::train_loop(m, variant, tr, ev, tc, log.empty() ? nullptr : &csv, on_ckpt);
    std::cout << "final_loss=" << rep.final_loss << "\n";
    std::cout << "best_eval_psnr_db=" << rep.best_eval_psnr << "\n";
    std::cout << "final_eval_psnr_db=" << rep.final_eval_psnr << "\n";
    return 0;
}

int cmd_infer(const std::string& ckpt_path, const std::string& input, const std::string& output,
              const std::string& variant_str, const std::string& dump_activations) {
    echo_config("infer", {{"ckpt", ckpt_path}, {"input", input}, {"output", output},
                          {"variant", variant_str}});
    const model::Variant variant = model::variant_from_string(variant_str);
    long long it = 0;
    model::Model<float> m = ckpt::load_checkpoint<float>(ckpt_path, &it);
    imaging::Image x = load_rgb(input);
    ad::Tape<float> t;
    auto fw = m.forward(t, x.cast<float>(), variant, !dump_activations.empty());
    imaging::Image o1 = imaging::clamp01(t.value(fw.o1).cast<double>());
    if (!output.empty()) imaging::save_image(output, o1);
    if (!dump_activations.empty()) {
        std::ofstream f(dump_activations, std::ios::binary);
        if (!f) throw ContractError("cannot write activations: " + dump_activations);
        for (const auto& [name, v] : fw.activations) {
            const auto& val = t.value(v);
            f << name << " " << shape_str(val.shape);
            double sum = 0, mx = 0;
            for (float x2 : val.data) {
                sum += x2;
                mx = std::max(mx, static_cast<double>(std::abs(x2)));
            }
            char buf[80];
            std::snprintf(buf, sizeof(buf), " sum=%.9g maxabs=%.9g\n", sum, mx);
            f << buf;
        }
    }
    std::cout << "iteration=" << it << "\n";
    return 0;
}

int cmd_bench(const std::string& ckpt_path, int size, const std::string& variant_str, int repeat) {
    echo_config("bench", {{"ckpt", ckpt_path}, {"size", std::to_string(size)},
                          {"variant", variant_str}, {"repeat", std::to_string(repeat)}});
    const model::Variant variant = model::variant_from_string(variant_str);
    long long it = 0;
    model::Model<float> m = ckpt::load_checkpoint<float>(ckpt_path, &it);
    std::cout << "params_total=" << m.param_count() << "\n";
    std::cout << "params_variant=" << m.param_count(variant) << "\n";
    std::cout << "macs_estimate=" << model::flops_estimate(m.cfg, size, size, variant) << "\n";
    Rng rng(42);
    Tensor<float> x = random_tensor<float>({m.cfg.io_channels, size, size}, rng, 0.0, 1.0);
    std::vector<double> ms;
    for (int r = 0; r < repeat; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        ad::Tape<float> t;
        m.forward(t, x, variant);
        const auto t1 = std::chrono::steady_clock::now();
        ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    std::sort(ms.begin(), ms.end());
    std::cout << "latency_ms_median=" << ms[ms.size() / 2] << "\n";
    return 0;
}

int cmd_ablate(const std::string& what, const std::string& data, long long budget,
               std::uint64_t seed, const std::string& csv_path) {
    echo_config("ablate", {{"mode", what}, {"data", data}, {"budget", std::to_string(budget)},
                           {"seed", std::to_string(seed)}, {"csv", csv_path}});
    auto all = to_pairs<float>(load_dataset(data));
    std::vector<train::Pair<float>> tr, ev;
    split_pairs(std::move(all), tr, ev);
    const double baseline = input_baseline_psnr(ev);

    struct Row {
        std::string setting;
        double psnr;
    };
    std::vector<Row> rows;
    auto run = [&](const std::string& label, model::ModelConfig mc, train::TrainConfig tc) {
        mc.seed = seed;
        tc.seed = seed;
        tc.iterations = budget;
        model::Model<float> m(mc);
        auto rep = train::train_loop(m, model::Variant::L, tr, ev, tc, nullptr, {});
        rows.push_back({label, rep.final_eval_psnr});
        std::cout << label << " psnr_db=" << rep.final_eval_psnr << "\n";
    };
    model::ModelConfig base_mc;
    base_mc.base_channels = 8;
    base_mc.blocks_per_level = {1, 1, 1};
    train::TrainConfig base_tc;
    base_tc.batch = 4;
    base_tc.patch = 32;
    base_tc.eval_period = std::max<long long>(1, budget);

    if (what == "wavelet") {
        for (const auto& famname : wavelet::family_names()) {
            model::ModelConfig mc = base_mc;
            mc.family = famname;
            run(famname, mc, base_tc);
        }
    } else if (what == "kernel") {
        for (int k : {8, 16, 32, 0}) {
            model::ModelConfig mc = base_mc;
            mc.mixer_kernel = k;
            run(k == 0 ? "global" : std::to_string(k), mc, base_tc);
        }
    } else if (what == "loss") {
        for (const char* l : {"spatial", "wavelet", "fourier", "spatial+fourier", "wavelet+fourier",
                              "spatial+wavelet", "spatial+wavelet+fourier"}) {
            train::TrainConfig tc = base_tc;
            tc.loss = l;
            run(l, base_mc, tc);
        }
    } else {
        throw ContractError("ablate mode must be wavelet|kernel|loss");
    }
    std::cout << "input_baseline_psnr_db=" << baseline << "\n";
    if (!csv_path.empty()) {
        std::ofstream f(csv_path);
        if (!f) throw ContractError("cannot write CSV: " + csv_path);
        f << "setting,psnr_db\n";
        for (const auto& r : rows) f << r.setting << "," << r.psnr << "\n";
    }
    return 0;
}

int cmd_selftest() {
    echo_config("selftest", {});
    int failures = 0;
    auto check = [&](const char* name, bool ok) {
        std::cout << (ok ? "PASS " : "FAIL ") << name << "\n";
        if (!ok) ++failures;
    };

    // wavelet perfect reconstruction across families
    {
        Rng rng(11);
        bool ok = true;
        for (const auto& famname : wavelet::family_names()) {
            const auto fam = wavelet::filter_bank(famname);
            Tensor<double> x = random_tensor<double>({3, 32, 32}, rng);
            auto p = wavelet::pyramid(x, fam, 3);
            ok = ok && max_abs_diff(wavelet::reconstruct(p, fam), x) < 1e-10;
        }
        check("wavelet perfect reconstruction", ok);
    }
    // Fourier round trip + Parseval on a non-power-of-two size
    {
        Rng rng(12);
        Tensor<double> x = random_tensor<double>({1, 12, 23}, rng);
        auto spec = fourier::fft2(x);
        Tensor<double> back = fourier::ifft2(spec);
        double e_sig = 0, e_spec = 0;
        for (auto v : x.data) e_sig += v * v;
        for (int v = 0; v < spec[0].h; ++v)
            for (int u = 0; u < spec[0].w; ++u) e_spec += std::norm(spec[0].full(v, u));
        check("fourier round trip + parseval",
              max_abs_diff(back, x) < 1e-10 && std::abs(e_sig - e_spec) < 1e-10);
    }
    // model residual identity at init
    {
        Rng rng(13);
        model::ModelConfig mc;
        mc.base_channels = 8;
        mc.blocks_per_level = {1, 1, 1};
        model::Model<double> m(mc);
        Tensor<double> x = random_tensor<double>({3, 16, 16}, rng, 0.0, 1.0);
        ad::Tape<double> t;
        auto fw = m.forward(t, x, model::Variant::L);
        check("residual identity at init", max_abs_diff(t.value(fw.o1), x) == 0.0);
    }
    // gradient check on a small composite program
    {
        Rng rng(14);
        ad::ParamTensor<double> w("w", random_tensor<double>({4, 2}, rng, -0.5, 0.5));
        ad::ParamTensor<double> b("b", random_tensor<double>({4}, rng, -0.1, 0.1));
        Tensor<double> x = random_tensor<double>({2, 8, 8}, rng);
        auto res = ad::grad_check({&w, &b}, [&](ad::Tape<double>& t) {
            return t.l1(t.gelu(t.conv_pointwise(t.constant(x), t.param(w), t.param(b))));
        });
        check("gradient check", res.ok(1e-4));
    }
    // swap-lab closed-form rows
    {
        Rng rng(15);
        const auto fam = wavelet::filter_bank("haar");
        imaging::Image clean = imaging::clamp01(random_tensor<double>({3, 32, 32}, rng, 0.2, 0.8));
        imaging::Image degraded = imaging::synth_rain(clean, 7);
        auto rep = swap::swap_table(degraded, clean, 2, fam, swap::Mode::Whole, 0.0);
        const bool none_ok = std::abs(rep.rows[0].psnr_db - imaging::psnr(degraded, clean)) < 1e-9;
        const bool all_ok = rep.rows[15].psnr_db == 100.0;
        check("swap table baselines", none_ok && all_ok);
    }
    // kernels dispatch agreement
    {
        Rng rng(16);
        Tensor<float> a = random_tensor<float>({1, 17, 13}, rng);
        Tensor<float> b = random_tensor<float>({1, 17, 13}, rng);
        Tensor<float> y1(a.shape), y2(a.shape);
        kern::force(kern::Isa::scalar);
        kern::add(a.ptr(), b.ptr(), y1.ptr(), a.numel());
        kern::force(kern::avx2_supported() ? kern::Isa::avx2 : kern::Isa::scalar);
        kern::add(a.ptr(), b.ptr(), y2.ptr(), a.numel());
        kern::force(kern::Isa::scalar);
        check("kernel dispatch agreement", max_abs_diff(y1, y2) == 0.0f);
    }
    std::cout << (failures ? "SELFTEST FAILED\n" : "SELFTEST OK\n");
    return failures ? 1 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pwf: pyramid wavelet-Fourier image restoration toolkit"};
    app.require_subcommand(1);

    if (const char* env = std::getenv("PWF_THREADS")) g_threads = std::max(1, std::atoi(env));
    app.add_option("--threads", g_threads, "worker threads (1 = fully reproducible)")
        ->capture_default_str();

    // analyze
    std::string a_deg, a_cln, a_bands = "HL", a_mode = "whole", a_fam = "db2", a_out;
    int a_levels = 3;
    double a_cutoff = 0.0;
    auto* analyze = app.add_subcommand("analyze", "swap selected sub-bands between a degraded/clean pair");
    analyze->add_option("--degraded", a_deg, "degraded image (png/ppm)")->required();
    analyze->add_option("--clean", a_cln, "clean image (png/ppm)")->required();
    analyze->add_option("--levels", a_levels, "pyramid depth")->capture_default_str();
    analyze->add_option("--bands", a_bands, "bands to swap, e.g. HL,LL")->capture_default_str();
    analyze->add_option("--mode", a_mode, "whole|masked")->capture_default_str();
    analyze->add_option("--cutoff", a_cutoff, "radial cutoff for masked mode")->capture_default_str();
    analyze->add_option("--family", a_fam, "wavelet family")->capture_default_str();
    analyze->add_option("--out", a_out, "output image path");

    // table
    std::string t_deg, t_cln, t_fam = "db2", t_mode = "whole", t_csv;
    int t_levels = 3;
    double t_cutoff = 0.0;
    auto* table = app.add_subcommand("table", "swap-table over all 16 uniform band subsets");
    table->add_option("--degraded", t_deg, "degraded image")->required();
    table->add_option("--clean", t_cln, "clean image")->required();
    table->add_option("--levels", t_levels, "pyramid depth")->capture_default_str();
    table->add_option("--family", t_fam, "wavelet family")->capture_default_str();
    table->add_option("--mode", t_mode, "whole|masked")->capture_default_str();
    table->add_option("--cutoff", t_cutoff, "radial cutoff for masked mode")->capture_default_str();
    table->add_option("--csv", t_csv, "CSV output path");

    // synth
    std::string s_clean, s_out;
    std::uint64_t s_seed = 7;
    double s_density = 1.0;
    auto* synth = app.add_subcommand("synth", "generate a paired rain dataset from clean images");
    synth->add_option("--clean", s_clean, "directory of clean images")->required();
    synth->add_option("--out", s_out, "output dataset directory")->required();
    synth->add_option("--seed", s_seed, "generation seed")->capture_default_str();
    synth->add_option("--density", s_density, "streak density multiplier")->capture_default_str();

    // train
    std::string tr_cfg, tr_data, tr_out, tr_log, tr_variant = "l";
    std::uint64_t tr_seed = 0;
    bool tr_seed_set = false;
    auto* trainc = app.add_subcommand("train", "train a model on a paired dataset");
    trainc->add_option("--config", tr_cfg, "JSON config (model + train sections)")->required();
    trainc->add_option("--data", tr_data, "dataset directory")->required();
    trainc->add_option("--out", tr_out, "checkpoint output path");
    trainc->add_option("--log", tr_log, "CSV log path");
    trainc->add_option("--variant", tr_variant, "s|m|l")->capture_default_str();
    trainc->add_option("--seed", tr_seed, "override training seed")
        ->each([&](const std::string&) { tr_seed_set = true; });

    // infer
    std::string i_ckpt, i_in, i_out, i_variant = "l", i_dump;
    auto* infer = app.add_subcommand("infer", "restore an image with a trained checkpoint");
    infer->add_option("--ckpt", i_ckpt, "checkpoint path")->required();
    infer->add_option("--input", i_in, "degraded input image")->required();
    infer->add_option("--output", i_out, "restored output image");
    infer->add_option("--variant", i_variant, "s|m|l")->capture_default_str();
    infer->add_option("--dump-activations", i_dump, "write activation summaries to this file");

    // bench
    std::string b_ckpt, b_variant = "l";
    int b_size = 256, b_repeat = 3;
    auto* bench = app.add_subcommand("bench", "report params, MACs, and forward latency");
    bench->add_option("--ckpt", b_ckpt, "checkpoint path")->required();
    bench->add_option("--size", b_size, "square input size")->capture_default_str();
    bench->add_option("--variant", b_variant, "s|m|l")->capture_default_str();
    bench->add_option("--repeat", b_repeat, "timing repetitions")->capture_default_str();

    // ablate
    std::string ab_what, ab_data, ab_csv;
    long long ab_budget = 200;
    std::uint64_t ab_seed = 1;
    auto* ablate = app.add_subcommand("ablate", "compare wavelet families, mixer kernels, or losses");
    ablate->add_option("mode", ab_what, "wavelet|kernel|loss")->required();
    ablate->add_option("--data", ab_data, "dataset directory")->required();
    ablate->add_option("--budget", ab_budget, "training iterations per setting")->capture_default_str();
    ablate->add_option("--seed", ab_seed, "seed shared by all settings")->capture_default_str();
    ablate->add_option("--csv", ab_csv, "CSV output path");

    // selftest
    app.add_subcommand("selftest", "run the built-in invariant sweep");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand("analyze"))
            return cmd_analyze(a_deg, a_cln, a_levels, a_bands, a_mode, a_cutoff, a_fam, a_out);
        if (app.got_subcommand("table"))
            return cmd_table(t_deg, t_cln, t_levels, t_fam, t_mode, t_cutoff, t_csv);
        if (app.got_subcommand("synth")) return cmd_synth(s_clean, s_out, s_seed, s_density);
        if (app.got_subcommand("train"))
            return cmd_train(tr_cfg, tr_data, tr_out, tr_log, tr_seed, tr_seed_set, tr_variant);
        if (app.got_subcommand("infer")) return cmd_infer(i_ckpt, i_in, i_out, i_variant, i_dump);
        if (app.got_subcommand("bench")) return cmd_bench(b_ckpt, b_size, b_variant, b_repeat);
        if (app.got_subcommand("ablate")) return cmd_ablate(ab_what, ab_data, ab_budget, ab_seed, ab_csv);
        if (app.got_subcommand("selftest")) return cmd_selftest();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
