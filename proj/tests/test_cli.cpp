#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pwf/imaging.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef PWF_CLI_PATH
#error "PWF_CLI_PATH must point at the pwf binary"
#endif

using namespace pwf;
namespace fs = std::filesystem;

namespace {

fs::path workdir() {
    static fs::path d = [] {
        fs::path p = fs::temp_directory_path() / "pwf_cli_tests";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return d;
}

// run the CLI, capture combined output, return the exit code
int run(const std::string& args, std::string* output = nullptr) {
    const fs::path cap = workdir() / "capture.txt";
    const std::string cmd =
        std::string(PWF_CLI_PATH) + " " + args + " > " + cap.string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    if (output) {
        std::ifstream f(cap);
        std::stringstream ss;
        ss << f.rdbuf();
        *output = ss.str();
    }
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

imaging::Image make_clean(std::uint64_t variant) {
    imaging::Image img({3, 48, 48});
    Rng rng(900 + variant);
    for (int c = 0; c < 3; ++c)
        for (int r = 0; r < 48; ++r)
            for (int q = 0; q < 48; ++q)
                img.at(c, r, q) = 0.2 + 0.5 * r / 48.0 + 0.1 * ((q / 8 + static_cast<int>(variant)) % 3);
    (void)rng;
    return imaging::quantize8(img);
}

} // namespace

TEST_CASE("help exits 0 and lists the subcommands") {
    std::string out;
    CHECK(run("--help", &out) == 0);
    for (const char* sc : {"analyze", "table", "synth", "train", "infer", "bench", "ablate", "selftest"})
        CHECK(out.find(sc) != std::string::npos);
}

TEST_CASE("usage errors exit 2") {
    CHECK(run("", nullptr) == 2);
    CHECK(run("frobnicate", nullptr) == 2);
    CHECK(run("analyze", nullptr) == 2);  // missing required options
    CHECK(run("train --config x.json", nullptr) == 2);
}

TEST_CASE("runtime errors exit 1") {
    std::string out;
    CHECK(run("infer --ckpt /nonexistent.ckpt --input /nonexistent.png", &out) == 1);
    CHECK(out.find("error:") != std::string::npos);
    CHECK(run("synth --clean /no/such/dir --out " + (workdir() / "x").string(), nullptr) == 1);
}

TEST_CASE("selftest passes") {
    std::string out;
    CHECK(run("selftest", &out) == 0);
    CHECK(out.find("SELFTEST OK") != std::string::npos);
    CHECK(out.find("FAIL") == std::string::npos);
}

TEST_CASE("synth / table / train / infer / bench workflow") {
    const fs::path wd = workdir();
    const fs::path cleans = wd / "cleans";
    fs::create_directories(cleans);
    for (int i = 0; i < 4; ++i)
        imaging::save_png((cleans / ("img" + std::to_string(i) + ".png")).string(), make_clean(i));

    std::string out;

    // synth: paired dataset with the expected layout
    const fs::path ds = wd / "ds";
    REQUIRE(run("synth --clean " + cleans.string() + " --out " + ds.string() + " --seed 3", &out) == 0);
    CHECK(out.find("pairs_written=4") != std::string::npos);
    for (int i = 0; i < 4; ++i) {
        CHECK(fs::exists(ds / "pairs" / ("img" + std::to_string(i) + ".clean.png")));
        CHECK(fs::exists(ds / "pairs" / ("img" + std::to_string(i) + ".degraded.png")));
    }

    const std::string deg = (ds / "pairs" / "img0.degraded.png").string();
    const std::string cln = (ds / "pairs" / "img0.clean.png").string();

    // analyze: swapping HL at 2 levels must beat the baseline on rain
    REQUIRE(run("analyze --degraded " + deg + " --clean " + cln +
                    " --levels 2 --bands HL --family haar --out " + (wd / "swapped.png").string(),
                &out) == 0);
    CHECK(fs::exists(wd / "swapped.png"));
    double base = 0, swapped = 0;
    {
        std::istringstream in(out);
        std::string line;
        while (std::getline(in, line)) {
            if (line.rfind("baseline_psnr_db=", 0) == 0) base = std::stod(line.substr(17));
            if (line.rfind("swapped_psnr_db=", 0) == 0) swapped = std::stod(line.substr(16));
        }
    }
    CHECK(base > 0.0);
    CHECK(swapped > base);

    // table: 16 CSV rows with the frozen header
    REQUIRE(run("table --degraded " + deg + " --clean " + cln + " --levels 2 --family haar --csv " +
                    (wd / "table.csv").string(),
                &out) == 0);
    {
        std::ifstream f(wd / "table.csv");
        std::string line;
        std::getline(f, line);
        CHECK(line == "bands,mode,cutoff,psnr_db,ssim");
        int rows = 0;
        while (std::getline(f, line)) ++rows;
        CHECK(rows == 16);
    }

    // train: tiny model, a handful of iterations
    const fs::path cfg = wd / "config.json";
    {
        std::ofstream f(cfg);
        f << R"({"model":{"base_channels":4,"blocks_per_level":[1,1,1],"family":"haar",)"
          << R"("mixer_kernel":0,"seed":5,"io_channels":3},)"
          << R"("train":{"iterations":4,"batch":2,"patch":32,"eval_period":2,"loss":"spatial"}})";
    }
    const std::string ckpt = (wd / "model.ckpt").string();
    REQUIRE(run("train --config " + cfg.string() + " --data " + ds.string() + " --out " + ckpt +
                    " --log " + (wd / "log.csv").string() + " --variant s",
                &out) == 0);
    CHECK(out.find("train_pairs=3 eval_pairs=1") != std::string::npos);
    CHECK(out.find("input_baseline_psnr_db=") != std::string::npos);
    CHECK(out.find("final_loss=") != std::string::npos);
    CHECK(fs::exists(ckpt));
    CHECK(fs::exists(ckpt + ".best"));
    {
        std::ifstream f(wd / "log.csv");
        std::string line;
        std::getline(f, line);
        CHECK(line == "iter,lr,loss,eval_psnr");
        int rows = 0;
        while (std::getline(f, line)) ++rows;
        CHECK(rows == 4);
    }

    // infer: restored image plus activation summaries
    REQUIRE(run("infer --ckpt " + ckpt + " --input " + deg + " --output " +
                    (wd / "restored.png").string() + " --variant s --dump-activations " +
                    (wd / "acts.txt").string(),
                &out) == 0);
    CHECK(out.find("iteration=4") != std::string::npos);
    CHECK(fs::exists(wd / "restored.png"));
    {
        std::ifstream f(wd / "acts.txt");
        std::string line;
        int lines = 0;
        while (std::getline(f, line)) {
            CHECK(line.find("sum=") != std::string::npos);
            CHECK(line.find("maxabs=") != std::string::npos);
            ++lines;
        }
        CHECK(lines >= 3);
    }

    // bench: cost report on the trained checkpoint
    REQUIRE(run("bench --ckpt " + ckpt + " --size 32 --variant s --repeat 3", &out) == 0);
    for (const char* key : {"params_total=", "params_variant=", "macs_estimate=", "latency_ms_median="})
        CHECK(out.find(key) != std::string::npos);
}
