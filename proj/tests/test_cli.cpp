#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
};

Result run_cli(const std::string& args, const fs::path& dir) {
    const fs::path log = dir / "cli.log";
    const std::string cmd = std::string("\"") + XCSF_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

fs::path scratch() {
    const fs::path dir = fs::temp_directory_path() / "xcsf_cli_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_data(const fs::path& p) {
    std::ofstream out(p);
    for (int r = 0; r < 30; ++r) {
        for (int i = 0; i < 9; ++i) out << (i ? "," : "") << ((i + r) % 3 == 0 ? 0.9 : 0.1);
        out << "\n";
    }
}

}  // namespace

TEST_CASE("cli run, resume and reconstruct") {
    const fs::path dir = scratch();
    write_data(dir / "d.csv");
    {
        std::ofstream cfg(dir / "run.cfg");
        cfg << "N = 40\ntrials = 600\ncheckpoint_interval = 200\nimage_shape = 3x3\n"
            << "dataset = " << (dir / "d.csv").string() << "\noutput_dir = " << (dir / "out").string() << "\n";
    }
    const Result run = run_cli("run " + (dir / "run.cfg").string(), dir);
    CHECK(run.code == 0);
    CHECK(run.out.find("trial 600") != std::string::npos);
    CHECK(fs::exists(dir / "out" / "metrics.csv"));

    const std::string ckpt = (dir / "out" / "population.ckpt").string();
    const Result resume = run_cli("resume " + ckpt + " --trials 200", dir);
    CHECK(resume.code == 0);
    CHECK(resume.out.find("trial 800") != std::string::npos);

    const Result recon = run_cli("reconstruct " + ckpt + " " + (dir / "d.csv").string() +
                                     " --noise 0.2 --images 2 --out " + (dir / "img").string(),
                                 dir);
    CHECK(recon.code == 0);
    CHECK(recon.out.find("reconstruction_mse=") != std::string::npos);
    CHECK(recon.out.find("corrupted_input_mse=") != std::string::npos);
    CHECK(fs::exists(dir / "img" / "sample_1_corrupted.pgm"));

    const Result cut = run_cli("reconstruct " + ckpt + " " + (dir / "d.csv").string() + " --cutout --images 0", dir);
    CHECK(cut.code == 0);

    SUBCASE("error exit codes") {
        CHECK(run_cli("", dir).code == 1);
        CHECK(run_cli("run /nonexistent.cfg", dir).code == 1);
        std::ofstream(dir / "bad.cfg") << "N = -4\n";
        CHECK(run_cli("run " + (dir / "bad.cfg").string(), dir).code == 1);
        std::ofstream(dir / "missing.cfg") << "dataset = " << (dir / "nope.csv").string() << "\n";
        CHECK(run_cli("run " + (dir / "missing.cfg").string(), dir).code == 2);
        std::ofstream(dir / "junk.ckpt") << "not a checkpoint";
        CHECK(run_cli("resume " + (dir / "junk.ckpt").string() + " --trials 5", dir).code == 2);
        CHECK(run_cli("reconstruct " + ckpt + " " + (dir / "d.csv").string() + " --noise 2", dir).code == 1);
    }
    fs::remove_all(dir);
}
