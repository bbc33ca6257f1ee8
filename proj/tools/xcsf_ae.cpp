// Command-line runner: train, resume and reconstruct.
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 training error.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "xcsf/experiment.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kTraining = 3 };

void print_last(const std::vector<xcsf::Checkpoint>& stream) {
    if (stream.empty()) return;
    const auto& c = stream.back();
    std::printf("trial %llu: train_mse=%.6f valid_mse=%.6f mfrac=%.3f P_h=%.2f C_h=%.2f |M|=%.1f\n",
                static_cast<unsigned long long>(c.trial), c.train_mse, c.valid_mse, c.mfrac, c.P_h,
                c.C_h, c.M_size);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Neural XCSF autoencoder: online learning classifier system runner"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "Train from a key=value config file");
    run->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);

    std::string ckpt_path;
    std::uint64_t extra_trials = 0;
    auto* resume = app.add_subcommand("resume", "Continue training from a checkpoint");
    resume->add_option("checkpoint", ckpt_path, "Population checkpoint")->required();
    resume->add_option("--trials", extra_trials, "Additional trials")->required();

    std::string data_path;
    double noise = -1.0;
    bool use_cutout = false;
    std::size_t images = 10;
    std::string image_out;
    auto* recon = app.add_subcommand("reconstruct", "Reconstruct (optionally corrupted) instances");
    recon->add_option("checkpoint", ckpt_path, "Population checkpoint")->required();
    recon->add_option("data", data_path, "Dataset (same format as training)")->required();
    auto* noise_opt = recon->add_option("--noise", noise, "Salt-and-pepper fraction")->check(CLI::Range(0.0, 1.0));
    recon->add_flag("--cutout", use_cutout, "Random rectangular cutout")->excludes(noise_opt);
    recon->add_option("--images", images, "Number of samples exported as graymaps");
    recon->add_option("--out", image_out, "Image directory (default <output>/reconstruction)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*run) {
            const auto cfg = xcsf::load_config(config_path);
            const auto dir = xcsf::output_dir(cfg.output_dir);
            const auto stream = xcsf::run_experiment(cfg, dir);
            print_last(stream);
            std::printf("outputs written to %s\n", dir.string().c_str());
        } else if (*resume) {
            const auto dir = xcsf::output_dir(std::filesystem::path(ckpt_path).parent_path());
            const auto stream = xcsf::resume_experiment(ckpt_path, extra_trials, dir);
            print_last(stream);
            std::printf("outputs written to %s\n", dir.string().c_str());
        } else if (*recon) {
            const auto exp = xcsf::Experiment::load(ckpt_path);
            auto cfg = exp.config();
            cfg.dataset = data_path;
            const auto data = xcsf::load_dataset(cfg);
            xcsf::Corruption corruption;
            if (use_cutout) corruption.kind = xcsf::CorruptionKind::Cutout;
            else if (noise >= 0.0) corruption = {xcsf::CorruptionKind::SaltPepper, noise};
            const std::filesystem::path dir =
                image_out.empty() ? xcsf::output_dir(std::filesystem::path(ckpt_path).parent_path()) / "reconstruction"
                                  : std::filesystem::path(image_out);
            const auto rep = xcsf::reconstruct(exp, data, corruption, dir, images);
            std::printf("samples=%zu split=%s\n", rep.samples, rep.used_validation_split ? "validation" : "all");
            std::printf("corrupted_input_mse=%.6f\n", rep.corrupted_mse);
            std::printf("reconstruction_mse=%.6f\n", rep.reconstruction_mse);
            std::printf("images_written=%zu\n", rep.images_written);
            if (rep.image_error) {
                std::fprintf(stderr, "error: %s\n", rep.image_error->c_str());
                return kData;
            }
        }
    } catch (const xcsf::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kUsage;
    } catch (const xcsf::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kData;
    } catch (const xcsf::FormatError& e) {
        std::fprintf(stderr, "checkpoint error: %s\n", e.what());
        return kData;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "training error: %s\n", e.what());
        return kTraining;
    }
    return kOk;
}
