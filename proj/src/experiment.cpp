#include "xcsf/experiment.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "xcsf/binary_io.hpp"

namespace xcsf {

namespace {

constexpr char kMagic[8] = {'X', 'C', 'S', 'F', 'C', 'K', 'P', 'T'};
constexpr std::uint64_t kFormatVersion = 1;

Dataset with_split(Dataset ds, const ExperimentConfig& cfg) {
    Rng split_rng(derive_seed(cfg.seed, kStreamSplit));
    split(ds, cfg.train_ratio, split_rng);
    return ds;
}

std::string read_binary(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw FormatError("cannot open checkpoint: " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

Experiment::Experiment(ExperimentConfig cfg, Dataset ds)
    : cfg_(std::move(cfg)), ds_(with_split(std::move(ds), cfg_)), rng_(derive_seed(cfg_.seed, kStreamTraining)) {
    cfg_.validate();
    if (ds_.train_idx.empty()) throw DataError("training split is empty");
    pop_ = initial_population(ds_.n, cfg_, rng_);
}

Experiment Experiment::from_config(ExperimentConfig cfg) {
    Dataset ds = load_dataset(cfg);
    return Experiment(std::move(cfg), std::move(ds));
}

void Experiment::save(const std::filesystem::path& checkpoint) const {
    std::ostringstream payload(std::ios::binary);
    BinaryWriter w(payload);
    w.str(to_config_text(cfg_));
    w.u64(ds_.rows);
    w.u64(ds_.n);
    w.u64(ds_.fingerprint());
    w.str(rng_.state());
    w.f64(window_mse_);
    w.f64(window_match_);
    w.u64(window_count_);
    write_population(w, pop_);
    const std::string body = payload.str();

    std::ostringstream file(std::ios::binary);
    file.write(kMagic, sizeof kMagic);
    BinaryWriter fw(file);
    fw.u64(kFormatVersion);
    fw.u64(body.size());
    file.write(body.data(), static_cast<std::streamsize>(body.size()));
    fw.u64(fnv1a(body));
    const std::string bytes = file.str();

    if (checkpoint.has_parent_path()) std::filesystem::create_directories(checkpoint.parent_path());
    auto tmp = checkpoint;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write checkpoint: " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("failed writing checkpoint: " + tmp.string());
    }
    std::filesystem::rename(tmp, checkpoint);
}

Experiment Experiment::load(const std::filesystem::path& checkpoint, std::optional<Dataset> dataset) {
    const std::string bytes = read_binary(checkpoint);
    if (bytes.size() < sizeof kMagic + 24 || bytes.compare(0, sizeof kMagic, kMagic, sizeof kMagic) != 0)
        throw FormatError("not a checkpoint file: " + checkpoint.string());
    std::istringstream head(bytes.substr(sizeof kMagic, 16), std::ios::binary);
    BinaryReader hr(head);
    const auto version = hr.u64();
    if (version != kFormatVersion)
        throw FormatError("unsupported checkpoint version " + std::to_string(version));
    const auto body_len = hr.u64();
    const std::size_t body_off = sizeof kMagic + 16;
    if (body_len != bytes.size() - body_off - 8) throw FormatError("checkpoint is truncated or padded");
    const std::string body = bytes.substr(body_off, body_len);
    std::istringstream tail(bytes.substr(body_off + body_len), std::ios::binary);
    if (BinaryReader(tail).u64() != fnv1a(body)) throw FormatError("checkpoint checksum mismatch");

    std::istringstream in(body, std::ios::binary);
    BinaryReader r(in);
    Experiment e;
    try {
        e.cfg_ = parse_config(r.str());
    } catch (const ConfigError& err) {
        throw FormatError(std::string("checkpoint holds an invalid config: ") + err.what());
    }
    const auto rows = r.u64();
    const auto n = r.u64();
    const auto fp = r.u64();
    e.rng_.set_state(r.str());
    e.window_mse_ = r.f64();
    e.window_match_ = r.f64();
    e.window_count_ = r.u64();
    e.pop_ = read_population(r);

    Dataset ds = dataset ? std::move(*dataset) : load_dataset(e.cfg_);
    if (ds.rows != rows || ds.n != n || ds.fingerprint() != fp)
        throw DataError("dataset does not match the checkpoint's fingerprint");
    e.ds_ = with_split(std::move(ds), e.cfg_);
    return e;
}

double Experiment::evaluate(std::span<const std::size_t> rows) const {
    if (rows.empty()) return 0.0;
    double total = 0.0;
    for (auto r : rows) {
        const auto x = ds_.row(r);
        total += mse(predict(pop_, x, cfg_).output, x);
    }
    return total / static_cast<double>(rows.size());
}

Checkpoint Experiment::measure() {
    Checkpoint c = population_stats(pop_);
    c.trial = pop_.trial;
    if (window_count_ > 0) {
        c.train_mse = window_mse_ / static_cast<double>(window_count_);
        c.M_size = window_match_ / static_cast<double>(window_count_);
    } else {
        double err = 0.0, msize = 0.0;
        for (auto r : ds_.train_idx) {
            const auto x = ds_.row(r);
            const auto p = predict(pop_, x, cfg_);
            err += mse(p.output, x);
            msize += static_cast<double>(p.match_set_micro);
        }
        c.train_mse = err / static_cast<double>(ds_.train_idx.size());
        c.M_size = msize / static_cast<double>(ds_.train_idx.size());
    }
    c.valid_mse = evaluate(ds_.valid_idx);
    c.mfrac = best_classifier(pop_, ds_.features, ds_.n, cfg_).mfrac;
    window_mse_ = 0.0;
    window_match_ = 0.0;
    window_count_ = 0;
    return c;
}

void Experiment::train(std::uint64_t trials, const std::function<void(const Checkpoint&)>& on_checkpoint) {
    for (std::uint64_t t = 0; t < trials; ++t) {
        const std::size_t r = ds_.train_idx[rng_.uniform_index(ds_.train_idx.size())];
        const auto x = ds_.row(r);
        const TrialOutcome out = run_trial(pop_, x, cfg_, rng_);
        window_mse_ += mse(out.output, x);
        window_match_ += static_cast<double>(out.match_set_micro);
        ++window_count_;
        if (pop_.trial % cfg_.checkpoint_interval == 0) {
            const Checkpoint c = measure();
            if (on_checkpoint) on_checkpoint(c);
        }
    }
}

RunOutputs run_outputs(const std::filesystem::path& dir) {
    return {dir / "metrics.csv", dir / "population.ckpt", dir / "manifest.json"};
}

std::filesystem::path output_dir(const std::filesystem::path& fallback) {
    if (const char* env = std::getenv("XCSF_OUTPUT_DIR"); env && *env) return env;
    return fallback;
}

namespace {

void write_manifest(const Experiment& e, const RunOutputs& out, std::uint64_t start,
                    std::uint64_t end) {
    nlohmann::ordered_json m;
    m["config"] = to_config_text(e.config());
    m["seed"] = e.config().seed;
    m["dataset"] = {{"path", e.config().dataset},
                    {"rows", e.dataset().rows},
                    {"features", e.dataset().n},
                    {"fingerprint", e.dataset().fingerprint()}};
    m["outputs"] = {{"metrics", out.metrics_csv.string()},
                    {"checkpoint", out.checkpoint.string()},
                    {"manifest", out.manifest.string()}};
    m["start_trial"] = start;
    m["end_trial"] = end;
    std::ofstream f(out.manifest);
    if (!f) throw std::runtime_error("cannot write manifest: " + out.manifest.string());
    f << m.dump(2) << '\n';
}

}  // namespace

std::vector<Checkpoint> run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    Experiment e = Experiment::from_config(cfg);
    std::filesystem::create_directories(dir);
    const RunOutputs out = run_outputs(dir);
    std::ofstream csv(out.metrics_csv, std::ios::trunc);
    if (!csv) throw std::runtime_error("cannot write metrics: " + out.metrics_csv.string());

    std::vector<Checkpoint> stream;
    auto emit = [&](const Checkpoint& c) {
        stream.push_back(c);
        csv << checkpoint_csv_row(c) << '\n' << std::flush;
    };
    csv << checkpoint_csv_header() << '\n';
    emit(e.measure());
    e.train(cfg.trials, emit);
    e.save(out.checkpoint);
    write_manifest(e, out, 0, e.trial());
    return stream;
}

std::vector<Checkpoint> resume_experiment(const std::filesystem::path& checkpoint,
                                          std::uint64_t extra_trials,
                                          const std::filesystem::path& dir) {
    Experiment e = Experiment::load(checkpoint);
    const std::uint64_t start = e.trial();
    std::filesystem::create_directories(dir);
    const RunOutputs out = run_outputs(dir);
    const bool fresh = !std::filesystem::exists(out.metrics_csv);
    std::ofstream csv(out.metrics_csv, std::ios::app);
    if (!csv) throw std::runtime_error("cannot write metrics: " + out.metrics_csv.string());
    if (fresh) csv << checkpoint_csv_header() << '\n';

    std::vector<Checkpoint> stream;
    e.train(extra_trials, [&](const Checkpoint& c) {
        stream.push_back(c);
        csv << checkpoint_csv_row(c) << '\n' << std::flush;
    });
    if (extra_trials > 0 || std::filesystem::absolute(out.checkpoint) != std::filesystem::absolute(checkpoint))
        e.save(out.checkpoint);
    write_manifest(e, out, start, e.trial());
    return stream;
}

void write_pgm(const std::filesystem::path& path, std::span<const double> pixels, std::size_t width,
               std::size_t height) {
    if (pixels.size() != width * height) throw std::invalid_argument("write_pgm: size mismatch");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write image: " + path.string());
    f << "P5\n" << width << ' ' << height << "\n255\n";
    for (double v : pixels) {
        const double c = std::clamp(v, 0.0, 1.0);
        f.put(static_cast<char>(static_cast<unsigned char>(std::lround(c * 255.0))));
    }
}

ReconstructionReport reconstruct(const Experiment& exp, const Dataset& data,
                                 const Corruption& corruption,
                                 const std::optional<std::filesystem::path>& image_dir,
                                 std::size_t max_images) {
    if (data.n != exp.dataset().n) throw DataError("dataset feature count does not match the model");
    ReconstructionReport rep;
    std::vector<std::size_t> rows;
    if (data.fingerprint() == exp.dataset().fingerprint() && !exp.dataset().valid_idx.empty()) {
        rows = exp.dataset().valid_idx;
        rep.used_validation_split = true;
    } else {
        rows.resize(data.rows);
        std::iota(rows.begin(), rows.end(), std::size_t{0});
    }

    const bool want_images = image_dir.has_value() && max_images > 0;
    if (want_images && !data.image_shape)
        rep.image_error = "dataset has no image shape; image export skipped";
    if (want_images && !rep.image_error) std::filesystem::create_directories(*image_dir);

    Rng rng(derive_seed(exp.config().seed, kStreamCorruption));
    for (auto r : rows) {
        const auto clean = data.row(r);
        std::vector<double> noisy;
        switch (corruption.kind) {
            case CorruptionKind::None: noisy.assign(clean.begin(), clean.end()); break;
            case CorruptionKind::SaltPepper: noisy = salt_pepper(clean, corruption.fraction, rng); break;
            case CorruptionKind::Cutout: noisy = cutout(clean, data.image_shape, rng); break;
        }
        const auto recon = predict(exp.population(), noisy, exp.config()).output;
        rep.per_sample_corrupted.push_back(mse(noisy, clean));
        rep.per_sample_reconstruction.push_back(mse(recon, clean));

        if (want_images && !rep.image_error && rep.images_written < max_images) {
            const ImageShape& s = *data.image_shape;
            const std::size_t plane = s.height * s.width;
            const std::string stem = "sample_" + std::to_string(rep.images_written);
            const std::pair<const char*, std::span<const double>> views[] = {
                {"original", clean}, {"corrupted", noisy}, {"reconstruction", recon}};
            for (const auto& [name, v] : views) {
                for (std::size_t c = 0; c < s.channels; ++c) {
                    std::string file = stem + "_" + name;
                    if (s.channels > 1) file += "_c" + std::to_string(c);
                    write_pgm(*image_dir / (file + ".pgm"), v.subspan(c * plane, plane), s.width, s.height);
                }
            }
            ++rep.images_written;
        }
    }
    rep.samples = rows.size();
    for (std::size_t i = 0; i < rep.samples; ++i) {
        rep.reconstruction_mse += rep.per_sample_reconstruction[i];
        rep.corrupted_mse += rep.per_sample_corrupted[i];
    }
    if (rep.samples > 0) {
        rep.reconstruction_mse /= static_cast<double>(rep.samples);
        rep.corrupted_mse /= static_cast<double>(rep.samples);
    }
    return rep;
}

}  // namespace xcsf
