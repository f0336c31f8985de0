// productae — train, evaluate, and verify neural product channel codes.
//
// Commands:
//   train      run the alternating training schedule from a config file
//   eval       Monte-Carlo BER/BLER of a checkpoint at given SNR points
//   sweep      alias of eval for range sweeps
//   gradcheck  finite-difference verification of the end-to-end gradients
//   oracle     exhaustive GF(2) product-code identities
//
// Exit codes: 0 ok, 1 verification failure, 2 usage/config error,
// 3 I/O error, 4 unreadable or incompatible checkpoint.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pae/config.hpp"
#include "pae/evaluation.hpp"
#include "pae/fdcheck.hpp"
#include "pae/gf2.hpp"
#include "pae/model.hpp"
#include "pae/training.hpp"

namespace fs = std::filesystem;
using namespace pae;

namespace {

constexpr int kExitVerification = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitCheckpoint = 4;

struct TrainOptions {
    std::string config_path;
    std::optional<std::size_t> epochs_override;
    std::optional<std::uint64_t> seed_override;
};

struct EvalOptions {
    std::string checkpoint_path;
    std::string snr_spec;
    std::string ebn0_spec;
    bool rate_from_checkpoint = false;
    double rate_override = 0.0;
    std::uint64_t min_block_errors = 100;
    std::uint64_t max_blocks = 1'000'000;
    std::uint64_t seed = 1;
    std::size_t workers = 1;
    std::string out_csv;
};

struct GradcheckOptions {
    std::size_t samples = 10;
    std::uint64_t seed = 1;
};

void ensure_parent_dir(const std::string& file_path) {
    const fs::path parent = fs::path(file_path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
}

template <typename T>
int run_train_typed(const cfg::RunConfig& run) {
    ProductAe<T> model(run.code, run.model);
    model.init_weights(run.train.seed);
    Trainer<T> trainer(model, run.train);

    fs::create_directories(run.paths.checkpoint_dir);
    trainer.set_checkpoint_dir(run.paths.checkpoint_dir);

    ensure_parent_dir(run.paths.log_csv);
    std::ofstream log(run.paths.log_csv, std::ios::trunc);
    if (!log) throw std::ios_base::failure("cannot write training log '" + run.paths.log_csv + "'");
    trainer.set_log(&log);

    std::printf("training %zux%zu ProductAE (%zu,%zu)x(%zu,%zu), %zu epochs\n",
                run.code.n(), run.code.k(), run.code.n1, run.code.k1, run.code.n2, run.code.k2,
                run.train.epochs);
    trainer.train();
    trainer.large_batch_finetune();
    std::printf("done: %zu epochs, best decoder loss %.6f, checkpoints in %s\n",
                trainer.epoch(), trainer.best_dec_loss(), run.paths.checkpoint_dir.c_str());
    return 0;
}

int run_train(const TrainOptions& opts) {
    auto run = cfg::load_config(opts.config_path);
    if (opts.epochs_override) run.train.epochs = *opts.epochs_override;
    if (opts.seed_override) run.train.seed = *opts.seed_override;
    run.validate();
    return run.precision == cfg::Precision::f32 ? run_train_typed<float>(run)
                                                : run_train_typed<double>(run);
}

template <typename T>
std::vector<eval::EvalResult> run_eval_typed(const EvalOptions& opts,
                                             const std::vector<double>& snrs) {
    auto model = Trainer<T>::load_model(opts.checkpoint_path);
    eval::ProductAeCodec<T> codec(model);
    eval::EvalStop stop;
    stop.min_block_errors = opts.min_block_errors;
    stop.max_blocks = opts.max_blocks;
    return eval::sweep(codec, snrs, model.geometry.rate(), stop, opts.seed, opts.workers);
}

int run_eval(const EvalOptions& opts) {
    const auto meta = ckpt::read_checkpoint_meta(opts.checkpoint_path);
    const auto dtype = meta.at("dtype").get<std::string>();
    const double rate = [&] {
        const auto& c = meta.at("code");
        const double k = c.at("k1").get<double>() * c.at("k2").get<double>();
        const double n = c.at("n1").get<double>() * c.at("n2").get<double>();
        return k / n;
    }();

    if (opts.snr_spec.empty() == opts.ebn0_spec.empty())
        throw ConfigError("eval: give exactly one of --snr or --ebn0");
    std::vector<double> snrs;
    if (!opts.snr_spec.empty()) {
        snrs = cfg::parse_snr_spec(opts.snr_spec);
    } else {
        const double r = opts.rate_from_checkpoint ? rate : opts.rate_override;
        if (!(r > 0.0))
            throw ConfigError("eval: --ebn0 needs --rate-from-checkpoint or --rate R");
        for (double e : cfg::parse_snr_spec(opts.ebn0_spec))
            snrs.push_back(channel::snr_db_from_ebn0_db(e, r));
    }

    const auto results = dtype == "f32" ? run_eval_typed<float>(opts, snrs)
                                        : run_eval_typed<double>(opts, snrs);

    std::printf("%8s %8s %12s %12s %10s %10s\n", "snr_db", "ebn0_db", "ber", "bler", "bits",
                "blocks");
    for (const auto& r : results)
        std::printf("%8.3f %8.3f %12.4e %12.4e %10llu %10llu\n", r.snr_db, r.ebn0_db, r.ber,
                    r.bler, static_cast<unsigned long long>(r.bits_sent),
                    static_cast<unsigned long long>(r.blocks_sent));

    if (!opts.out_csv.empty()) {
        ensure_parent_dir(opts.out_csv);
        std::ofstream out(opts.out_csv, std::ios::trunc);
        if (!out) throw std::ios_base::failure("cannot write '" + opts.out_csv + "'");
        eval::write_csv(out, results);
        std::printf("wrote %s\n", opts.out_csv.c_str());
    }
    return 0;
}

int run_gradcheck(const GradcheckOptions& opts) {
    const CodeGeometry geo{2, 2, 3, 3};
    const ModelHyper hyper{2, 2, 1, 8, 1, 8, 1};
    ProductAe<double> model(geo, hyper);
    model.init_weights(opts.seed);

    auto params = model.encoder_params();
    auto theta = model.decoder_params();
    params.insert(params.end(), theta.begin(), theta.end());
    fd::jitter_params(params, derive_seed(opts.seed, 1));

    Rng rng(derive_seed(opts.seed, 2));
    auto u = random_message_tensor<double>(3, geo, rng);
    std::normal_distribution<double> dist(0.0, std::sqrt(channel::noise_sigma2_from_snr_db(2.0)));
    std::vector<double> nd(3 * geo.n());
    for (auto& v : nd) v = dist(rng);
    auto noise = Tensor<double>::from({3, geo.n2, geo.n1}, std::move(nd));

    const auto res = fd::check_gradients<double>(
        params,
        [&] { return bce_with_logits(model.decode(add(model.encode(u), noise)), u); }, 1e-5,
        opts.samples, derive_seed(opts.seed, 3));

    const bool ok = res.max_rel_err < 1e-3;
    std::printf("gradcheck: %zu sampled parameters, max relative error %.3e -> %s\n", res.checked,
                res.max_rel_err, ok ? "PASS" : "FAIL");
    if (!ok) std::fprintf(stderr, "gradcheck: end-to-end gradient exceeds 1e-3 tolerance\n");
    return ok ? 0 : kExitVerification;
}

int run_oracle() {
    bool all_ok = true;
    auto report = [&](const char* name, bool ok) {
        std::printf("%-52s %s\n", name, ok ? "PASS" : "FAIL");
        all_ok = all_ok && ok;
    };

    const auto spc = gf2::single_parity_check_code(3);
    const auto ham = gf2::hamming_7_4();

    for (const auto* pair : {"SPC(3,2)^2", "Hamming(7,4)^2"}) {
        const auto& comp = std::string(pair) == "SPC(3,2)^2" ? spc : ham;
        std::vector<gf2::LinearCode> codes{comp, comp};
        const auto params = gf2::product_params(codes);
        const auto d_comp = gf2::min_distance_bruteforce(comp);
        const auto d_prod = gf2::min_distance_bruteforce_product(codes);
        std::printf("%s: n=%zu k=%zu R=%.4f d=%zu (component d=%zu)\n", pair, params.n(),
                    params.k(), params.rate(), d_prod, d_comp);

        report("  parameter products n,k,R",
               params.n() == comp.n * comp.n && params.k() == comp.k * comp.k);
        report("  distance product d = d1*d2", d_prod == d_comp * d_comp);

        gf2::LinearCode flat{gf2::product_generator_2d(comp, comp)};
        bool kron_ok = true, commute_ok = true;
        for (std::uint64_t msg = 0; msg < (1ull << params.k()); ++msg) {
            gf2::NdArray u = gf2::NdArray::zeros({comp.k, comp.k});
            for (std::size_t i = 0; i < params.k(); ++i) u.bits[i] = (msg >> i) & 1u;
            const auto rows_first = gf2::encode_product_order(codes, u, {1, 2});
            const auto cols_first = gf2::encode_product_order(codes, u, {2, 1});
            commute_ok = commute_ok && rows_first.bits == cols_first.bits;
            kron_ok = kron_ok &&
                      gf2::vec_column_major(rows_first) == flat.encode(gf2::vec_column_major(u));
        }
        report("  row/column encode order commutes", commute_ok);
        report("  Kronecker generator equivalence", kron_ok);
    }

    std::printf("oracle: %s\n", all_ok ? "PASS" : "FAIL");
    return all_ok ? 0 : kExitVerification;
}

void add_eval_options(CLI::App* cmd, EvalOptions& opts) {
    cmd->add_option("--checkpoint", opts.checkpoint_path, "checkpoint file to evaluate")
        ->required();
    cmd->add_option("--snr", opts.snr_spec, "SNR points in dB: a:b:step, list, or single value");
    cmd->add_option("--ebn0", opts.ebn0_spec, "Eb/N0 points in dB (needs a rate)");
    cmd->add_flag("--rate-from-checkpoint", opts.rate_from_checkpoint,
                  "convert --ebn0 using the checkpoint's code rate");
    cmd->add_option("--rate", opts.rate_override, "explicit code rate for --ebn0 conversion");
    cmd->add_option("--min-block-errors", opts.min_block_errors,
                    "stop a point after this many block errors");
    cmd->add_option("--max-blocks", opts.max_blocks, "hard cap on simulated blocks per point");
    cmd->add_option("--seed", opts.seed, "simulation seed");
    cmd->add_option("--workers", opts.workers, "parallel evaluation workers");
    cmd->add_option("--out", opts.out_csv, "write results CSV here");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"neural product channel codes: training, evaluation, verification"};
    app.require_subcommand(1);

    TrainOptions train_opts;
    auto* train_cmd = app.add_subcommand("train", "run the alternating training schedule");
    train_cmd->add_option("--config", train_opts.config_path, "run configuration file")
        ->required();
    std::size_t epochs_val = 0;
    std::uint64_t seed_val = 0;
    auto* epochs_opt = train_cmd->add_option("--epochs", epochs_val, "override epoch count");
    auto* seed_opt = train_cmd->add_option("--seed", seed_val, "override training seed");

    EvalOptions eval_opts;
    auto* eval_cmd = app.add_subcommand("eval", "Monte-Carlo BER/BLER of a checkpoint");
    add_eval_options(eval_cmd, eval_opts);
    EvalOptions sweep_opts;
    auto* sweep_cmd = app.add_subcommand("sweep", "SNR sweep of a checkpoint (same as eval)");
    add_eval_options(sweep_cmd, sweep_opts);

    GradcheckOptions grad_opts;
    auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference gradient verification");
    grad_cmd->add_option("--samples", grad_opts.samples, "sampled entries per parameter tensor");
    grad_cmd->add_option("--seed", grad_opts.seed, "verification seed");

    auto* oracle_cmd = app.add_subcommand("oracle", "exhaustive GF(2) product-code checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (train_cmd->parsed()) {
            if (epochs_opt->count()) train_opts.epochs_override = epochs_val;
            if (seed_opt->count()) train_opts.seed_override = seed_val;
            return run_train(train_opts);
        }
        if (eval_cmd->parsed()) return run_eval(eval_opts);
        if (sweep_cmd->parsed()) return run_eval(sweep_opts);
        if (grad_cmd->parsed()) return run_gradcheck(grad_opts);
        if (oracle_cmd->parsed()) return run_oracle();
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const CheckpointError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitCheckpoint;
    } catch (const std::ios_base::failure& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return kExitIo;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitVerification;
    }
    return kExitUsage;
}
