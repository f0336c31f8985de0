#pragma once

#include <chrono>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "pae/channel.hpp"
#include "pae/checkpoint.hpp"
#include "pae/errors.hpp"
#include "pae/model.hpp"
#include "pae/nn.hpp"

// Alternating training schedules: each epoch runs t_dec decoder-only steps
// followed by t_enc encoder-only steps. Decoder steps draw one SNR per
// sample from [gamma - 2.5, gamma + 1] dB; encoder steps use the single
// point gamma. Batches larger than micro_batch_size are realized by
// accumulating gradients over l = batch/micro micro-batches with the loss
// scaled by 1/l, which reproduces the large-batch gradient exactly.

namespace pae {

struct TrainingConfig {
    std::size_t batch_size = 500;       // B, information arrays per step
    std::size_t micro_batch_size = 0;   // B_s; 0 means B (single micro-batch)
    std::size_t t_enc = 10;
    std::size_t t_dec = 50;
    double lr_enc = 2e-4;
    double lr_dec = 2e-4;
    double gamma_db = 2.0;
    double dec_snr_low_offset = -2.5;
    double dec_snr_high_offset = 1.0;
    std::size_t epochs = 60;
    std::size_t finetune_batch_size = 0;  // 0 disables fine-tuning
    std::size_t finetune_epochs = 0;
    std::uint64_t seed = 1;

    std::size_t micro_size() const { return micro_batch_size == 0 ? batch_size : micro_batch_size; }
    std::size_t micro_count() const { return batch_size / micro_size(); }

    void validate() const {
        if (batch_size == 0) throw ConfigError("train: batch_size must be positive");
        if (batch_size % micro_size() != 0)
            throw ConfigError("train: micro_batch_size must divide batch_size");
        if (dec_snr_low_offset >= dec_snr_high_offset)
            throw ConfigError("train: decoder SNR range is empty");
        if (lr_enc <= 0.0 || lr_dec <= 0.0)
            throw ConfigError("train: learning rates must be positive");
        if (finetune_batch_size != 0 && finetune_batch_size % micro_size() != 0)
            throw ConfigError("train: micro_batch_size must divide finetune_batch_size");
    }
};

// SNR policies, exposed so the statistics tests can sample them directly.
inline std::vector<double> decoder_snr_draws_db(const TrainingConfig& cfg, std::size_t count,
                                                Rng& rng) {
    std::uniform_real_distribution<double> dist(cfg.gamma_db + cfg.dec_snr_low_offset,
                                                cfg.gamma_db + cfg.dec_snr_high_offset);
    std::vector<double> snrs(count);
    for (auto& s : snrs) s = dist(rng);
    return snrs;
}

inline double encoder_snr_db(const TrainingConfig& cfg) { return cfg.gamma_db; }

struct EpochStats {
    std::size_t epoch = 0;
    double mean_dec_loss = 0.0;
    double mean_enc_loss = 0.0;
    double dec_wall_ms = 0.0;
    double enc_wall_ms = 0.0;
    std::size_t dec_steps = 0;
    std::size_t enc_steps = 0;
};

namespace detail {

template <typename T>
struct RequiresGradOff {
    explicit RequiresGradOff(std::vector<Tensor<T>>& params) : params_(params) {
        set_requires_grad(params_, false);
    }
    ~RequiresGradOff() { set_requires_grad(params_, true); }
    std::vector<Tensor<T>>& params_;
};

}  // namespace detail

template <typename T>
class Trainer {
public:
    Trainer(ProductAe<T>& model, TrainingConfig cfg)
        : model_(&model), cfg_(cfg), phi_(model.encoder_params()),
          theta_(model.decoder_params()), opt_enc_(phi_, cfg.lr_enc),
          opt_dec_(theta_, cfg.lr_dec), rng_(cfg.seed) {
        cfg_.validate();
    }

    const TrainingConfig& config() const { return cfg_; }
    std::size_t epoch() const { return epoch_; }
    double best_dec_loss() const { return best_dec_loss_; }
    bool has_best_checkpoint() const { return !best_path_.empty(); }
    const std::string& best_checkpoint_path() const { return best_path_; }

    void set_checkpoint_dir(std::string dir) { ckpt_dir_ = std::move(dir); }
    void set_log(std::ostream* os) { log_ = os; }

    // One decoder-schedule step: fresh random messages, frozen encoder, one
    // Adam step on the decoder weights. Returns the batch mean loss.
    double decoder_step() { return decoder_step_batched(cfg_.batch_size); }

    // One encoder-schedule step: gradients flow through the frozen decoder
    // into the encoder weights only.
    double encoder_step() { return encoder_step_batched(cfg_.batch_size); }

    EpochStats run_epoch() { return run_epoch_batched(cfg_.batch_size); }

    // Full schedule: cfg.epochs epochs, CSV logging, and a checkpoint
    // whenever the decoder-schedule mean loss improves on the best record.
    void train() {
        write_log_header();
        if (!ckpt_dir_.empty()) save_checkpoint(ckpt_dir_ + "/init.pae");
        for (std::size_t e = 0; e < cfg_.epochs; ++e) run_logged_epoch(cfg_.batch_size);
    }

    // Reloads the best checkpoint, then continues for finetune_epochs with
    // the large batch realized through gradient accumulation.
    void large_batch_finetune() {
        if (cfg_.finetune_batch_size == 0 || cfg_.finetune_epochs == 0) return;
        if (best_path_.empty())
            throw CheckpointError("finetune: no best checkpoint has been written yet");
        restore(best_path_);
        for (std::size_t e = 0; e < cfg_.finetune_epochs; ++e)
            run_logged_epoch(cfg_.finetune_batch_size);
    }

    void save_checkpoint(const std::string& path) const {
        ckpt::CheckpointFile file;
        file.meta = {
            {"code",
             {{"k1", model_->geometry.k1},
              {"k2", model_->geometry.k2},
              {"n1", model_->geometry.n1},
              {"n2", model_->geometry.n2}}},
            {"model",
             {{"iterations", model_->hyper.iterations},
              {"feature_size", model_->hyper.feature_size},
              {"enc_hidden_layers", model_->hyper.enc_hidden_layers},
              {"enc_hidden_width", model_->hyper.enc_hidden_width},
              {"dec_hidden_layers", model_->hyper.dec_hidden_layers},
              {"dec_hidden_width", model_->hyper.dec_hidden_width},
              {"dec_last_pair_hidden_layers", model_->hyper.dec_last_pair_hidden_layers}}},
            {"train",
             {{"epoch", epoch_},
              {"best_dec_loss", best_dec_loss_},
              {"lr_enc", opt_enc_.lr()},
              {"lr_dec", opt_dec_.lr()},
              {"adam_beta1", opt_enc_.beta1()},
              {"adam_beta2", opt_enc_.beta2()},
              {"adam_eps", opt_enc_.eps()},
              {"adam_t_enc", opt_enc_.step_count()},
              {"adam_t_dec", opt_dec_.step_count()}}},
            {"dtype", ckpt::dtype_name<T>()},
        };
        append_params(file, "phi", phi_);
        append_params(file, "theta", theta_);
        append_moments(file, "adam_enc", opt_enc_);
        append_moments(file, "adam_dec", opt_dec_);
        ckpt::write_checkpoint_file(path, file);
    }

    // Restores parameters, optimizer state, and counters from a checkpoint
    // written for the same geometry, hyperparameters, and dtype.
    void restore(const std::string& path) {
        const auto file = ckpt::read_checkpoint_file(path);
        check_compatible(file.meta);
        load_params(file, "phi", phi_);
        load_params(file, "theta", theta_);
        load_moments(file, "adam_enc", opt_enc_);
        load_moments(file, "adam_dec", opt_dec_);
        const auto& train = file.meta.at("train");
        epoch_ = train.at("epoch").get<std::size_t>();
        // infinity (no epoch recorded yet) serializes as JSON null
        const auto& best = train.at("best_dec_loss");
        best_dec_loss_ =
            best.is_number() ? best.get<double>() : std::numeric_limits<double>::infinity();
        opt_enc_.set_step_count(train.at("adam_t_enc").get<std::int64_t>());
        opt_dec_.set_step_count(train.at("adam_t_dec").get<std::int64_t>());
    }

    static CodeGeometry meta_geometry(const nlohmann::json& meta) {
        const auto& c = meta.at("code");
        return CodeGeometry{c.at("k1").get<std::size_t>(), c.at("k2").get<std::size_t>(),
                            c.at("n1").get<std::size_t>(), c.at("n2").get<std::size_t>()};
    }

    static ModelHyper meta_hyper(const nlohmann::json& meta) {
        const auto& m = meta.at("model");
        ModelHyper h;
        h.iterations = m.at("iterations").get<std::size_t>();
        h.feature_size = m.at("feature_size").get<std::size_t>();
        h.enc_hidden_layers = m.at("enc_hidden_layers").get<std::size_t>();
        h.enc_hidden_width = m.at("enc_hidden_width").get<std::size_t>();
        h.dec_hidden_layers = m.at("dec_hidden_layers").get<std::size_t>();
        h.dec_hidden_width = m.at("dec_hidden_width").get<std::size_t>();
        h.dec_last_pair_hidden_layers = m.at("dec_last_pair_hidden_layers").get<std::size_t>();
        return h;
    }

    // Builds a model from a checkpoint; optimizer state is ignored.
    static ProductAe<T> load_model(const std::string& path) {
        const auto file = ckpt::read_checkpoint_file(path);
        if (file.meta.at("dtype").get<std::string>() != ckpt::dtype_name<T>())
            throw CheckpointError("checkpoint: dtype is " +
                                  file.meta.at("dtype").get<std::string>() + ", expected " +
                                  ckpt::dtype_name<T>());
        ProductAe<T> model(meta_geometry(file.meta), meta_hyper(file.meta));
        auto phi = model.encoder_params();
        auto theta = model.decoder_params();
        load_params(file, "phi", phi);
        load_params(file, "theta", theta);
        return model;
    }

private:
    using Clock = std::chrono::steady_clock;

    double decoder_step_batched(std::size_t batch) {
        const std::size_t micro = cfg_.micro_size();
        const std::size_t l = batch / micro;
        opt_dec_.zero_grad();
        double mean_loss = 0.0;
        for (std::size_t m = 0; m < l; ++m) {
            auto u = random_message_tensor<T>(micro, model_->geometry, rng_);
            Tensor<T> code;
            {
                NoGradGuard ng;  // encoder frozen: keep it off the tape
                code = model_->encode(u);
            }
            const auto snrs = decoder_snr_draws_db(cfg_, micro, rng_);
            std::vector<double> sigma2(micro);
            for (std::size_t i = 0; i < micro; ++i)
                sigma2[i] = channel::noise_sigma2_from_snr_db(snrs[i]);
            auto y = channel::add_noise_per_row(code, sigma2, rng_);
            auto loss = bce_with_logits(model_->decode(y), u);
            scalar_mul(loss, T(1) / static_cast<T>(l)).backward();
            mean_loss += loss.value() / static_cast<double>(l);
        }
        opt_dec_.step();
        return mean_loss;
    }

    double encoder_step_batched(std::size_t batch) {
        const std::size_t micro = cfg_.micro_size();
        const std::size_t l = batch / micro;
        const double sigma2 = channel::noise_sigma2_from_snr_db(encoder_snr_db(cfg_));
        opt_enc_.zero_grad();
        double mean_loss = 0.0;
        {
            detail::RequiresGradOff<T> freeze(theta_);  // skip decoder weight grads
            for (std::size_t m = 0; m < l; ++m) {
                auto u = random_message_tensor<T>(micro, model_->geometry, rng_);
                auto y = channel::add_noise(model_->encode(u), sigma2, rng_);
                auto loss = bce_with_logits(model_->decode(y), u);
                scalar_mul(loss, T(1) / static_cast<T>(l)).backward();
                mean_loss += loss.value() / static_cast<double>(l);
            }
        }
        opt_enc_.step();
        return mean_loss;
    }

    EpochStats run_epoch_batched(std::size_t batch) {
        EpochStats stats;
        auto t0 = Clock::now();
        for (std::size_t s = 0; s < cfg_.t_dec; ++s) stats.mean_dec_loss += decoder_step_batched(batch);
        stats.dec_wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        if (cfg_.t_dec > 0) stats.mean_dec_loss /= static_cast<double>(cfg_.t_dec);
        stats.dec_steps = cfg_.t_dec;

        t0 = Clock::now();
        for (std::size_t s = 0; s < cfg_.t_enc; ++s) stats.mean_enc_loss += encoder_step_batched(batch);
        stats.enc_wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        if (cfg_.t_enc > 0) stats.mean_enc_loss /= static_cast<double>(cfg_.t_enc);
        stats.enc_steps = cfg_.t_enc;

        stats.epoch = ++epoch_;
        return stats;
    }

    void run_logged_epoch(std::size_t batch) {
        const auto stats = run_epoch_batched(batch);
        if (log_) {
            (*log_) << stats.epoch << ",dec," << stats.mean_dec_loss << ',' << stats.dec_wall_ms
                    << '\n'
                    << stats.epoch << ",enc," << stats.mean_enc_loss << ',' << stats.enc_wall_ms
                    << '\n';
            log_->flush();
        }
        if (cfg_.t_dec > 0 && stats.mean_dec_loss < best_dec_loss_) {
            best_dec_loss_ = stats.mean_dec_loss;
            if (!ckpt_dir_.empty()) {
                best_path_ = ckpt_dir_ + "/best.pae";
                save_checkpoint(best_path_);
            }
        }
    }

    void write_log_header() {
        if (log_) (*log_) << "epoch,kind,mean_loss,wall_ms\n";
    }

    static void append_params(ckpt::CheckpointFile& file, const std::string& prefix,
                              const std::vector<Tensor<T>>& params) {
        for (std::size_t i = 0; i < params.size(); ++i)
            file.arrays.push_back(ckpt::make_array(prefix + "/" + std::to_string(i),
                                                   params[i].shape(), params[i].data()));
    }

    static void load_params(const ckpt::CheckpointFile& file, const std::string& prefix,
                            std::vector<Tensor<T>>& params) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            const auto& rec = file.array(prefix + "/" + std::to_string(i));
            if (rec.shape != params[i].shape())
                throw CheckpointError("checkpoint: array '" + rec.name + "' has shape " +
                                      shape_str(rec.shape) + ", expected " +
                                      shape_str(params[i].shape()));
            params[i].data() = ckpt::array_values<T>(rec);
        }
    }

    static void append_moments(ckpt::CheckpointFile& file, const std::string& prefix,
                               const Adam<T>& opt) {
        for (std::size_t i = 0; i < opt.moment1().size(); ++i) {
            file.arrays.push_back(ckpt::make_array(prefix + "/m/" + std::to_string(i),
                                                   {opt.moment1()[i].size()}, opt.moment1()[i]));
            file.arrays.push_back(ckpt::make_array(prefix + "/v/" + std::to_string(i),
                                                   {opt.moment2()[i].size()}, opt.moment2()[i]));
        }
    }

    static void load_moments(const ckpt::CheckpointFile& file, const std::string& prefix,
                             Adam<T>& opt) {
        for (std::size_t i = 0; i < opt.moment1().size(); ++i) {
            opt.moment1()[i] = ckpt::array_values<T>(file.array(prefix + "/m/" + std::to_string(i)));
            opt.moment2()[i] = ckpt::array_values<T>(file.array(prefix + "/v/" + std::to_string(i)));
        }
    }

    void check_compatible(const nlohmann::json& meta) const {
        if (meta.at("dtype").get<std::string>() != ckpt::dtype_name<T>())
            throw CheckpointError("checkpoint: dtype is " +
                                  meta.at("dtype").get<std::string>() + ", expected " +
                                  ckpt::dtype_name<T>());
        if (!(meta_geometry(meta) == model_->geometry) || !(meta_hyper(meta) == model_->hyper))
            throw CheckpointError("checkpoint: geometry or hyperparameters do not match the model");
    }

    ProductAe<T>* model_;
    TrainingConfig cfg_;
    std::vector<Tensor<T>> phi_, theta_;
    Adam<T> opt_enc_, opt_dec_;
    Rng rng_;
    std::size_t epoch_ = 0;
    double best_dec_loss_ = std::numeric_limits<double>::infinity();
    std::string ckpt_dir_;
    std::string best_path_;
    std::ostream* log_ = nullptr;
};

}  // namespace pae
