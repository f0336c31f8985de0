#include "pae/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pae/errors.hpp"

namespace pae::cfg {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void fail(const std::string& origin, std::size_t line, const std::string& msg) {
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
}

struct Parser {
    RunConfig cfg;
    std::string origin;
    std::string section;
    std::size_t line_no = 0;

    std::uint64_t parse_uint(const std::string& value) {
        try {
            std::size_t pos = 0;
            const auto v = std::stoull(value, &pos);
            if (pos != value.size()) throw std::invalid_argument(value);
            return v;
        } catch (const std::exception&) {
            fail(origin, line_no, "expected a non-negative integer, got '" + value + "'");
        }
    }

    double parse_double(const std::string& value) {
        try {
            std::size_t pos = 0;
            const auto v = std::stod(value, &pos);
            if (pos != value.size()) throw std::invalid_argument(value);
            return v;
        } catch (const std::exception&) {
            fail(origin, line_no, "expected a number, got '" + value + "'");
        }
    }

    void apply(const std::string& key, const std::string& value) {
        if (section.empty()) {
            if (key == "version") {
                cfg.version = static_cast<int>(parse_uint(value));
                if (cfg.version != 1)
                    fail(origin, line_no, "unsupported config version " + value);
                return;
            }
            fail(origin, line_no, "key '" + key + "' outside any section");
        }
        if (section == "code") {
            if (key == "k1") cfg.code.k1 = parse_uint(value);
            else if (key == "k2") cfg.code.k2 = parse_uint(value);
            else if (key == "n1") cfg.code.n1 = parse_uint(value);
            else if (key == "n2") cfg.code.n2 = parse_uint(value);
            else fail(origin, line_no, "unknown key '" + key + "' in section [code]");
        } else if (section == "model") {
            if (key == "iterations") cfg.model.iterations = parse_uint(value);
            else if (key == "feature_size") cfg.model.feature_size = parse_uint(value);
            else if (key == "enc_hidden_layers") cfg.model.enc_hidden_layers = parse_uint(value);
            else if (key == "enc_hidden_width") cfg.model.enc_hidden_width = parse_uint(value);
            else if (key == "dec_hidden_layers") cfg.model.dec_hidden_layers = parse_uint(value);
            else if (key == "dec_hidden_width") cfg.model.dec_hidden_width = parse_uint(value);
            else if (key == "dec_last_pair_hidden_layers")
                cfg.model.dec_last_pair_hidden_layers = parse_uint(value);
            else fail(origin, line_no, "unknown key '" + key + "' in section [model]");
        } else if (section == "train") {
            if (key == "batch_size") cfg.train.batch_size = parse_uint(value);
            else if (key == "micro_batch_size") cfg.train.micro_batch_size = parse_uint(value);
            else if (key == "t_enc") cfg.train.t_enc = parse_uint(value);
            else if (key == "t_dec") cfg.train.t_dec = parse_uint(value);
            else if (key == "lr_enc") cfg.train.lr_enc = parse_double(value);
            else if (key == "lr_dec") cfg.train.lr_dec = parse_double(value);
            else if (key == "gamma_db") cfg.train.gamma_db = parse_double(value);
            else if (key == "dec_snr_low_offset") cfg.train.dec_snr_low_offset = parse_double(value);
            else if (key == "dec_snr_high_offset")
                cfg.train.dec_snr_high_offset = parse_double(value);
            else if (key == "epochs") cfg.train.epochs = parse_uint(value);
            else if (key == "finetune_batch_size")
                cfg.train.finetune_batch_size = parse_uint(value);
            else if (key == "finetune_epochs") cfg.train.finetune_epochs = parse_uint(value);
            else if (key == "seed") cfg.train.seed = parse_uint(value);
            else if (key == "precision") {
                if (value == "f64") cfg.precision = Precision::f64;
                else if (value == "f32") cfg.precision = Precision::f32;
                else fail(origin, line_no, "precision must be f64 or f32, got '" + value + "'");
            } else fail(origin, line_no, "unknown key '" + key + "' in section [train]");
        } else if (section == "eval") {
            if (key == "snr_db") {
                try {
                    cfg.eval.snr_db = parse_snr_spec(value);
                } catch (const ConfigError& e) {
                    fail(origin, line_no, e.what());
                }
            } else if (key == "min_block_errors")
                cfg.eval.min_block_errors = parse_uint(value);
            else if (key == "max_blocks") cfg.eval.max_blocks = parse_uint(value);
            else if (key == "workers") cfg.eval.workers = parse_uint(value);
            else fail(origin, line_no, "unknown key '" + key + "' in section [eval]");
        } else if (section == "paths") {
            if (key == "checkpoint_dir") cfg.paths.checkpoint_dir = value;
            else if (key == "results_csv") cfg.paths.results_csv = value;
            else if (key == "log_csv") cfg.paths.log_csv = value;
            else fail(origin, line_no, "unknown key '" + key + "' in section [paths]");
        } else {
            fail(origin, line_no, "unknown section [" + section + "]");
        }
    }
};

}  // namespace

void RunConfig::validate() const {
    code.validate();
    model.validate();
    train.validate();
    if (eval.workers == 0) throw ConfigError("eval: workers must be positive");
}

std::vector<double> parse_snr_spec(const std::string& spec) {
    const std::string s = trim(spec);
    if (s.empty()) throw ConfigError("snr spec: empty value");
    std::vector<double> out;
    if (s.find(':') != std::string::npos) {
        double a, b, step;
        char extra;
        if (std::sscanf(s.c_str(), "%lf:%lf:%lf%c", &a, &b, &step, &extra) != 3)
            throw ConfigError("snr spec: expected a:b:step, got '" + s + "'");
        if (step <= 0.0) throw ConfigError("snr spec: step must be positive");
        if (b < a) throw ConfigError("snr spec: range end precedes start");
        for (double v = a; v <= b + 1e-9; v += step) out.push_back(v);
        return out;
    }
    std::istringstream in(s);
    std::string field;
    while (std::getline(in, field, ',')) {
        field = trim(field);
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(field, &pos));
            if (pos != field.size()) throw std::invalid_argument(field);
        } catch (const std::exception&) {
            throw ConfigError("snr spec: bad number '" + field + "'");
        }
    }
    if (out.empty()) throw ConfigError("snr spec: no points in '" + s + "'");
    return out;
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
    Parser p;
    p.origin = origin;
    std::istringstream in(text);
    std::string raw;
    while (std::getline(in, raw)) {
        ++p.line_no;
        std::string line = raw;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                fail(origin, p.line_no, "unterminated section header '" + line + "'");
            p.section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            fail(origin, p.line_no, "expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail(origin, p.line_no, "missing key before '='");
        p.apply(key, value);
    }
    p.cfg.validate();
    return p.cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

std::string format_double(double v) {
    for (int prec = 1; prec <= 17; ++prec) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::stod(buf) == v) return buf;
    }
    return std::to_string(v);
}

std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream os;
    os << "version = " << cfg.version << "\n\n";
    os << "[code]\n";
    os << "k1 = " << cfg.code.k1 << "\n";
    os << "k2 = " << cfg.code.k2 << "\n";
    os << "n1 = " << cfg.code.n1 << "\n";
    os << "n2 = " << cfg.code.n2 << "\n\n";
    os << "[model]\n";
    os << "iterations = " << cfg.model.iterations << "\n";
    os << "feature_size = " << cfg.model.feature_size << "\n";
    os << "enc_hidden_layers = " << cfg.model.enc_hidden_layers << "\n";
    os << "enc_hidden_width = " << cfg.model.enc_hidden_width << "\n";
    os << "dec_hidden_layers = " << cfg.model.dec_hidden_layers << "\n";
    os << "dec_hidden_width = " << cfg.model.dec_hidden_width << "\n";
    os << "dec_last_pair_hidden_layers = " << cfg.model.dec_last_pair_hidden_layers << "\n\n";
    os << "[train]\n";
    os << "batch_size = " << cfg.train.batch_size << "\n";
    os << "micro_batch_size = " << cfg.train.micro_size() << "\n";
    os << "t_enc = " << cfg.train.t_enc << "\n";
    os << "t_dec = " << cfg.train.t_dec << "\n";
    os << "lr_enc = " << format_double(cfg.train.lr_enc) << "\n";
    os << "lr_dec = " << format_double(cfg.train.lr_dec) << "\n";
    os << "gamma_db = " << format_double(cfg.train.gamma_db) << "\n";
    os << "dec_snr_low_offset = " << format_double(cfg.train.dec_snr_low_offset) << "\n";
    os << "dec_snr_high_offset = " << format_double(cfg.train.dec_snr_high_offset) << "\n";
    os << "epochs = " << cfg.train.epochs << "\n";
    os << "finetune_batch_size = " << cfg.train.finetune_batch_size << "\n";
    os << "finetune_epochs = " << cfg.train.finetune_epochs << "\n";
    os << "seed = " << cfg.train.seed << "\n";
    os << "precision = " << (cfg.precision == Precision::f64 ? "f64" : "f32") << "\n\n";
    os << "[eval]\n";
    if (!cfg.eval.snr_db.empty()) {
        os << "snr_db = ";
        for (std::size_t i = 0; i < cfg.eval.snr_db.size(); ++i) {
            if (i) os << ',';
            os << format_double(cfg.eval.snr_db[i]);
        }
        os << "\n";
    }
    os << "min_block_errors = " << cfg.eval.min_block_errors << "\n";
    os << "max_blocks = " << cfg.eval.max_blocks << "\n";
    os << "workers = " << cfg.eval.workers << "\n\n";
    os << "[paths]\n";
    os << "checkpoint_dir = " << cfg.paths.checkpoint_dir << "\n";
    os << "results_csv = " << cfg.paths.results_csv << "\n";
    os << "log_csv = " << cfg.paths.log_csv << "\n";
    return os.str();
}

}  // namespace pae::cfg
