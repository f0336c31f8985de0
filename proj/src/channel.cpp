#include "pae/channel.hpp"

#include <cmath>
#include <string>

#include "pae/errors.hpp"

namespace pae::channel {

double noise_sigma2_from_snr_db(double snr_db) {
    return std::pow(10.0, -snr_db / 10.0);
}

double ebn0_db_from_snr_db(double snr_db, double rate) {
    if (!(rate > 0.0) || rate > 1.0)
        throw ConfigError("ebn0: rate must be in (0, 1], got " + std::to_string(rate));
    return snr_db + 10.0 * std::log10(1.0 / rate);
}

double snr_db_from_ebn0_db(double ebn0_db, double rate) {
    if (!(rate > 0.0) || rate > 1.0)
        throw ConfigError("ebn0: rate must be in (0, 1], got " + std::to_string(rate));
    return ebn0_db - 10.0 * std::log10(1.0 / rate);
}

double q_function(double x) {
    return 0.5 * std::erfc(x / std::sqrt(2.0));
}

ChannelParams ChannelParams::from_snr_db(double snr_db, double rate, std::uint64_t seed) {
    ChannelParams p;
    p.snr_db = snr_db;
    p.sigma2 = noise_sigma2_from_snr_db(snr_db);
    p.rate = rate;
    p.seed = seed;
    return p;
}

}  // namespace pae::channel
