#include "sac/fec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "sac/common.hpp"

namespace sac {
namespace {

constexpr double kKnownLlr = 1e12;
constexpr double kKnownMean = 1e9;

std::uint32_t crc_polynomial(std::size_t length) {
    switch (length) {
        case 6: return 0x21;       // D^6 + D^5 + 1
        case 11: return 0x621;     // D^11 + D^10 + D^9 + D^5 + 1
        case 16: return 0x1021;    // D^16 + D^12 + D^5 + 1
        case 24: return 0xB2B117;  // CRC24C
        default: throw std::invalid_argument("unsupported CRC length");
    }
}

// Chung's approximation to 1 - E[tanh(L/2)] for L ~ N(m, 2m).
double phi(double m) {
    if (m <= 0.0) return 1.0;
    if (m < 10.0) return std::exp(-0.4527 * std::pow(m, 0.86) + 0.0218);
    return std::sqrt(std::numbers::pi / m) * std::exp(-m / 4.0) * (1.0 - 10.0 / (7.0 * m));
}

double phi_inverse(double y) {
    if (y >= 1.0) return 0.0;
    if (y <= 0.0) return kKnownMean;
    double lo = 0.0;
    double hi = 1.0;
    while (phi(hi) > y) {
        hi *= 2.0;
        if (hi > kKnownMean) return kKnownMean;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (phi(mid) > y ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double check_node_mean(double a, double b) {
    const double pa = phi(a);
    const double pb = phi(b);
    return phi_inverse(pa + pb - pa * pb);
}

// Exact check-node update 2*atanh(tanh(a/2)*tanh(b/2)). Large inputs use
// sign*min plus the two Jacobian corrections; small ones the tanh product,
// which avoids cancellation. The magnitude is floored at the smallest normal
// double so the sign survives underflow.
inline double f_update(double a, double b) {
    const bool negative = (a < 0.0) != (b < 0.0);
    const double abs_a = std::abs(a);
    const double abs_b = std::abs(b);
    const double mag = std::min(abs_a, abs_b);
    double out;
    if (mag >= 1.0) {
        out = mag + std::log1p(std::exp(-(abs_a + abs_b))) - std::log1p(std::exp(-std::abs(abs_a - abs_b)));
    } else {
        out = 2.0 * std::atanh(std::tanh(0.5 * abs_a) * std::tanh(0.5 * abs_b));
    }
    out = std::max(out, std::numeric_limits<double>::min());
    return negative ? -out : out;
}

void polar_transform(std::vector<std::uint8_t>& x) {
    const std::size_t n = x.size();
    for (std::size_t half = 1; half < n; half <<= 1) {
        for (std::size_t block = 0; block < n; block += 2 * half) {
            for (std::size_t j = block; j < block + half; ++j) x[j] ^= x[j + half];
        }
    }
}

// Per-path decoder state. Depth d of the decoding tree holds N >> d LLRs
// (alpha) and partial sums (beta) in one flat buffer each.
struct Path {
    std::vector<double> alpha;
    std::vector<std::uint8_t> beta;
    std::vector<std::uint8_t> u;
    double metric = 0.0;
};

class ListDecoder {
public:
    ListDecoder(std::size_t length, std::size_t stages) : n_(length), stages_(stages) {
        offset_.resize(stages + 1);
        std::size_t off = 0;
        for (std::size_t d = 0; d <= stages; ++d) {
            offset_[d] = off;
            off += length >> d;
        }
        buffer_size_ = off;
    }

    Path make_root(std::span<const double> channel) const {
        Path p;
        p.alpha.assign(buffer_size_, 0.0);
        p.beta.assign(buffer_size_, 0);
        p.u.assign(n_, 0);
        std::copy(channel.begin(), channel.end(), p.alpha.begin());
        return p;
    }

    double leaf_llr(Path& p, std::size_t i) const {
        std::size_t start = 0;
        if (i > 0) {
            const std::size_t parent = stages_ - 1 - static_cast<std::size_t>(std::countr_zero(i));
            const std::size_t half = (n_ >> parent) / 2;
            const double* a = p.alpha.data() + offset_[parent];
            const std::uint8_t* left = p.beta.data() + offset_[parent];
            double* out = p.alpha.data() + offset_[parent + 1];
            for (std::size_t j = 0; j < half; ++j) out[j] = a[j + half] + (left[j] ? -a[j] : a[j]);
            start = parent + 1;
        }
        for (std::size_t d = start; d < stages_; ++d) {
            const std::size_t half = (n_ >> d) / 2;
            const double* a = p.alpha.data() + offset_[d];
            double* out = p.alpha.data() + offset_[d + 1];
            for (std::size_t j = 0; j < half; ++j) out[j] = f_update(a[j], a[j + half]);
        }
        return p.alpha[offset_[stages_]];
    }

    void set_bit(Path& p, std::size_t i, std::uint8_t bit) const {
        p.u[i] = bit;
        p.beta[offset_[stages_]] = bit;
        std::size_t node = i;
        for (std::size_t d = stages_; d > 0; --d, node >>= 1) {
            const std::size_t h = n_ >> d;
            std::uint8_t* parent = p.beta.data() + offset_[d - 1];
            const std::uint8_t* child = p.beta.data() + offset_[d];
            if ((node & 1U) == 0) {
                std::copy(child, child + h, parent);
                return;
            }
            for (std::size_t j = 0; j < h; ++j) {
                parent[j] ^= child[j];
                parent[h + j] = child[j];
            }
        }
    }

private:
    std::size_t n_;
    std::size_t stages_;
    std::vector<std::size_t> offset_;
    std::size_t buffer_size_ = 0;
};

struct Candidate {
    double metric;
    std::size_t path;
    std::uint8_t bit;
};

}  // namespace

PolarConfig PolarConfig::for_block(std::size_t coded_bits, double rate) {
    PolarConfig cfg;
    cfg.rate_matched_length = coded_bits;
    cfg.info_bits = static_cast<std::size_t>(std::lround(rate * static_cast<double>(coded_bits)));
    cfg.mother_length = std::bit_ceil(coded_bits);
    return cfg;
}

void PolarConfig::validate() const {
    if (!std::has_single_bit(mother_length) || mother_length < 2)
        throw std::invalid_argument("polar: mother length must be a power of two");
    if (rate_matched_length > mother_length || rate_matched_length == 0)
        throw std::invalid_argument("polar: rate-matched length must be in (0, N]");
    if (info_bits == 0) throw std::invalid_argument("polar: need at least one info bit");
    if (info_bits + crc_bits > rate_matched_length)
        throw std::invalid_argument("polar: info + CRC bits exceed the rate-matched length");
    if (list_size == 0) throw std::invalid_argument("polar: list size must be >= 1");
    if (construction == PolarConstruction::nr_sequence && mother_length > 1024)
        throw std::invalid_argument("polar: the reliability sequence covers N <= 1024");
    if (crc_bits != 0) crc_polynomial(crc_bits);
}

std::vector<std::uint8_t> crc_remainder(std::span<const std::uint8_t> bits, std::size_t length) {
    const std::uint32_t poly = crc_polynomial(length);
    const std::uint32_t top = 1U << (length - 1);
    const std::uint32_t mask = (length == 32) ? 0xFFFFFFFFU : ((1U << length) - 1U);
    std::uint32_t reg = 0;
    for (auto b : bits) {
        const bool feedback = ((reg & top) != 0) != (b != 0);
        reg = (reg << 1) & mask;
        if (feedback) reg ^= poly;
    }
    std::vector<std::uint8_t> out(length);
    for (std::size_t i = 0; i < length; ++i) out[i] = (reg >> (length - 1 - i)) & 1U;
    return out;
}

std::vector<double> gaussian_approximation(std::size_t mother_length, double channel_mean,
                                           std::span<const std::uint8_t> known) {
    std::vector<double> level(mother_length, channel_mean);
    for (std::size_t i = 0; i < known.size() && i < mother_length; ++i)
        if (known[i]) level[i] = kKnownMean;

    // Walk the decoding tree: each node of size s splits into a check-node
    // (left) and variable-node (right) child of size s/2.
    std::vector<double> leaves(mother_length);
    auto recurse = [&](auto&& self, std::vector<double> means, std::size_t first) -> void {
        const std::size_t s = means.size();
        if (s == 1) {
            leaves[first] = means[0];
            return;
        }
        const std::size_t h = s / 2;
        std::vector<double> left(h), right(h);
        for (std::size_t j = 0; j < h; ++j) {
            left[j] = check_node_mean(means[j], means[j + h]);
            right[j] = std::min(means[j] + means[j + h], kKnownMean);
        }
        self(self, std::move(left), first);
        self(self, std::move(right), first + h);
    };
    recurse(recurse, std::move(level), 0);
    return leaves;
}

PolarCode::PolarCode(PolarConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    const std::size_t n = cfg_.mother_length;
    stages_ = static_cast<std::size_t>(std::countr_zero(n));

    // Shortened tail: those codeword bits are known zeros, which requires the
    // matching leaves (indices >= E) to be frozen.
    const std::size_t carried = cfg_.info_bits + cfg_.crc_bits;
    std::vector<std::size_t> order;  // most reliable first, shortened leaves excluded
    if (cfg_.construction == PolarConstruction::nr_sequence) {
        const auto& q = nr_reliability_sequence();
        for (auto it = q.rbegin(); it != q.rend(); ++it)
            if (*it < cfg_.rate_matched_length) order.push_back(*it);
    } else {
        std::vector<std::uint8_t> shortened(n, 0);
        for (std::size_t i = cfg_.rate_matched_length; i < n; ++i) shortened[i] = 1;
        const auto reliability =
            gaussian_approximation(n, 2.0 * db_to_linear(cfg_.design_snr_db), shortened);
        order.resize(cfg_.rate_matched_length);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return reliability[a] > reliability[b];
        });
    }
    info_positions_.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(carried));
    std::sort(info_positions_.begin(), info_positions_.end());
    frozen_.assign(n, 1);
    for (auto i : info_positions_) frozen_[i] = 0;
}

std::vector<std::uint8_t> PolarCode::encode(std::span<const std::uint8_t> info_bits) const {
    if (info_bits.size() != cfg_.info_bits)
        throw std::invalid_argument("polar_encode: wrong number of info bits");
    std::vector<std::uint8_t> u(cfg_.mother_length, 0);
    std::size_t k = 0;
    for (; k < cfg_.info_bits; ++k) u[info_positions_[k]] = info_bits[k] & 1U;
    if (cfg_.crc_bits > 0) {
        const auto crc = crc_remainder(info_bits, cfg_.crc_bits);
        for (std::size_t c = 0; c < crc.size(); ++c) u[info_positions_[k + c]] = crc[c];
    }
    polar_transform(u);
    u.resize(cfg_.rate_matched_length);
    return u;
}

DecodeResult PolarCode::decode(std::span<const double> llrs) const {
    if (llrs.size() != cfg_.rate_matched_length)
        throw std::invalid_argument("polar_decode: wrong number of LLRs");
    for (double v : llrs)
        if (!std::isfinite(v)) throw std::invalid_argument("polar_decode: non-finite LLR");

    const std::size_t n = cfg_.mother_length;
    std::vector<double> channel(n, kKnownLlr);
    std::copy(llrs.begin(), llrs.end(), channel.begin());

    const ListDecoder tree(n, stages_);
    std::vector<Path> paths;
    paths.reserve(cfg_.list_size);
    paths.push_back(tree.make_root(channel));

    std::vector<Candidate> candidates;
    std::vector<double> leaf(cfg_.list_size);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < paths.size(); ++p) leaf[p] = tree.leaf_llr(paths[p], i);

        if (frozen_[i]) {
            for (std::size_t p = 0; p < paths.size(); ++p) {
                if (leaf[p] < 0.0) paths[p].metric += -leaf[p];
                tree.set_bit(paths[p], i, 0);
            }
            continue;
        }

        candidates.clear();
        for (std::size_t p = 0; p < paths.size(); ++p) {
            const double mag = std::abs(leaf[p]);
            const std::uint8_t hard = leaf[p] < 0.0 ? 1 : 0;
            candidates.push_back({paths[p].metric, p, hard});
            candidates.push_back({paths[p].metric + mag, p, static_cast<std::uint8_t>(hard ^ 1U)});
        }
        const std::size_t keep = std::min(cfg_.list_size, candidates.size());
        std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                          candidates.end(), [](const Candidate& a, const Candidate& b) {
                              return a.metric < b.metric;
                          });
        candidates.resize(keep);

        // A path survives with zero, one or both extensions; clone only when
        // both are kept.
        std::vector<int> uses(paths.size(), 0);
        for (const auto& c : candidates) ++uses[c.path];
        std::vector<Path> next;
        next.reserve(keep);
        for (const auto& c : candidates) {
            Path child = (--uses[c.path] == 0) ? std::move(paths[c.path]) : paths[c.path];
            child.metric = c.metric;
            tree.set_bit(child, i, c.bit);
            next.push_back(std::move(child));
        }
        paths = std::move(next);
    }

    std::sort(paths.begin(), paths.end(),
              [](const Path& a, const Path& b) { return a.metric < b.metric; });

    auto extract = [&](const Path& p) {
        std::vector<std::uint8_t> carried(info_positions_.size());
        for (std::size_t k = 0; k < carried.size(); ++k) carried[k] = p.u[info_positions_[k]];
        return carried;
    };

    DecodeResult result;
    for (const auto& p : paths) {
        auto carried = extract(p);
        std::span<const std::uint8_t> info(carried.data(), cfg_.info_bits);
        const bool ok =
            cfg_.crc_bits == 0 ||
            std::equal(carried.begin() + static_cast<std::ptrdiff_t>(cfg_.info_bits), carried.end(),
                       crc_remainder(info, cfg_.crc_bits).begin());
        if (ok) {
            result.info_bits.assign(info.begin(), info.end());
            result.crc_ok = true;
            return result;
        }
    }
    auto best = extract(paths.front());
    result.info_bits.assign(best.begin(), best.begin() + static_cast<std::ptrdiff_t>(cfg_.info_bits));
    result.crc_ok = false;
    return result;
}

}  // namespace sac
