#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include <boost/multiprecision/cpp_int.hpp>

#include "distress/harness.hpp"

namespace distress {

namespace {

constexpr std::uint64_t kChunk = 4096;

// Runs body(chunk_prg, first, count) over fixed-size chunks of [0, trials),
// each chunk on its own derived stream; per-chunk results land in `out`.
template <typename Result, typename Body>
std::vector<Result> run_chunks(const Prg& base, std::string_view label, std::uint64_t trials, unsigned threads,
                               Body body) {
    const std::uint64_t chunks = (trials + kChunk - 1) / kChunk;
    std::vector<Result> out(chunks);
    std::atomic<std::uint64_t> next{0};
    const auto worker = [&] {
        for (std::uint64_t c = next++; c < chunks; c = next++) {
            Prg prg = base.derive(label, c);
            const std::uint64_t first = c * kChunk;
            out[c] = body(prg, first, std::min(kChunk, trials - first));
        }
    };
    threads = std::max(1u, threads);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return out;
}

DistressPayload game_payload(const BitLayout& l) { return {{low_mask(l.m_i) / 3, l.m_i}, {low_mask(l.m_t) / 5, l.m_t}}; }

}  // namespace

GameTranscript run_challenger(const NonceCodec& codec, const Point& pk, std::size_t n, bool b,
                              const DistressPayload& payload, Prg& prg, std::vector<Bytes> x_list) {
    if (n == 0) throw Error(ErrorCode::ContractViolation, "n must be at least 1");
    GameTranscript t;
    t.n = n;
    t.b = b;
    t.x_list = std::move(x_list);
    t.x_list.resize(n);
    if (b) t.j = static_cast<std::size_t>(prg.below(n));
    t.nonces.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        t.nonces.push_back(t.j == i ? codec.encode(payload, pk, prg) : prg_nonce(prg));
    }
    return t;
}

bool ec_structure(const Meceg& scheme, const NonceWire& wire) { return scheme.has_ciphertext_structure(wire); }

bool appendix_b_adversary(const Meceg& scheme, const GameTranscript& t, Prg& coin) {
    const bool any = std::any_of(t.nonces.begin(), t.nonces.end(),
                                 [&](const NonceWire& w) { return ec_structure(scheme, w); });
    return any ? coin.coin() : false;
}

AdvantageEstimate estimate_advantage(const Profile& profile, std::size_t n, std::uint64_t trials, std::uint64_t seed,
                                     unsigned threads) {
    if (trials < 1000) throw Error(ErrorCode::ContractViolation, "at least 1000 trials");
    if (n == 0) throw Error(ErrorCode::ContractViolation, "n must be at least 1");
    const Prg base(seed);
    Prg key_prg = base.derive("game-key", 0);
    const NonceCodec codec = profile.codec();
    const Meceg& scheme = codec.scheme();
    const McegKeyPair key = scheme.keygen(key_prg);
    const DistressPayload payload = game_payload(profile.layout);

    struct Counts {
        std::uint64_t t[2] = {0, 0};
        std::uint64_t ones[2] = {0, 0};
    };
    // even trial index: b = 0, odd: b = 1
    const auto chunks = run_chunks<Counts>(base, "game-n" + std::to_string(n), trials, threads,
                                           [&](Prg& prg, std::uint64_t first, std::uint64_t count) {
                                               Counts c;
                                               for (std::uint64_t i = first; i < first + count; ++i) {
                                                   const int b = static_cast<int>(i & 1);
                                                   const auto t = run_challenger(codec, key.pk, n, b == 1, payload, prg);
                                                   ++c.t[b];
                                                   c.ones[b] += appendix_b_adversary(scheme, t, prg) ? 1 : 0;
                                               }
                                               return c;
                                           });
    Counts total;
    for (const auto& c : chunks) {
        for (int b = 0; b < 2; ++b) {
            total.t[b] += c.t[b];
            total.ones[b] += c.ones[b];
        }
    }
    AdvantageEstimate e;
    e.n = n;
    e.trials = trials;
    e.p_hat_b0 = static_cast<double>(total.ones[0]) / static_cast<double>(total.t[0]);
    e.p_hat_b1 = static_cast<double>(total.ones[1]) / static_cast<double>(total.t[1]);
    e.advantage = std::abs(e.p_hat_b1 - e.p_hat_b0);
    e.std_err = std::sqrt(e.p_hat_b0 * (1 - e.p_hat_b0) / static_cast<double>(total.t[0]) +
                          e.p_hat_b1 * (1 - e.p_hat_b1) / static_cast<double>(total.t[1]));
    return e;
}

double analytic_advantage(std::size_t n) {
    using boost::multiprecision::cpp_int;
    using boost::multiprecision::cpp_rational;
    if (n == 0) throw Error(ErrorCode::ContractViolation, "n must be at least 1");
    cpp_rational sum = 0;
    cpp_int binom = 1;
    cpp_int four = 1;
    for (std::size_t i = 1; i <= n; ++i) {
        binom = binom * (n - i + 1) / i;
        four *= 4;
        const cpp_rational term(binom, four);
        if (i % 2 == 1) {
            sum += term;
        } else {
            sum -= term;
        }
    }
    cpp_rational adv = cpp_rational(1, 2) - sum / 2;
    if (adv < 0) adv = -adv;
    return adv.convert_to<double>();
}

double closed_form_advantage(std::size_t n) { return std::pow(0.75, static_cast<double>(n)) / 2; }

RateEstimate make_rate(std::uint64_t hits, std::uint64_t trials, double z) {
    RateEstimate r;
    r.trials = trials;
    r.hits = hits;
    if (trials == 0) return r;
    const double nt = static_cast<double>(trials);
    const double p = static_cast<double>(hits) / nt;
    r.rate = p;
    r.std_err = std::sqrt(p * (1 - p) / nt);
    const double z2 = z * z;
    const double centre = (p + z2 / (2 * nt)) / (1 + z2 / nt);
    const double half = z / (1 + z2 / nt) * std::sqrt(p * (1 - p) / nt + z2 / (4 * nt * nt));
    r.wilson_lo = std::max(0.0, centre - half);
    r.wilson_hi = std::min(1.0, centre + half);
    return r;
}

RateEstimate measure_false_positive_rate(const Profile& profile, std::uint64_t trials, std::uint64_t seed,
                                         unsigned threads) {
    const Prg base(seed);
    Prg key_prg = base.derive("fp-key", 0);
    const NonceCodec codec = profile.codec();
    const McegKeyPair key = codec.scheme().keygen(key_prg);
    const auto chunks = run_chunks<std::uint64_t>(base, "fp", trials, threads,
                                                  [&](Prg& prg, std::uint64_t, std::uint64_t count) {
                                                      std::uint64_t hits = 0;
                                                      for (std::uint64_t i = 0; i < count; ++i) {
                                                          hits += codec.decode(prg_nonce(prg), key.sk) ? 1 : 0;
                                                      }
                                                      return hits;
                                                  });
    std::uint64_t hits = 0;
    for (auto h : chunks) hits += h;
    return make_rate(hits, trials);
}

RateEstimate measure_structure_rate(const Profile& profile, std::uint64_t trials, std::uint64_t seed,
                                    unsigned threads) {
    const Meceg scheme = profile.scheme();
    const auto chunks = run_chunks<std::uint64_t>(Prg(seed), "structure", trials, threads,
                                                  [&](Prg& prg, std::uint64_t, std::uint64_t count) {
                                                      std::uint64_t hits = 0;
                                                      for (std::uint64_t i = 0; i < count; ++i) {
                                                          hits += ec_structure(scheme, prg_nonce(prg)) ? 1 : 0;
                                                      }
                                                      return hits;
                                                  });
    std::uint64_t hits = 0;
    for (auto h : chunks) hits += h;
    return make_rate(hits, trials);
}

double model_false_positive_rate(const BitLayout& layout) { return std::ldexp(1.0, -static_cast<int>(layout.m_d + 2)); }

}  // namespace distress
