#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/sha.h>

#include <cstring>

#include "distress/bytes.hpp"
#include "distress/errors.hpp"
#include "distress/prg.hpp"
#include "distress/wide.hpp"

namespace distress {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidNumber: return "InvalidNumber";
        case ErrorCode::DivisionByZero: return "DivisionByZero";
        case ErrorCode::NotASquare: return "NotASquare";
        case ErrorCode::NotOnCurve: return "NotOnCurve";
        case ErrorCode::CannotCompressIdentity: return "CannotCompressIdentity";
        case ErrorCode::InvalidPoint: return "InvalidPoint";
        case ErrorCode::EmbeddingFailed: return "EmbeddingFailed";
        case ErrorCode::InvalidFieldElement: return "InvalidFieldElement";
        case ErrorCode::InvalidLength: return "InvalidLength";
        case ErrorCode::LayoutViolation: return "LayoutViolation";
        case ErrorCode::ContractViolation: return "ContractViolation";
        case ErrorCode::InvalidSeed: return "InvalidSeed";
        case ErrorCode::DegenerateShare: return "DegenerateShare";
        case ErrorCode::MissingGroupOrder: return "MissingGroupOrder";
        case ErrorCode::ParamsInvalid: return "ParamsInvalid";
        case ErrorCode::StoreCorrupt: return "StoreCorrupt";
        case ErrorCode::MalformedMessage: return "MalformedMessage";
        case ErrorCode::SessionFailure: return "SessionFailure";
        case ErrorCode::ScriptError: return "ScriptError";
        case ErrorCode::ProtocolRejected: return "ProtocolRejected";
    }
    return "Unknown";
}

// ---------------------------------------------------------------- wide

u128 parse_u128(std::string_view text) {
    if (text.empty()) throw Error(ErrorCode::InvalidNumber, "empty decimal string");
    u128 v = 0;
    const u128 max = ~static_cast<u128>(0);
    for (char c : text) {
        if (c < '0' || c > '9') throw Error(ErrorCode::InvalidNumber, "non-digit in '" + std::string(text) + "'");
        const unsigned d = static_cast<unsigned>(c - '0');
        if (v > (max - d) / 10) throw Error(ErrorCode::InvalidNumber, "decimal overflows 128 bits");
        v = v * 10 + d;
    }
    return v;
}

std::string to_string(u128 v) {
    if (v == 0) return "0";
    std::string s;
    while (v != 0) {
        s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
        v /= 10;
    }
    return {s.rbegin(), s.rend()};
}

// ---------------------------------------------------------------- bytes

std::string to_hex(std::span<const std::uint8_t> data) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    s.reserve(data.size() * 2);
    for (auto b : data) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 0xf]);
    }
    return s;
}

namespace {
int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}
}  // namespace

Bytes from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) throw Error(ErrorCode::InvalidLength, "odd-length hex string");
    Bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const int hi = hex_digit(hex[2 * i]);
        const int lo = hex_digit(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) throw Error(ErrorCode::InvalidNumber, "bad hex digit");
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
}

Bytes to_bytes(std::string_view s) { return {s.begin(), s.end()}; }

std::string to_text(std::span<const std::uint8_t> data) { return {data.begin(), data.end()}; }

Bytes be_bytes(u128 value, std::size_t width) {
    Bytes out(width, 0);
    for (std::size_t i = 0; i < width && i < 16; ++i) {
        out[width - 1 - i] = static_cast<std::uint8_t>(value >> (8 * i));
    }
    return out;
}

u128 be_value(std::span<const std::uint8_t> data) {
    if (data.size() > 16) throw Error(ErrorCode::InvalidLength, "integer wider than 128 bits");
    u128 v = 0;
    for (auto b : data) v = (v << 8) | b;
    return v;
}

bool ct_equal(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
    if (a.size() != b.size()) return false;
    if (a.empty()) return true;
    return CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

FieldWriter& FieldWriter::add(std::span<const std::uint8_t> field) {
    const auto len = static_cast<std::uint32_t>(field.size());
    for (int shift = 24; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(len >> shift));
    out_.insert(out_.end(), field.begin(), field.end());
    return *this;
}

FieldWriter& FieldWriter::add(std::string_view field) {
    return add(std::span(reinterpret_cast<const std::uint8_t*>(field.data()), field.size()));
}

FieldWriter& FieldWriter::add_u64(std::uint64_t v) { return add(be_bytes(v, 8)); }

Bytes FieldReader::next() {
    if (data_.size() - pos_ < 4) throw Error(ErrorCode::MalformedMessage, "truncated field length");
    std::uint32_t len = 0;
    for (int i = 0; i < 4; ++i) len = (len << 8) | data_[pos_ + i];
    pos_ += 4;
    if (data_.size() - pos_ < len) throw Error(ErrorCode::MalformedMessage, "truncated field body");
    Bytes out(data_.begin() + static_cast<std::ptrdiff_t>(pos_), data_.begin() + static_cast<std::ptrdiff_t>(pos_ + len));
    pos_ += len;
    return out;
}

std::string FieldReader::next_text() { return to_text(next()); }

std::uint64_t FieldReader::next_u64() {
    const Bytes b = next();
    if (b.size() != 8) throw Error(ErrorCode::MalformedMessage, "expected 8-byte integer field");
    return static_cast<std::uint64_t>(be_value(b));
}

void FieldReader::expect_done() const {
    if (!done()) throw Error(ErrorCode::MalformedMessage, "trailing bytes after last field");
}

void BitWriter::put(u128 value, unsigned bits) {
    if (bits > 128) throw Error(ErrorCode::InvalidLength, "bit field wider than 128");
    if (pos_ + bits > out_.size() * 8) throw Error(ErrorCode::InvalidLength, "bit writer overflow");
    for (unsigned i = bits; i-- > 0;) {
        const std::size_t byte = pos_ / 8;
        const unsigned shift = 7 - static_cast<unsigned>(pos_ % 8);
        if (test_bit(value, i)) {
            out_[byte] = static_cast<std::uint8_t>(out_[byte] | (1u << shift));
        } else {
            out_[byte] = static_cast<std::uint8_t>(out_[byte] & ~(1u << shift));
        }
        ++pos_;
    }
}

u128 BitReader::get(unsigned bits) {
    if (bits > 128) throw Error(ErrorCode::InvalidLength, "bit field wider than 128");
    if (pos_ + bits > in_.size() * 8) throw Error(ErrorCode::InvalidLength, "bit reader underflow");
    u128 v = 0;
    for (unsigned i = 0; i < bits; ++i) {
        const std::size_t byte = pos_ / 8;
        const unsigned shift = 7 - static_cast<unsigned>(pos_ % 8);
        v = (v << 1) | ((in_[byte] >> shift) & 1u);
        ++pos_;
    }
    return v;
}

// ---------------------------------------------------------------- prg

struct Prg::Ctx {
    EVP_CIPHER_CTX* cipher = nullptr;
    ~Ctx() { EVP_CIPHER_CTX_free(cipher); }
};

Prg::Prg(std::uint64_t seed) : Prg(std::span<const std::uint8_t>(be_bytes(seed, 8))) {}

Prg::Prg(std::span<const std::uint8_t> seed) : Prg([&] {
          Key k;
          SHA256(seed.data(), seed.size(), k.bytes.data());
          return k;
      }()) {}

Prg::Prg(const Key& key) : key_(key), ctx_(std::make_unique<Ctx>()) {
    ctx_->cipher = EVP_CIPHER_CTX_new();
    const std::array<std::uint8_t, 16> iv{};
    if (ctx_->cipher == nullptr ||
        EVP_EncryptInit_ex(ctx_->cipher, EVP_aes_256_ctr(), nullptr, key_.bytes.data(), iv.data()) != 1) {
        throw std::runtime_error("AES-CTR initialisation failed");
    }
    refill();
}

Prg::~Prg() = default;
Prg::Prg(Prg&&) noexcept = default;
Prg& Prg::operator=(Prg&&) noexcept = default;

void Prg::refill() {
    static const std::array<std::uint8_t, 4096> zeros{};
    int len = 0;
    EVP_EncryptUpdate(ctx_->cipher, buf_.data(), &len, zeros.data(), static_cast<int>(zeros.size()));
    pos_ = 0;
}

void Prg::fill(std::span<std::uint8_t> out) {
    std::size_t done = 0;
    while (done < out.size()) {
        if (pos_ == buf_.size()) refill();
        const std::size_t n = std::min(out.size() - done, buf_.size() - pos_);
        std::memcpy(out.data() + done, buf_.data() + pos_, n);
        pos_ += n;
        done += n;
    }
}

Bytes Prg::bytes(std::size_t n) {
    Bytes out(n);
    fill(out);
    return out;
}

std::uint64_t Prg::next_u64() {
    std::array<std::uint8_t, 8> b{};
    fill(b);
    return static_cast<std::uint64_t>(be_value(b));
}

bool Prg::coin() { return (next_u64() & 1) != 0; }

u128 Prg::bits(unsigned n) {
    if (n > 128) throw Error(ErrorCode::ContractViolation, "Prg::bits > 128");
    const u128 v = (static_cast<u128>(next_u64()) << 64) | next_u64();
    return v & low_mask(n);
}

u128 Prg::below(u128 bound) {
    if (bound == 0) throw Error(ErrorCode::ContractViolation, "Prg::below(0)");
    const unsigned n = bit_length(bound - 1);
    for (;;) {
        const u128 v = bits(n);
        if (v < bound) return v;
    }
}

u128 Prg::range(u128 lo, u128 hi) {
    if (lo >= hi) throw Error(ErrorCode::ContractViolation, "Prg::range with empty interval");
    return lo + below(hi - lo);
}

double Prg::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

Prg Prg::derive(std::string_view label, std::uint64_t index) const {
    FieldWriter w;
    w.add(label).add_u64(index);
    Key k;
    unsigned int len = 0;
    HMAC(EVP_sha256(), key_.bytes.data(), static_cast<int>(key_.bytes.size()), w.bytes().data(), w.bytes().size(),
         k.bytes.data(), &len);
    return Prg(k);
}

}  // namespace distress
