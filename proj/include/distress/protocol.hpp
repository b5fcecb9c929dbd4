#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "distress/crypto.hpp"
#include "distress/errors.hpp"
#include "distress/messages.hpp"
#include "distress/profile.hpp"

namespace distress {

enum class RejectReason {
    CertInvalid,
    SigInvalid,
    Duplicate,
    UnknownWebsite,
    BadPassword,
    IdExhausted,
    UnknownServer,
    BadOuterMac,
    UnknownUser,
    BadTag,
    BadMac,
    StaleNonce,
    Malformed,
};

const char* to_string(RejectReason reason);
std::optional<RejectReason> reject_reason_from_string(std::string_view name);

class Rejected : public Error {
public:
    explicit Rejected(RejectReason reason, const std::string& detail = {})
        : Error(ErrorCode::ProtocolRejected, std::string(to_string(reason)) + (detail.empty() ? "" : ": " + detail)),
          reason_(reason) {}
    [[nodiscard]] RejectReason reason() const noexcept { return reason_; }

private:
    RejectReason reason_;
};

inline constexpr const char* kUserDcpLabel = "user-dcp";
inline constexpr const char* kServerDcpLabel = "server-dcp";
inline constexpr unsigned kConfirmationBits = 63;
inline constexpr std::size_t kNonceBytes = 16;

// id as ceil(m_i / 8) big-endian bytes.
Bytes id_bytes(const BitLayout& layout, u128 id);
// tag_A = MAC_kAC(id, sqn) truncated to m_t bits.
MacTag distress_tag(const DerivedKeys& k_ac, const BitLayout& layout, u128 id, std::uint64_t sqn);
// s_AC = MAC_kAC(sqn), sqn being the value the user signed with.
MacTag confirmation_tag(const DerivedKeys& k_ac, std::uint64_t sqn);

// info_A: free-form details for the responder plus the confirmation
// instruction, which names where in the page s_AC is hidden.
struct UserInfo {
    std::string details;
    std::string instruction;

    [[nodiscard]] Bytes encode() const;
    // Throws MalformedMessage; the instruction must be nonempty.
    static UserInfo decode(std::span<const std::uint8_t> data);
    friend bool operator==(const UserInfo&, const UserInfo&) = default;
};

// Fixed-size opaque page blob. A confirming page carries s_AC at an offset
// picked by the instruction; any other page is the same size of filler.
struct PageEmbed {
    static constexpr std::size_t kSize = 256;
    Bytes content;

    static PageEmbed with_confirmation(const std::string& instruction, const MacTag& s_ac, Prg& prg);
    static PageEmbed plain(Prg& prg);
    // nullopt when the content has the wrong size.
    [[nodiscard]] std::optional<MacTag> extract(const std::string& instruction) const;

    [[nodiscard]] Bytes encode() const;
    static PageEmbed decode(std::span<const std::uint8_t> data);
};

// One accepted distress. tick is the simulation clock.
struct DistressEvent {
    u128 id = 0;
    std::uint64_t sqn = 0;
    std::uint64_t tick = 0;
    std::string server;

    [[nodiscard]] std::string to_json_line() const;
    static DistressEvent from_json_line(const std::string& line);
    friend bool operator==(const DistressEvent&, const DistressEvent&) = default;
};

struct ServerRecord {
    std::string identity;
    Point pk_enc;
    SharedSeed k_bc;
};

struct UserRecord {
    std::string usr;
    PasswordHash pwd;
    UserInfo info;
    u128 id = 0;
    std::uint64_t sqn = 0;
    SharedSeed k_ac;
    std::vector<std::string> websites;
};

struct DcpConfig {
    unsigned n_max = 8;
    unsigned pbkdf2_iterations = 20000;
};

struct ForwardOutcome {
    bool accepted = false;
    std::optional<RejectReason> reason;
    Bytes reply;  // DistressReply frame when accepted
};

// Distress coordination point. Every handler takes the mutex for its whole
// run, so concurrent forwards for one user resolve in some serial order.
class Dcp {
public:
    Dcp(Profile profile, Point root_vk, DcpConfig config = {});

    [[nodiscard]] const Profile& profile() const { return profile_; }
    [[nodiscard]] const DcpConfig& config() const { return config_; }

    // ServerEnrolRequest -> ServerEnrolResponse or EnrolReject.
    Bytes on_server_enrol(std::span<const std::uint8_t> frame, Prg& prg);

    // User enrolment is two round trips on one session. UserEnrolHello ->
    // WebsiteList or EnrolReject; WebsiteSelection -> UserEnrolComplete or
    // EnrolReject. The record is committed only when the selection succeeds.
    Bytes on_user_hello(std::uint64_t session, std::span<const std::uint8_t> frame, Prg& prg);
    Bytes on_website_selection(std::uint64_t session, std::span<const std::uint8_t> frame, Prg& prg);

    // Total: malformed input is a Malformed rejection, never an exception.
    ForwardOutcome on_forward(std::span<const std::uint8_t> frame, std::uint64_t tick, Prg& prg);

    [[nodiscard]] std::vector<DistressEvent> events() const;
    void set_event_log(std::filesystem::path path);

    [[nodiscard]] std::optional<ServerRecord> server(const std::string& identity) const;
    [[nodiscard]] std::optional<UserRecord> user(const std::string& usr) const;
    [[nodiscard]] std::size_t user_count() const;
    [[nodiscard]] std::size_t server_count() const;

    // JSON {format, body, digest}; digest is SHA-256 of the serialized body.
    [[nodiscard]] std::string store_json() const;
    void save(const std::filesystem::path& path) const;
    // Throws StoreCorrupt and leaves the databases untouched on any failure.
    void load_store_json(const std::string& text);
    void load(const std::filesystem::path& path);

private:
    struct PendingUser {
        std::string usr;
        std::string pwd;
        UserInfo info;
        Point g_a;
        std::uint64_t sqn = 0;
        std::optional<u128> existing_id;
    };

    Bytes reject(RejectReason reason) const;
    u128 fresh_id(Prg& prg) const;
    const UserRecord* user_by_id(u128 id) const;

    Profile profile_;
    Point root_vk_;
    DcpConfig config_;
    mutable std::mutex mu_;
    std::map<std::string, ServerRecord> servers_;
    std::map<std::string, UserRecord> users_;
    std::map<std::uint64_t, PendingUser> pending_;
    std::vector<DistressEvent> events_;
    std::optional<std::filesystem::path> event_log_;
};

struct WebserverConfig {
    std::uint64_t pending_timeout = 1000;  // ticks
};

class Webserver {
public:
    Webserver(Profile profile, std::string identity, Certificate cert, SigKeyPair sig_key,
              WebserverConfig config = {});

    [[nodiscard]] const std::string& identity() const { return identity_; }
    [[nodiscard]] const Certificate& certificate() const { return cert_; }
    [[nodiscard]] const SigKeyPair& signing_key() const { return sig_key_; }
    [[nodiscard]] const Point& enc_public_key() const { return enc_.pk; }
    [[nodiscard]] bool enrolled() const { return !k_bc_.empty(); }
    [[nodiscard]] const SharedSeed& shared_seed() const { return k_bc_; }

    // Fresh mECEG key pair and DH exponent; returns the ServerEnrolRequest.
    Bytes begin_enrolment(Prg& prg);
    // Throws Rejected on EnrolReject, MalformedMessage on anything else odd.
    void finish_enrolment(std::span<const std::uint8_t> frame);

    // Decodes the client random. Not distress: nullopt, nothing recorded.
    // Distress: a DistressForward with fresh nonce_B, pending on `conn`.
    std::optional<Bytes> on_client_random(std::uint64_t conn, const NonceWire& random, std::uint64_t tick, Prg& prg,
                                          OpTally* tally = nullptr);

    // Verifies the MAC against the pending nonce_B values. Throws Rejected:
    // StaleNonce when it only verifies against a consumed or expired nonce_B,
    // BadMac otherwise, Malformed for bad framing.
    void on_reply(std::span<const std::uint8_t> frame, std::uint64_t tick);

    // Page served on `conn`: the confirmation page when one is ready (taken
    // once), else a plain page.
    PageEmbed page_for(std::uint64_t conn, Prg& prg);

    // Drops pendings older than the timeout; returns how many expired.
    std::size_t expire(std::uint64_t tick);
    [[nodiscard]] std::size_t pending_count() const { return pending_.size(); }

    [[nodiscard]] std::string to_json() const;
    static Webserver from_json(const Profile& profile, const std::string& text);

private:
    struct Pending {
        std::uint64_t conn = 0;
        std::uint64_t tick = 0;
    };

    Profile profile_;
    NonceCodec codec_;
    std::string identity_;
    Certificate cert_;
    SigKeyPair sig_key_;
    WebserverConfig config_;
    McegKeyPair enc_;
    std::optional<DhKeyShare> dh_;
    SharedSeed k_bc_;
    std::map<Bytes, Pending> pending_;
    std::set<Bytes> retired_;
    std::map<std::uint64_t, std::pair<std::string, MacTag>> ready_;  // conn -> (instruction, s_AC)
};

struct SiteKey {
    std::string identity;
    Point pk_enc;
};

struct UserCredentials {
    u128 id = 0;
    std::uint64_t sqn = 0;
    SharedSeed k_ac;
    std::vector<SiteKey> websites;
};

class User {
public:
    User(Profile profile, std::string usr, std::string pwd, UserInfo info);

    [[nodiscard]] const std::string& usr() const { return usr_; }
    [[nodiscard]] const UserInfo& info() const { return info_; }
    [[nodiscard]] bool enrolled() const { return creds_.has_value(); }
    // Throws ContractViolation before enrolment.
    [[nodiscard]] const UserCredentials& credentials() const;

    // Picks a fresh sqn and DH exponent; returns the UserEnrolHello.
    Bytes enrol_hello(Prg& prg);
    // WebsiteList -> WebsiteSelection with `wanted` (all listed sites when
    // empty). Throws Rejected for EnrolReject.
    Bytes select_websites(std::span<const std::uint8_t> list_frame, const std::vector<std::string>& wanted = {});
    // Throws Rejected for EnrolReject.
    void finish_enrolment(std::span<const std::uint8_t> frame);

    // tag over the current sqn, then Encode under the site key. sqn is
    // incremented before returning whatever the caller does next.
    // Throws Rejected(UnknownWebsite) for a site not chosen at enrolment.
    NonceWire make_distress_nonce(const std::string& site, Prg& prg);
    // Checks s_AC in the page against the sqn of the last distress nonce.
    [[nodiscard]] bool verify_confirmation(const PageEmbed& page) const noexcept;

    [[nodiscard]] std::string to_json() const;
    static User from_json(const Profile& profile, const std::string& text);

private:
    Profile profile_;
    std::string usr_;
    std::string pwd_;
    UserInfo info_;
    std::optional<DhKeyShare> dh_;
    std::uint64_t chosen_sqn_ = 0;
    std::vector<std::string> selected_;
    std::optional<UserCredentials> creds_;
    std::optional<std::uint64_t> last_sqn_;
};

}  // namespace distress
