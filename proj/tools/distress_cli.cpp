#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <openssl/rand.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "distress/harness.hpp"

namespace fs = std::filesystem;
using namespace distress;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kRejected = 3, kParams = 4, kStore = 5 };

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string profile = "toy";
    std::string config;
    std::optional<std::uint64_t> seed;
    std::uint64_t trials = 100000;
    std::string n_sweep = "1,2,4,8,16";
    std::string store = "distress-store";
    std::string out;
    std::optional<unsigned> m_d, m_i, m_t, n_max;
    unsigned threads = 1;
    // subcommand inputs
    std::string name;
    std::string user;
    std::string server;
    std::string password;
    std::string instruction;
    std::vector<std::string> sites;
    std::string script;
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + path.string());
        out << text;
    }
    fs::rename(tmp, path);
}

void emit(const Options& o, const std::string& text) {
    if (o.out.empty()) {
        std::cout << text;
    } else {
        write_file(o.out, text);
    }
}

// Values from --config fill in whatever the command line left unset.
void apply_config(const CLI::App& app, Options& o) {
    if (o.config.empty()) return;
    json c;
    try {
        c = json::parse(read_file(o.config));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not JSON: ") + e.what());
    }
    if (!c.is_object()) throw ConfigError("config must be an object");
    const auto unset = [&](const char* flag) { return app.count(flag) == 0; };
    try {
        if (c.contains("profile") && unset("--profile")) o.profile = c["profile"].get<std::string>();
        if (c.contains("seed") && unset("--seed")) o.seed = c["seed"].get<std::uint64_t>();
        if (c.contains("trials") && unset("--trials")) o.trials = c["trials"].get<std::uint64_t>();
        if (c.contains("n_sweep") && unset("--n-sweep")) o.n_sweep = c["n_sweep"].get<std::string>();
        if (c.contains("store") && unset("--store")) o.store = c["store"].get<std::string>();
        if (c.contains("out") && unset("--out")) o.out = c["out"].get<std::string>();
        if (c.contains("threads") && unset("--threads")) o.threads = c["threads"].get<unsigned>();
        if (c.contains("m_d") && unset("--m-d")) o.m_d = c["m_d"].get<unsigned>();
        if (c.contains("m_i") && unset("--m-i")) o.m_i = c["m_i"].get<unsigned>();
        if (c.contains("m_t") && unset("--m-t")) o.m_t = c["m_t"].get<unsigned>();
        if (c.contains("n_max") && unset("--n-max")) o.n_max = c["n_max"].get<unsigned>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
}

Profile resolve_profile(const Options& o) {
    Profile p = (o.profile == "toy" || o.profile == "production") ? builtin_profile(o.profile)
                                                                  : profile_from_json(read_file(o.profile));
    if (o.m_d || o.m_i || o.m_t) {
        BitLayout l = p.layout;
        if (o.m_d) l.m_d = *o.m_d;
        if (o.m_i) l.m_i = *o.m_i;
        if (o.m_t) l.m_t = *o.m_t;
        try {
            l.validate(p.curve.field().bit_len());
        } catch (const Error& e) {
            throw ConfigError(std::string("layout override: ") + e.what());
        }
        p.layout = l;
    }
    return p;
}

std::uint64_t need_seed(const Options& o) {
    if (!o.seed) throw ConfigError("--seed is required for this command");
    return *o.seed;
}

Prg operational_prg(const Options& o) {
    if (o.seed) return Prg(*o.seed);
    std::array<std::uint8_t, 32> seed{};
    if (RAND_bytes(seed.data(), static_cast<int>(seed.size())) != 1) throw Error(ErrorCode::InvalidSeed, "no entropy");
    return Prg(std::span<const std::uint8_t>(seed));
}

// ---- store directory ----
//   deployment.json  profile, root key, DCP settings
//   dcp.json         DCP databases
//   events.ndjson    distress event log
//   servers/<name>.json, users/<name>.json

struct Deployment {
    Profile profile;
    SigKeyPair root;
    DcpConfig dcp;
};

fs::path store_path(const Options& o, const std::string& rel) { return fs::path(o.store) / rel; }

Deployment load_deployment(const Options& o) {
    const fs::path path = store_path(o, "deployment.json");
    if (!fs::exists(path)) throw Error(ErrorCode::StoreCorrupt, "no deployment at " + o.store + "; run keygen");
    try {
        const json d = json::parse(read_file(path));
        Deployment dep{profile_from_json(d.at("profile").dump()), {}, {}};
        dep.root = sig_key_from_json(dep.profile, d.at("root").dump());
        dep.dcp.n_max = d.at("n_max").get<unsigned>();
        dep.dcp.pbkdf2_iterations = d.at("pbkdf2_iterations").get<unsigned>();
        return dep;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::StoreCorrupt, std::string("deployment: ") + e.what());
    }
}

std::unique_ptr<Dcp> open_dcp(const Options& o, const Deployment& dep) {
    auto dcp = std::make_unique<Dcp>(dep.profile, dep.root.vk, dep.dcp);
    const fs::path path = store_path(o, "dcp.json");
    if (fs::exists(path)) dcp->load(path);
    dcp->set_event_log(store_path(o, "events.ndjson"));
    return dcp;
}

template <typename T>
T load_principal(const Options& o, const Deployment& dep, const std::string& dir, const std::string& name) {
    const fs::path path = store_path(o, dir + "/" + name + ".json");
    if (!fs::exists(path)) throw ConfigError("no " + dir.substr(0, dir.size() - 1) + " named " + name);
    try {
        return T::from_json(dep.profile, read_file(path));
    } catch (const Error& e) {
        throw Error(ErrorCode::StoreCorrupt, path.string() + ": " + e.what());
    }
}

void throw_if_rejected(const Bytes& frame) {
    const Message m = Message::decode(frame);
    if (m.type == MsgType::EnrolReject) throw Rejected(*reject_reason_from_string(m.text(0)));
}

// ---- commands ----

int cmd_keygen(const Options& o) {
    if (fs::exists(store_path(o, "deployment.json"))) throw ConfigError("store " + o.store + " already initialised");
    Deployment dep{resolve_profile(o), {}, {}};
    validate_profile(dep.profile);
    if (o.n_max) dep.dcp.n_max = *o.n_max;
    Prg prg = operational_prg(o);
    dep.root = sig_keygen(dep.profile, prg);
    ordered_json d;
    d["format"] = "distress-deployment/1";
    d["profile"] = ordered_json::parse(profile_to_json(dep.profile));
    d["root"] = ordered_json::parse(sig_key_to_json(dep.profile, dep.root));
    d["n_max"] = dep.dcp.n_max;
    d["pbkdf2_iterations"] = dep.dcp.pbkdf2_iterations;
    write_file(store_path(o, "deployment.json"), d.dump(2) + "\n");
    Dcp(dep.profile, dep.root.vk, dep.dcp).save(store_path(o, "dcp.json"));
    ordered_json r;
    r["store"] = o.store;
    r["profile"] = dep.profile.name;
    r["root_vk"] = to_hex(point_bytes(dep.profile.curve, dep.root.vk));
    emit(o, r.dump() + "\n");
    return kOk;
}

int cmd_enroll_server(const Options& o) {
    if (o.name.empty()) throw ConfigError("--name is required");
    const Deployment dep = load_deployment(o);
    auto dcp = open_dcp(o, dep);
    Prg prg = operational_prg(o);
    const SigKeyPair key = sig_keygen(dep.profile, prg);
    Webserver w(dep.profile, o.name, cert_issue(dep.profile, dep.root, o.name, key.vk), key);
    const Bytes resp = dcp->on_server_enrol(w.begin_enrolment(prg), prg);
    throw_if_rejected(resp);
    w.finish_enrolment(resp);
    dcp->save(store_path(o, "dcp.json"));
    write_file(store_path(o, "servers/" + o.name + ".json"), w.to_json());
    ordered_json r;
    r["server"] = o.name;
    r["enrolled"] = true;
    emit(o, r.dump() + "\n");
    return kOk;
}

int cmd_enroll_user(const Options& o) {
    if (o.name.empty()) throw ConfigError("--name is required");
    if (o.password.empty()) throw ConfigError("--password is required");
    const Deployment dep = load_deployment(o);
    auto dcp = open_dcp(o, dep);
    Prg prg = operational_prg(o);
    const fs::path path = store_path(o, "users/" + o.name + ".json");
    User u = fs::exists(path) ? load_principal<User>(o, dep, "users", o.name)
                              : User(dep.profile, o.name, o.password,
                                     UserInfo{"contact " + o.name,
                                              o.instruction.empty() ? "footer:" + o.name : o.instruction});
    const Bytes list = dcp->on_user_hello(1, u.enrol_hello(prg), prg);
    throw_if_rejected(list);
    const Bytes done = dcp->on_website_selection(1, u.select_websites(list, o.sites), prg);
    throw_if_rejected(done);
    u.finish_enrolment(done);
    dcp->save(store_path(o, "dcp.json"));
    write_file(path, u.to_json());
    ordered_json r;
    r["user"] = o.name;
    r["websites"] = json::array();
    for (const auto& s : u.credentials().websites) r["websites"].push_back(s.identity);
    emit(o, r.dump() + "\n");
    return kOk;
}

int cmd_send_distress(const Options& o) {
    if (o.user.empty() || o.server.empty()) throw ConfigError("--user and --server are required");
    const Deployment dep = load_deployment(o);
    auto dcp = open_dcp(o, dep);
    User u = load_principal<User>(o, dep, "users", o.user);
    Webserver w = load_principal<Webserver>(o, dep, "servers", o.server);
    Prg prg = operational_prg(o);

    const NonceWire nonce = u.make_distress_nonce(o.server, prg);
    write_file(store_path(o, "users/" + o.user + ".json"), u.to_json());  // the sqn advance sticks
    ordered_json r;
    r["user"] = o.user;
    r["server"] = o.server;
    r["client_random"] = to_hex(Bytes(nonce.bytes.begin(), nonce.bytes.end()));
    const std::uint64_t tick = dcp->events().size() + 1;
    const auto fwd = w.on_client_random(1, nonce, tick, prg);
    r["forwarded"] = fwd.has_value();
    std::optional<RejectReason> reason;
    if (fwd) {
        const ForwardOutcome out = dcp->on_forward(*fwd, tick, prg);
        if (out.accepted) {
            dcp->save(store_path(o, "dcp.json"));
            try {
                w.on_reply(out.reply, tick);
            } catch (const Rejected& e) {
                reason = e.reason();
            }
        } else {
            reason = out.reason;
        }
    }
    r["rejected"] = reason ? ordered_json(to_string(*reason)) : ordered_json(nullptr);
    r["confirmed"] = u.verify_confirmation(PageEmbed::decode(w.page_for(1, prg).encode()));
    emit(o, r.dump() + "\n");
    if (reason) throw Rejected(*reason);
    return kOk;
}

int cmd_simulate(const Options& o) {
    if (o.script.empty()) throw ConfigError("a scenario script is required");
    const ScenarioResult res = scenario_run(read_file(o.script), o.seed);
    if (o.out.empty()) {
        std::cout << res.summary_json;
        return kOk;
    }
    // --out names a directory for the summary, transcript and event log
    const fs::path dir(o.out);
    write_file(dir / "summary.json", res.summary_json);
    std::string transcript;
    for (const auto& l : res.transcript) transcript += l + "\n";
    write_file(dir / "transcript.ndjson", transcript);
    std::string events;
    for (const auto& e : res.events) events += e.to_json_line() + "\n";
    write_file(dir / "events.ndjson", events);
    return kOk;
}

std::vector<std::size_t> parse_sweep(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const unsigned long v = std::stoul(item, &used);
            if (used != item.size() || v == 0) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ConfigError("bad --n-sweep entry '" + item + "'");
        }
    }
    if (out.empty()) throw ConfigError("empty --n-sweep");
    return out;
}

int cmd_game(const Options& o) {
    const std::uint64_t seed = need_seed(o);
    const Profile p = resolve_profile(o);
    if (o.trials < 1000) throw ConfigError("--trials must be at least 1000");
    std::string csv = "n,trials,advantage,std_err,analytic\n";
    char row[160];
    for (const std::size_t n : parse_sweep(o.n_sweep)) {
        const AdvantageEstimate e = estimate_advantage(p, n, o.trials, seed, o.threads);
        std::snprintf(row, sizeof row, "%zu,%llu,%.9f,%.9f,%.12f\n", n, static_cast<unsigned long long>(e.trials),
                      e.advantage, e.std_err, analytic_advantage(n));
        csv += row;
    }
    emit(o, csv);
    return kOk;
}

ordered_json rate_json(const RateEstimate& r) {
    ordered_json j;
    j["trials"] = r.trials;
    j["hits"] = r.hits;
    j["rate"] = r.rate;
    j["std_err"] = r.std_err;
    j["wilson_lo"] = r.wilson_lo;
    j["wilson_hi"] = r.wilson_hi;
    return j;
}

int cmd_fp_rate(const Options& o) {
    const std::uint64_t seed = need_seed(o);
    const Profile p = resolve_profile(o);
    const RateEstimate r = measure_false_positive_rate(p, o.trials, seed, o.threads);
    ordered_json j;
    j["profile"] = p.name;
    j["seed"] = seed;
    j["m_d"] = p.layout.m_d;
    j["m_i"] = p.layout.m_i;
    j["m_t"] = p.layout.m_t;
    j["model"] = model_false_positive_rate(p.layout);
    j["measured"] = rate_json(r);
    emit(o, j.dump(2) + "\n");
    return kOk;
}

int cmd_validate_params(const Options& o) {
    const Profile p = resolve_profile(o);
    validate_profile(p);
    ordered_json j;
    j["profile"] = p.name;
    j["valid"] = true;
    emit(o, j.dump() + "\n");
    return kOk;
}

int report(int code, const std::string& kind, const std::string& message) {
    ordered_json e;
    e["error"] = kind;
    e["message"] = message;
    e["exit"] = code;
    std::cerr << e.dump() << "\n";
    return code;
}

int exit_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::ParamsInvalid:
        case ErrorCode::LayoutViolation:
        case ErrorCode::MissingGroupOrder:
            return kParams;
        case ErrorCode::StoreCorrupt:
            return kStore;
        case ErrorCode::ProtocolRejected:
            return kRejected;
        case ErrorCode::ScriptError:
        case ErrorCode::InvalidSeed:
            return kConfig;
        default:
            return kFailure;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Covert distress signalling: keys, enrolment, simulation and statistics"};
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    std::uint64_t seed = 0;
    unsigned m_d = 0, m_i = 0, m_t = 0, n_max = 0;
    app.add_option("--profile", o.profile, "toy, production or a parameter file");
    app.add_option("--config", o.config, "JSON config file; flags take precedence");
    app.add_option("--seed", seed, "PRG seed");
    app.add_option("--trials", o.trials, "Monte-Carlo trials");
    app.add_option("--n-sweep", o.n_sweep, "comma-separated game sizes");
    app.add_option("--store", o.store, "store directory");
    app.add_option("--out", o.out, "output file (directory for simulate)");
    app.add_option("--threads", o.threads, "worker threads for statistics");
    app.add_option("--m-d", m_d, "marker bits override");
    app.add_option("--m-i", m_i, "id bits override");
    app.add_option("--m-t", m_t, "tag bits override");
    app.add_option("--n-max", n_max, "sequence window");

    auto* keygen = app.add_subcommand("keygen", "create a store with a root key and an empty DCP");
    auto* enroll_server = app.add_subcommand("enroll-server", "enrol a webserver with the DCP");
    enroll_server->add_option("--name", o.name, "server identity")->required();
    auto* enroll_user = app.add_subcommand("enroll-user", "enrol or re-enrol a user");
    enroll_user->add_option("--name", o.name, "user name")->required();
    enroll_user->add_option("--password", o.password, "password")->required();
    enroll_user->add_option("--sites", o.sites, "websites to use (default: all)")->delimiter(',');
    enroll_user->add_option("--instruction", o.instruction, "where the confirmation is embedded");
    auto* send = app.add_subcommand("send-distress", "send one distress signal through a webserver");
    send->add_option("--user", o.user)->required();
    send->add_option("--server", o.server)->required();
    auto* simulate = app.add_subcommand("simulate", "run a scenario script");
    simulate->add_option("script", o.script, "scenario JSON")->required();
    auto* game = app.add_subcommand("game", "advantage sweep as CSV");
    auto* fp = app.add_subcommand("fp-rate", "false-positive rate of PRG nonces");
    auto* validate = app.add_subcommand("validate-params", "check curve and layout parameters");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report(kConfig, "ConfigError", e.what());
    }
    if (app.count("--seed")) o.seed = seed;
    if (app.count("--m-d")) o.m_d = m_d;
    if (app.count("--m-i")) o.m_i = m_i;
    if (app.count("--m-t")) o.m_t = m_t;
    if (app.count("--n-max")) o.n_max = n_max;

    try {
        apply_config(app, o);
        if (keygen->parsed()) return cmd_keygen(o);
        if (enroll_server->parsed()) return cmd_enroll_server(o);
        if (enroll_user->parsed()) return cmd_enroll_user(o);
        if (send->parsed()) return cmd_send_distress(o);
        if (simulate->parsed()) return cmd_simulate(o);
        if (game->parsed()) return cmd_game(o);
        if (fp->parsed()) return cmd_fp_rate(o);
        if (validate->parsed()) return cmd_validate_params(o);
    } catch (const ConfigError& e) {
        return report(kConfig, "ConfigError", e.what());
    } catch (const Rejected& e) {
        return report(kRejected, "ProtocolRejected", to_string(e.reason()));
    } catch (const Error& e) {
        return report(exit_for(e.code()), to_string(e.code()), e.what());
    } catch (const std::exception& e) {
        return report(kFailure, "Failure", e.what());
    }
    return kFailure;
}
