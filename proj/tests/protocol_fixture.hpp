#pragma once

#include <memory>
#include <string>
#include <vector>

#include "distress/protocol.hpp"

namespace fixture {

using namespace distress;

// DCP plus enrolled webservers and users, wired by direct frame passing.
struct Stack {
    Profile profile;
    Prg prg;
    SigKeyPair root;
    std::unique_ptr<Dcp> dcp;
    std::vector<std::unique_ptr<Webserver>> servers;
    std::vector<std::unique_ptr<User>> users;
    std::uint64_t next_session = 1;
    std::uint64_t tick = 0;

    explicit Stack(Profile p, std::uint64_t seed = 1, DcpConfig cfg = {}) : profile(std::move(p)), prg(seed) {
        cfg.pbkdf2_iterations = 1000;
        root = sig_keygen(profile, prg);
        dcp = std::make_unique<Dcp>(profile, root.vk, cfg);
    }

    Webserver& add_server(const std::string& name) {
        const auto key = sig_keygen(profile, prg);
        servers.push_back(
            std::make_unique<Webserver>(profile, name, cert_issue(profile, root, name, key.vk), key));
        Webserver& w = *servers.back();
        w.finish_enrolment(dcp->on_server_enrol(w.begin_enrolment(prg), prg));
        return w;
    }

    User& add_user(const std::string& usr, const std::vector<std::string>& sites = {},
                   const std::string& pwd = "pw") {
        users.push_back(std::make_unique<User>(profile, usr, pwd, UserInfo{"contact " + usr, "footer:" + usr}));
        enrol(*users.back(), sites);
        return *users.back();
    }

    void enrol(User& u, const std::vector<std::string>& sites = {}) {
        const std::uint64_t s = next_session++;
        const Bytes list = dcp->on_user_hello(s, u.enrol_hello(prg), prg);
        const Bytes sel = u.select_websites(list, sites);
        u.finish_enrolment(dcp->on_website_selection(s, sel, prg));
    }

    Webserver& server(const std::string& name) {
        for (auto& w : servers) {
            if (w->identity() == name) return *w;
        }
        throw std::runtime_error("no server " + name);
    }
};

}  // namespace fixture
