#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "distress/census.hpp"
#include "distress/harness.hpp"

namespace py = pybind11;
using namespace distress;

namespace {

// Python ints cross the boundary as decimal text; u128 has no native caster.
u128 to_u128(const py::int_& v) { return parse_u128(py::str(v).cast<std::string>()); }

py::int_ from_u128(u128 v) { return py::int_(py::reinterpret_steal<py::object>(PyLong_FromString(to_string(v).c_str(), nullptr, 10))); }

py::bytes wire_bytes(const NonceWire& w) { return {reinterpret_cast<const char*>(w.bytes.data()), w.bytes.size()}; }

NonceWire to_wire(const py::bytes& b) {
    const std::string s = b;
    if (s.size() != NonceWire::kBytes) throw Error(ErrorCode::InvalidLength, "a nonce is 32 bytes");
    NonceWire w;
    std::copy(s.begin(), s.end(), w.bytes.begin());
    return w;
}

py::dict rate_dict(const RateEstimate& r) {
    py::dict d;
    d["trials"] = r.trials;
    d["hits"] = r.hits;
    d["rate"] = r.rate;
    d["std_err"] = r.std_err;
    d["wilson_lo"] = r.wilson_lo;
    d["wilson_hi"] = r.wilson_hi;
    return d;
}

// A profile plus one key pair, enough to drive the codec from Python.
class Codec {
public:
    Codec(const std::string& profile, std::uint64_t seed)
        : profile_(builtin_profile(profile)), codec_(profile_.codec()), prg_(seed), key_(codec_.scheme().keygen(prg_)) {}

    py::bytes encode(const py::int_& id, const py::int_& tag) {
        const BitLayout& l = profile_.layout;
        return wire_bytes(codec_.encode({{to_u128(id), l.m_i}, {to_u128(tag), l.m_t}}, key_.pk, prg_));
    }

    py::object decode(const py::bytes& wire) const {
        const auto r = codec_.decode(to_wire(wire), key_.sk);
        if (!r) return py::none();
        return py::make_tuple(from_u128(r->id.value), from_u128(r->tag.value));
    }

    bool has_structure(const py::bytes& wire) const { return codec_.scheme().has_ciphertext_structure(to_wire(wire)); }
    py::bytes random_nonce() { return wire_bytes(prg_nonce(prg_)); }
    [[nodiscard]] py::dict layout() const {
        py::dict d;
        d["m_d"] = profile_.layout.m_d;
        d["m_i"] = profile_.layout.m_i;
        d["m_t"] = profile_.layout.m_t;
        d["pad_bits"] = profile_.layout.pad_bits;
        return d;
    }

private:
    Profile profile_;
    NonceCodec codec_;
    Prg prg_;
    McegKeyPair key_;
};

}  // namespace

PYBIND11_MODULE(_distress, m) {
    m.doc() = "Distress signals hidden in TLS client randoms";

    py::register_exception<Error>(m, "DistressError");

    py::class_<Codec>(m, "Codec")
        .def(py::init<const std::string&, std::uint64_t>(), py::arg("profile") = "production", py::arg("seed") = 0)
        .def("encode", &Codec::encode, py::arg("id"), py::arg("tag"))
        .def("decode", &Codec::decode, py::arg("wire"))
        .def("has_structure", &Codec::has_structure, py::arg("wire"))
        .def("random_nonce", &Codec::random_nonce)
        .def_property_readonly("layout", &Codec::layout);

    m.def("validate_profile", [](const std::string& text) {
        validate_profile(profile_from_json(text));
        return true;
    });
    m.def("builtin_profile_json", [](const std::string& name) { return profile_to_json(builtin_profile(name)); });

    m.def("analytic_advantage", &analytic_advantage, py::arg("n"));
    m.def("closed_form_advantage", &closed_form_advantage, py::arg("n"));
    m.def(
        "estimate_advantage",
        [](const std::string& profile, std::size_t n, std::uint64_t trials, std::uint64_t seed) {
            py::gil_scoped_release release;
            const AdvantageEstimate e = estimate_advantage(builtin_profile(profile), n, trials, seed);
            py::gil_scoped_acquire acquire;
            py::dict d;
            d["n"] = e.n;
            d["trials"] = e.trials;
            d["p_hat_b0"] = e.p_hat_b0;
            d["p_hat_b1"] = e.p_hat_b1;
            d["advantage"] = e.advantage;
            d["std_err"] = e.std_err;
            return d;
        },
        py::arg("profile"), py::arg("n"), py::arg("trials"), py::arg("seed"));
    m.def(
        "false_positive_rate",
        [](const std::string& profile, std::uint64_t trials, std::uint64_t seed) {
            return rate_dict(measure_false_positive_rate(builtin_profile(profile), trials, seed));
        },
        py::arg("profile"), py::arg("trials"), py::arg("seed"));
    m.def(
        "structure_rate",
        [](const std::string& profile, std::uint64_t trials, std::uint64_t seed) {
            return rate_dict(measure_structure_rate(builtin_profile(profile), trials, seed));
        },
        py::arg("profile"), py::arg("trials"), py::arg("seed"));
    m.def("toy_census", [] {
        const CurveCensus c = take_census(toy_profile().curve);
        py::dict d;
        d["group_order"] = c.group_order;
        d["slot_fraction"] = c.slot_fraction();
        d["structure_fraction"] = c.structure_fraction();
        d["false_positive_rate"] = exact_false_positive_rate(c, toy_profile().layout);
        return d;
    });

    m.def(
        "scenario_run",
        [](const std::string& script, std::optional<std::uint64_t> seed) {
            const ScenarioResult r = scenario_run(script, seed);
            py::list events;
            for (const auto& e : r.events) events.append(e.to_json_line());
            return py::make_tuple(r.summary_json, r.transcript, events);
        },
        py::arg("script"), py::arg("seed") = py::none());
    m.def("guarantee_suite", [](std::uint64_t seed) {
        py::list out;
        for (const auto& c : run_guarantee_suite(seed)) out.append(py::make_tuple(c.name, c.expected, c.observed, c.pass));
        return out;
    });
}
