#include "ewdecay/config.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <Eigen/Core>

namespace ewdecay {

using nlohmann::json;

namespace {

// Strict reader: every key in `j` must be consumed by one of the `get`
// calls, otherwise the config is rejected.
class Block {
public:
    Block(const json& j, std::string name) : j_(j), name_(std::move(name)) {
        if (!j_.is_object())
            throw ConfigError("config: block '" + name_ + "' must be an object");
    }

    template <typename T>
    void get(const char* key, T& out) {
        seen_.push_back(key);
        auto it = j_.find(key);
        if (it == j_.end()) return;
        try {
            out = it->get<T>();
        } catch (const json::exception&) {
            throw ConfigError("config: bad value type for '" + name_ + "." + key + "'");
        }
    }

    const json* sub(const char* key) {
        seen_.push_back(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            bool known = false;
            for (const auto& k : seen_)
                if (it.key() == k) { known = true; break; }
            if (!known)
                throw ConfigError("config: unknown key '" + name_ + "." + it.key() + "'");
        }
    }

private:
    const json& j_;
    std::string name_;
    std::vector<std::string> seen_;
};

void read_p(const json& j, NonlinearityConfig& nl) {
    if (j.is_number()) {
        nl.p = {j.get<double>()};
    } else if (j.is_array()) {
        nl.p = j.get<std::vector<double>>();
    } else {
        throw ConfigError("config: nonlinearity.p must be a number or an array");
    }
    if (nl.p.empty()) throw ConfigError("config: nonlinearity.p must be nonempty");
}

} // namespace

void RunConfig::validate() const {
    const auto& g = geometry;
    if (g.dim != 2 && g.dim != 3) throw ConfigError("config: geometry.dim must be 2 or 3");
    if (g.mesh_path.empty()) {
        if (!(g.R0 > 0.0) || !(g.R1 > g.R0))
            throw ConfigError("config: need 0 < R0 < R1");
    }
    if (tensor.kind != "constant-lame" && tensor.kind != "lame-quadratic" &&
        tensor.kind != "lame-exponential")
        throw ConfigError("config: unknown tensor.kind '" + tensor.kind + "'");
    if (damping.enabled) {
        if (!(damping.a0 > 0.0)) throw ConfigError("config: damping.a0 must be positive");
        if (!(damping.xi >= 0.0)) throw ConfigError("config: damping.xi must be >= 0");
    }
    if (nonlinearity.enabled) {
        if (nonlinearity.p.size() != 1 &&
            static_cast<int>(nonlinearity.p.size()) != g.dim)
            throw ConfigError("config: nonlinearity.p must have 1 or dim entries");
        build_nonlinearity(*this).validate(g.dim);
    }
    if (!(time.T > 0.0)) throw ConfigError("config: time.T must be positive");
    if (!(time.cfl > 0.0 && time.cfl <= 1.0))
        throw ConfigError("config: time.cfl must be in (0, 1]");
    if (time.record_every < 1) throw ConfigError("config: time.record_every must be >= 1");
    if (!(time.dt_max > 0.0)) throw ConfigError("config: time.dt_max must be positive");
    if (initial.kind != "radial-bump" && initial.kind != "fourier-mode" &&
        initial.kind != "random-seeded")
        throw ConfigError("config: unknown initial.kind '" + initial.kind + "'");
    if (!(flags.delta_cap > 0.0 && flags.delta_cap <= 2.0))
        throw ConfigError("config: flags.delta_cap must be in (0, 2]");
    if (mms.enabled && mms.kind != "linear" && mms.kind != "radial")
        throw ConfigError("config: unknown mms.kind '" + mms.kind + "'");
}

RunConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: JSON parse failure: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be an object");

    RunConfig cfg;
    {
        Block top(j, "");
        if (const json* s = top.sub("geometry")) {
            Block b(*s, "geometry");
            b.get("dim", cfg.geometry.dim);
            b.get("R0", cfg.geometry.R0);
            b.get("R1", cfg.geometry.R1);
            b.get("n_r", cfg.geometry.n_r);
            b.get("n_theta", cfg.geometry.n_theta);
            b.get("n_face", cfg.geometry.n_face);
            b.get("n_r_3d", cfg.geometry.n_r_3d);
            b.get("mesh_path", cfg.geometry.mesh_path);
            b.finish();
        }
        if (const json* s = top.sub("tensor")) {
            Block b(*s, "tensor");
            b.get("kind", cfg.tensor.kind);
            b.get("lambda0", cfg.tensor.lambda0);
            b.get("mu0", cfg.tensor.mu0);
            b.get("eps", cfg.tensor.eps);
            b.get("s", cfg.tensor.s);
            b.finish();
        }
        if (const json* s = top.sub("damping")) {
            Block b(*s, "damping");
            b.get("enabled", cfg.damping.enabled);
            b.get("R_d", cfg.damping.R_d);
            b.get("a0", cfg.damping.a0);
            b.get("xi", cfg.damping.xi);
            cfg.damping.a_min = cfg.damping.a0 / 10.0;
            b.get("a_min", cfg.damping.a_min);
            b.finish();
        }
        if (const json* s = top.sub("nonlinearity")) {
            Block b(*s, "nonlinearity");
            b.get("enabled", cfg.nonlinearity.enabled);
            if (const json* pj = b.sub("p")) read_p(*pj, cfg.nonlinearity);
            b.finish();
        }
        if (const json* s = top.sub("time")) {
            Block b(*s, "time");
            b.get("T", cfg.time.T);
            b.get("cfl", cfg.time.cfl);
            b.get("record_every", cfg.time.record_every);
            b.get("dt_max", cfg.time.dt_max);
            b.finish();
        }
        if (const json* s = top.sub("initial")) {
            Block b(*s, "initial");
            b.get("kind", cfg.initial.kind);
            b.get("seed", cfg.initial.seed);
            b.get("amplitude", cfg.initial.amplitude);
            b.get("mode", cfg.initial.mode);
            b.finish();
        }
        if (const json* s = top.sub("output")) {
            Block b(*s, "output");
            b.get("dir", cfg.output.dir);
            b.get("snapshot_every", cfg.output.snapshot_every);
            b.finish();
        }
        if (const json* s = top.sub("flags")) {
            Block b(*s, "flags");
            b.get("force", cfg.flags.force);
            b.get("out_of_theory_2d", cfg.flags.out_of_theory_2d);
            b.get("delta_cap", cfg.flags.delta_cap);
            b.get("bisect_tol", cfg.flags.bisect_tol);
            b.get("sign_tol", cfg.flags.sign_tol);
            b.finish();
        }
        if (const json* s = top.sub("mms")) {
            Block b(*s, "mms");
            b.get("enabled", cfg.mms.enabled);
            b.get("kind", cfg.mms.kind);
            b.get("omega", cfg.mms.omega);
            b.get("amplitude", cfg.mms.amplitude);
            b.finish();
        }
        top.finish();
    }
    if (cfg.geometry.dim == 2) cfg.flags.out_of_theory_2d = true;
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string config_to_json(const RunConfig& cfg) {
    json j;
    j["geometry"] = {{"dim", cfg.geometry.dim},       {"R0", cfg.geometry.R0},
                     {"R1", cfg.geometry.R1},         {"n_r", cfg.geometry.n_r},
                     {"n_theta", cfg.geometry.n_theta}, {"n_face", cfg.geometry.n_face},
                     {"n_r_3d", cfg.geometry.n_r_3d}, {"mesh_path", cfg.geometry.mesh_path}};
    j["tensor"] = {{"kind", cfg.tensor.kind},
                   {"lambda0", cfg.tensor.lambda0},
                   {"mu0", cfg.tensor.mu0},
                   {"eps", cfg.tensor.eps},
                   {"s", cfg.tensor.s}};
    j["damping"] = {{"enabled", cfg.damping.enabled},
                    {"R_d", cfg.damping.R_d},
                    {"a0", cfg.damping.a0},
                    {"xi", cfg.damping.xi},
                    {"a_min", cfg.damping.a_min}};
    std::vector<double> p = cfg.nonlinearity.p;
    j["nonlinearity"] = {{"enabled", cfg.nonlinearity.enabled}, {"p", p}};
    j["time"] = {{"T", cfg.time.T},
                 {"cfl", cfg.time.cfl},
                 {"record_every", cfg.time.record_every},
                 {"dt_max", cfg.time.dt_max}};
    j["initial"] = {{"kind", cfg.initial.kind},
                    {"seed", cfg.initial.seed},
                    {"amplitude", cfg.initial.amplitude},
                    {"mode", cfg.initial.mode}};
    j["output"] = {{"dir", cfg.output.dir}, {"snapshot_every", cfg.output.snapshot_every}};
    j["flags"] = {{"force", cfg.flags.force},
                  {"out_of_theory_2d", cfg.flags.out_of_theory_2d},
                  {"delta_cap", cfg.flags.delta_cap},
                  {"bisect_tol", cfg.flags.bisect_tol},
                  {"sign_tol", cfg.flags.sign_tol}};
    j["mms"] = {{"enabled", cfg.mms.enabled},
                {"kind", cfg.mms.kind},
                {"omega", cfg.mms.omega},
                {"amplitude", cfg.mms.amplitude}};
    return j.dump(2) + "\n";
}

void save_config(const RunConfig& cfg, const std::string& path) {
    write_file_atomic(path, config_to_json(cfg));
}

Mesh build_mesh(const RunConfig& cfg) {
    const auto& g = cfg.geometry;
    if (!g.mesh_path.empty()) return load_mesh(g.mesh_path);
    if (g.dim == 2) return gen_annulus_mesh(g.R0, g.R1, g.n_r, g.n_theta);
    return gen_shell_mesh(g.R0, g.R1, g.n_r_3d, g.n_face);
}

ElasticityTensorField build_tensor(const RunConfig& cfg) {
    const int d = cfg.geometry.dim;
    const auto& t = cfg.tensor;
    if (t.kind == "constant-lame")
        return ElasticityTensorField::lame(d, RadialProfile::constant(t.lambda0),
                                           RadialProfile::constant(t.mu0));
    if (t.kind == "lame-quadratic")
        return ElasticityTensorField::lame(d, RadialProfile::constant(t.lambda0),
                                           RadialProfile::quadratic(t.mu0, t.eps));
    return ElasticityTensorField::lame(d, RadialProfile::constant(t.lambda0),
                                       RadialProfile::exponential(t.mu0, t.s));
}

DampingField build_damping(const RunConfig& cfg, const Mesh& mesh) {
    if (!cfg.damping.enabled) return DampingField::none(mesh);
    return DampingField::bump(mesh, cfg.damping.R_d, cfg.damping.a0, cfg.damping.xi);
}

NonlinearityParams build_nonlinearity(const RunConfig& cfg) {
    NonlinearityParams nl;
    nl.enabled = cfg.nonlinearity.enabled;
    const int d = cfg.geometry.dim;
    nl.p = Eigen::VectorXd::Zero(d);
    for (int c = 0; c < d; ++c)
        nl.p[c] = cfg.nonlinearity.p.size() == 1 ? cfg.nonlinearity.p[0]
                                                 : cfg.nonlinearity.p[c];
    return nl;
}

InitialDataSpec build_initial_spec(const RunConfig& cfg) {
    InitialDataSpec spec;
    spec.kind = cfg.initial.kind;
    spec.seed = cfg.initial.seed;
    spec.amplitude = cfg.initial.amplitude;
    spec.mode = cfg.initial.mode;
    spec.r_lo = cfg.geometry.R0 + 0.1;
    spec.r_hi = cfg.damping.enabled ? cfg.damping.R_d : cfg.geometry.R1 - 0.1;
    return spec;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw ConfigError("cannot open file for writing: " + tmp);
        out << content;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw ConfigError("cannot rename " + tmp + " to " + path);
}

void apply_thread_cap() {
    if (const char* env = std::getenv("EWDECAY_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) Eigen::setNbThreads(n);
    }
}

} // namespace ewdecay
