#include "mclink/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "mclink/errors.hpp"

namespace mclink {

namespace {

std::string anchored(const std::string& origin, int line, int column, const std::string& msg) {
    std::ostringstream os;
    os << origin << ':' << line << ':' << column << ": " << msg;
    return os.str();
}

/// Walks one mapping node, tracking consumed keys so typos surface as errors.
class Section {
public:
    Section(const YAML::Node& node, std::string path, const std::string& origin)
        : node_(node), path_(std::move(path)), origin_(origin) {
        if (!node_.IsMap()) fail(node_, "'" + path_ + "' must be a mapping");
    }

    [[noreturn]] void fail(const YAML::Node& at, const std::string& msg) const {
        const auto mark = at.Mark();
        throw ScenarioError(origin_, mark.line + 1, mark.column + 1, msg);
    }
    [[noreturn]] void fail(const std::string& msg) const { fail(node_, msg); }

    [[nodiscard]] bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }

    [[nodiscard]] YAML::Node child(const std::string& key) {
        seen_.insert(key);
        return node_[key];
    }

    [[nodiscard]] std::string qualified(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    [[nodiscard]] Section sub(const std::string& key) {
        const YAML::Node n = child(key);
        if (!n) fail("missing section '" + qualified(key) + "'");
        return Section(n, qualified(key), origin_);
    }

    double number(const YAML::Node& n, const std::string& name) const {
        if (!n.IsScalar()) fail(n, "'" + name + "' must be a number");
        double value{};
        try {
            value = n.as<double>();
        } catch (const YAML::Exception&) {
            fail(n, "'" + name + "' must be a number, got '" + n.Scalar() + "'");
        }
        if (!std::isfinite(value)) fail(n, "'" + name + "' must be finite");
        return value;
    }

    double req(const std::string& key) {
        const YAML::Node n = child(key);
        if (!n) fail("missing field '" + qualified(key) + "'");
        return number(n, qualified(key));
    }

    std::optional<double> opt(const std::string& key) {
        const YAML::Node n = child(key);
        if (!n) return std::nullopt;
        return number(n, qualified(key));
    }

    double positive(const std::string& key) {
        const double v = req(key);
        if (!(v > 0.0)) fail(node_[key], "'" + qualified(key) + "' must be > 0");
        return v;
    }

    double non_negative(const std::string& key) {
        const double v = req(key);
        if (v < 0.0) fail(node_[key], "'" + qualified(key) + "' must be >= 0");
        return v;
    }

    std::optional<std::string> text(const std::string& key) {
        const YAML::Node n = child(key);
        if (!n) return std::nullopt;
        if (!n.IsScalar()) fail(n, "'" + qualified(key) + "' must be a string");
        return n.Scalar();
    }

    std::optional<bool> flag(const std::string& key) {
        const YAML::Node n = child(key);
        if (!n) return std::nullopt;
        try {
            return n.as<bool>();
        } catch (const YAML::Exception&) {
            fail(n, "'" + qualified(key) + "' must be true or false");
        }
    }

    template <class Enum>
    Enum choice(const std::string& key, std::initializer_list<std::pair<const char*, Enum>> options,
                Enum fallback) {
        const auto value = text(key);
        if (!value) return fallback;
        std::string allowed;
        for (const auto& [name, e] : options) {
            if (*value == name) return e;
            allowed += allowed.empty() ? name : std::string(", ") + name;
        }
        fail(node_[key], "'" + qualified(key) + "' must be one of: " + allowed);
    }

    /// Re-raises a domain validation failure at this section's line.
    template <class F>
    void checked(F&& f) const {
        try {
            f();
        } catch (const std::invalid_argument& e) {
            fail(std::string(e.what()) + " (in '" + (path_.empty() ? "<root>" : path_) + "')");
        }
    }

    void finish() const {
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (seen_.count(key) == 0) fail(kv.first, "unknown field '" + qualified(key) + "'");
        }
    }

    [[nodiscard]] const YAML::Node& node() const { return node_; }
    [[nodiscard]] const std::string& origin() const { return origin_; }

private:
    YAML::Node node_;
    std::string path_;
    const std::string& origin_;
    std::set<std::string> seen_;
};

FlowEnv parse_env(Section s) {
    FlowEnv env;
    env.v_eff = s.positive("v_eff_m_per_s");
    env.D = s.positive("D_m2_per_s");
    env.rho = s.opt("rho_kg_per_m3");
    env.mu = s.opt("mu_Pa_s");
    const auto d_eff = s.opt("D_eff_m2_per_s");
    if (s.has("taylor_aris")) {
        if (d_eff) s.fail("give either 'env.D_eff_m2_per_s' or 'env.taylor_aris', not both");
        Section ta = s.sub("taylor_aris");
        ChannelGeometry geom{1.0, ta.positive("width_m"), ta.positive("height_m")};
        ta.finish();
        env.D_eff = env.D;
        ta.checked([&] { env = with_taylor_aris(env, geom); });
    } else {
        if (!d_eff) s.fail("missing field 'env.D_eff_m2_per_s' (or 'env.taylor_aris')");
        env.D_eff = *d_eff;
    }
    s.checked([&] { validate(env); });
    s.finish();
    return env;
}

GridSettings parse_grid(Section s) {
    GridSettings g;
    if (s.has("dx_m")) g.dx = s.positive("dx_m");
    if (s.has("cfl")) g.cfl = s.positive("cfl");
    if (s.has("t_max_s")) g.t_max = s.positive("t_max_s");
    if (s.has("sample_dt_s")) g.sample_dt = s.positive("sample_dt_s");
    if (g.cfl > 1.0) s.fail("'grid.cfl' must be <= 1");
    s.finish();
    return g;
}

RectPulse parse_rect(Section s) {
    RectPulse p{s.non_negative("C0_mol_per_m3"), s.positive("T_on_s"), s.opt("t0_s").value_or(0.0)};
    s.checked([&] { validate(p); });
    s.finish();
    return p;
}

GaussPulse parse_gauss(Section s) {
    GaussPulse g{s.non_negative("C0_mol_s_per_m3"), s.req("mu_s"), s.positive("sigma2_s2")};
    s.checked([&] { validate(g); });
    s.finish();
    return g;
}

std::vector<double> parse_list(Section& s, const std::string& key) {
    const YAML::Node n = s.child(key);
    if (!n) s.fail("missing field '" + s.qualified(key) + "'");
    if (!n.IsSequence() || n.size() == 0)
        s.fail(n, "'" + s.qualified(key) + "' must be a non-empty list");
    std::vector<double> out;
    for (const auto& item : n) {
        const double x = s.number(item, s.qualified(key));
        if (x < 0.0) s.fail(item, "'" + s.qualified(key) + "' entries must be >= 0");
        out.push_back(x);
    }
    return out;
}

ChannelStudy parse_channel(Section s) {
    ChannelStudy c;
    Section input = s.sub("input");
    if (input.has("rect") == input.has("gauss"))
        input.fail("'channel.input' needs exactly one of 'rect' or 'gauss'");
    if (input.has("rect")) c.rect = parse_rect(input.sub("rect"));
    if (input.has("gauss")) c.gauss = parse_gauss(input.sub("gauss"));
    input.finish();

    Section rx = s.sub("reaction");
    c.reaction = ReactionSpec{rx.non_negative("k_m3_per_mol_s"), rx.non_negative("C_B0_mol_per_m3")};
    rx.finish();

    c.method = s.choice("method",
                        {{"exact", ChannelMethod::exact},
                         {"appro1", ChannelMethod::appro1},
                         {"appro2", ChannelMethod::appro2}},
                        c.rect ? ChannelMethod::exact : ChannelMethod::appro1);
    if (c.rect && c.method != ChannelMethod::exact)
        s.fail("'channel.method' must be exact for a rectangular input");
    if (c.gauss && c.method == ChannelMethod::exact)
        s.fail("'channel.method' must be appro1 or appro2 for a Gaussian input");
    c.lengths = parse_list(s, "lengths_m");
    s.finish();
    return c;
}

SerpentineSpec parse_serpentine(Section s) {
    SerpentineSpec sp;
    sp.L21 = s.non_negative("L21_m");
    sp.L22 = s.non_negative("L22_m");
    sp.L23 = s.non_negative("L23_m");
    sp.Ls = s.non_negative("Ls_m");
    sp.Hs = s.non_negative("Hs_m");
    const double lines = s.req("delay_lines");
    if (lines != std::floor(lines)) s.fail("'" + s.qualified("delay_lines") + "' must be an integer");
    sp.delay_lines = static_cast<int>(lines);
    s.checked([&] { validate(sp); });
    s.finish();
    return sp;
}

OptimizerTolerances parse_optimizer(Section s) {
    OptimizerTolerances tol;
    if (s.has("zeta")) tol.zeta = s.positive("zeta");
    if (s.has("delta_mol_per_m3_s")) tol.delta = s.positive("delta_mol_per_m3_s");
    if (s.has("epsilon_mol_per_m3")) tol.epsilon = s.positive("epsilon_mol_per_m3");
    if (s.has("tau_mol_per_m3")) tol.tau = s.positive("tau_mol_per_m3");
    if (s.has("dt_s")) tol.dt = s.positive("dt_s");
    tol.peak_time_override = s.opt("peak_time_override_s");
    tol.frame = s.choice("frame",
                         {{"junction_origin", SearchFrame::junction_origin},
                          {"channel", SearchFrame::channel}},
                         SearchFrame::junction_origin);
    s.checked([&] { validate(tol); });
    s.finish();
    return tol;
}

TxSettings parse_tx(Section s) {
    TxSettings tx;
    TransmitterDesign& d = tx.design;
    d.L_Y = s.non_negative("L_Y_m");
    d.L_1 = s.non_negative("L_1_m");
    d.L_3 = s.non_negative("L_3_m");
    d.L_C = s.non_negative("L_C_m");
    const bool has_variants = s.has("variants");
    if (s.has("L_2_m") && s.has("serpentine"))
        s.fail("'tx' takes either 'L_2_m' or 'serpentine', not both");
    if (!has_variants && !s.has("L_2_m") && !s.has("serpentine"))
        s.fail("'tx' needs one of 'L_2_m' or 'serpentine'");
    if (s.has("L_2_m")) d.L_2 = s.non_negative("L_2_m");
    if (s.has("serpentine")) d.serpentine = parse_serpentine(s.sub("serpentine"));
    const bool base_has_l2 = s.has("L_2_m") || s.has("serpentine");
    d.C_Sy0_I = s.non_negative("C_Sy0_I_mol_per_m3");
    d.C_X0_II = s.non_negative("C_X0_II_mol_per_m3");
    d.C_X0_III = s.non_negative("C_X0_III_mol_per_m3");
    d.C_Sp0_IV = s.non_negative("C_Sp0_IV_mol_per_m3");
    d.k = s.non_negative("k_m3_per_mol_s");
    d.T_on = s.positive("T_on_s");
    if (s.has("optimizer")) tx.optimizer = parse_optimizer(s.sub("optimizer"));
    if (const auto g = s.flag("generate_oracle")) tx.generate = *g;
    if (s.has("reaction1_probe_times_s"))
        tx.reaction1_probe_times = parse_list(s, "reaction1_probe_times_s");
    if (has_variants) {
        const YAML::Node list = s.child("variants");
        if (!list.IsSequence() || list.size() == 0)
            s.fail(list, "'tx.variants' must be a non-empty list");
        for (std::size_t i = 0; i < list.size(); ++i) {
            Section vs(list[i], "tx.variants." + std::to_string(i), s.origin());
            TxVariant var{vs.text("label").value_or(""), d, tx.optimizer};
            if (var.label.empty()) vs.fail("missing field 'tx.variants." + std::to_string(i) + ".label'");
            if (vs.has("L_2_m") && vs.has("serpentine"))
                vs.fail("a variant takes either 'L_2_m' or 'serpentine', not both");
            if (!base_has_l2 && !vs.has("L_2_m") && !vs.has("serpentine"))
                vs.fail("variant needs one of 'L_2_m' or 'serpentine'");
            if (vs.has("L_2_m")) var.design.L_2 = vs.non_negative("L_2_m");
            if (vs.has("serpentine")) {
                var.design.L_2.reset();
                var.design.serpentine = parse_serpentine(vs.sub("serpentine"));
            }
            if (vs.has("optimizer")) var.optimizer = parse_optimizer(vs.sub("optimizer"));
            vs.checked([&] { validate(var.design); });
            vs.finish();
            for (const auto& prev : tx.variants)
                if (prev.label == var.label) vs.fail("duplicate variant label '" + var.label + "'");
            tx.variants.push_back(std::move(var));
        }
    } else {
        s.checked([&] { validate(d); });
    }
    s.finish();
    return tx;
}

RxSettings parse_rx(Section s) {
    RxSettings rx;
    ReceiverDesign& d = rx.design;
    d.L_T = s.non_negative("L_T_m");
    d.L_C = s.non_negative("L_C_m");
    d.L_4 = s.non_negative("L_4_m");
    d.L_5 = s.non_negative("L_5_m");
    d.C_ThL_VI = s.non_negative("C_ThL_VI_mol_per_m3");
    d.C_Amp_VII = s.non_negative("C_Amp_VII_mol_per_m3");
    d.k = s.non_negative("k_m3_per_mol_s");
    if (s.has("presence_tau_mol_per_m3")) d.presence_tau = s.positive("presence_tau_mol_per_m3");
    if (s.has("amp_dilution")) d.amp_dilution = s.positive("amp_dilution");
    rx.method = s.choice("method", {{"appro1", Method::appro1}, {"appro2", Method::appro2}},
                         Method::appro1);
    if (s.has("received_pulse")) rx.received_pulse = parse_gauss(s.sub("received_pulse"));
    if (s.has("quadrature")) {
        Section q = s.sub("quadrature");
        if (q.has("tol_mol_per_m3")) rx.quadrature.tol = q.positive("tol_mol_per_m3");
        if (q.has("decay_ratio")) rx.quadrature.decay_ratio = q.positive("decay_ratio");
        if (q.has("omega_max_rad_per_s")) rx.quadrature.omega_max = q.positive("omega_max_rad_per_s");
        q.finish();
    }
    s.checked([&] { validate(d); });
    s.finish();
    return rx;
}

std::vector<Bit> parse_bits(Section& root) {
    std::vector<Bit> bits;
    const YAML::Node n = root.child("bit_stream");
    if (!n) return bits;
    if (!n.IsSequence()) root.fail(n, "'bit_stream' must be a list");
    for (std::size_t i = 0; i < n.size(); ++i) {
        Section b(n[i], "bit_stream." + std::to_string(i), root.origin());
        Bit bit{b.non_negative("onset_s"), b.positive("T_on_s")};
        b.finish();
        if (!bits.empty() && !(bit.onset > bits.back().onset))
            b.fail("bit onsets must be strictly increasing");
        bits.push_back(bit);
    }
    return bits;
}

std::vector<std::string> parse_outputs(Section s) {
    std::vector<std::string> probes;
    if (const auto fmt = s.text("format"); fmt && *fmt != "csv")
        s.fail("'outputs.format' must be csv");
    const YAML::Node n = s.child("probes");
    if (n) {
        if (!n.IsSequence()) s.fail(n, "'outputs.probes' must be a list of names");
        for (const auto& item : n) {
            if (!item.IsScalar()) s.fail(item, "'outputs.probes' entries must be names");
            probes.push_back(item.Scalar());
        }
    }
    s.finish();
    return probes;
}

void apply_override(YAML::Node root, const Override& ov, const std::string& origin) {
    if (ov.path.empty()) throw ScenarioError(origin, 0, 0, "empty parameter path");
    YAML::Node cur;
    cur.reset(root);  // Node assignment writes through; reset rebinds
    std::string walked;
    std::size_t start = 0;
    while (true) {
        const auto dot = ov.path.find('.', start);
        const std::string part = ov.path.substr(start, dot == std::string::npos ? dot : dot - start);
        walked += walked.empty() ? part : "." + part;
        YAML::Node next;
        if (cur.IsSequence()) {
            std::size_t idx{};
            try {
                std::size_t used{};
                idx = std::stoul(part, &used);
                if (used != part.size()) throw std::invalid_argument(part);
            } catch (const std::exception&) {
                throw ScenarioError(origin, cur.Mark().line + 1, cur.Mark().column + 1,
                                    "parameter path '" + walked + "' needs a list index");
            }
            if (idx >= cur.size())
                throw ScenarioError(origin, cur.Mark().line + 1, cur.Mark().column + 1,
                                    "parameter path '" + walked + "' is out of range");
            next = cur[idx];
        } else if (cur.IsMap() && cur[part]) {
            next = cur[part];
        } else {
            throw ScenarioError(origin, cur.Mark().line + 1, cur.Mark().column + 1,
                                "parameter path '" + walked + "' does not exist");
        }
        cur.reset(next);
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    if (!cur.IsScalar())
        throw ScenarioError(origin, cur.Mark().line + 1, cur.Mark().column + 1,
                            "parameter path '" + ov.path + "' does not address a scalar field");
    cur = ov.value;
}

}  // namespace

ScenarioError::ScenarioError(const std::string& origin, int line, int column, const std::string& msg)
    : std::invalid_argument(anchored(origin, line, column, msg)), line_(line), column_(column) {}

Scenario parse_scenario_text(const std::string& text, const std::string& origin,
                             const std::vector<Override>& overrides) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ScenarioError(origin, e.mark.line + 1, e.mark.column + 1, e.msg);
    }
    if (!root || root.IsNull()) throw ScenarioError(origin, 1, 1, "empty scenario document");
    for (const auto& ov : overrides) apply_override(root, ov, origin);

    Scenario sc;
    sc.origin = origin;
    sc.source_text = text;
    Section s(root, "", origin);
    if (const auto version = s.opt("schema_version"); version && *version != 1.0)
        s.fail(root["schema_version"], "unsupported 'schema_version' (expected 1)");
    const auto name = s.text("name");
    if (!name || name->empty()) s.fail("missing field 'name'");
    sc.name = *name;
    for (const char c : sc.name)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'))
            s.fail(root["name"], "'name' may contain only letters, digits, '_' and '-'");

    sc.env = parse_env(s.sub("env"));
    if (s.has("grid")) sc.grid = parse_grid(s.sub("grid"));
    if (s.has("channel")) sc.channel = parse_channel(s.sub("channel"));
    if (s.has("tx")) sc.tx = parse_tx(s.sub("tx"));
    if (s.has("rx")) sc.rx = parse_rx(s.sub("rx"));
    if (sc.tx && sc.rx && !sc.tx->variants.empty())
        s.fail(root["tx"], "'tx.variants' cannot be combined with an 'rx' section");
    if (s.has("channel_length_m")) {
        sc.channel_length = s.non_negative("channel_length_m");
        if (!(sc.tx && sc.rx)) s.fail(root["channel_length_m"], "'channel_length_m' needs both 'tx' and 'rx'");
    }
    sc.bits = parse_bits(s);
    if (s.has("outputs")) sc.probes = parse_outputs(s.sub("outputs"));

    if (!sc.tx && !sc.rx && !sc.channel)
        s.fail("scenario needs at least one of 'tx', 'rx' or 'channel'");
    if (sc.rx && !sc.tx && !sc.rx->received_pulse)
        s.fail(root["rx"], "'rx.received_pulse' is required when no 'tx' section is present");
    s.finish();
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path, const std::vector<Override>& overrides) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError(path.string(), 0, 0, "cannot open scenario file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str(), path.string(), overrides);
}

}  // namespace mclink
