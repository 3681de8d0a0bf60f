#include "tsmrc/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace tsmrc {

std::string format_double(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

ConfigFile ConfigFile::parse(std::istream& is) {
    ConfigFile cfg;
    std::string line, section;
    while (std::getline(is, line)) {
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config parse error: expected key=value, got '" + line + "'");
        cfg.sections[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return cfg;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file: " + path);
    return parse(f);
}

bool ConfigFile::has(const std::string& s, const std::string& k) const {
    const auto it = sections.find(s);
    return it != sections.end() && it->second.count(k) > 0;
}

double ConfigFile::number(const std::string& s, const std::string& k, double fallback) const {
    if (!has(s, k)) return fallback;
    return std::stod(sections.at(s).at(k));
}

int ConfigFile::integer(const std::string& s, const std::string& k, int fallback) const {
    if (!has(s, k)) return fallback;
    return std::stoi(sections.at(s).at(k));
}

std::string ConfigFile::text(const std::string& s, const std::string& k,
                             const std::string& fallback) const {
    if (!has(s, k)) return fallback;
    return sections.at(s).at(k);
}

RunConfig RunConfig::defaults() {
    RunConfig rc;
    rc.speed_spec.alpha_min = 0.10;
    rc.speed_spec.alpha_max = 1.00;
    rc.speed_spec.theta = 1.51;
    rc.speed_spec.gamma = 3.00;
    rc.speed_spec.tau = Eigen::VectorXd::Constant(1, 10.0);
    rc.torque_spec.alpha_min = 0.20;
    rc.torque_spec.alpha_max = 2.00;
    rc.torque_spec.theta = 1.51;
    rc.torque_spec.gamma = 1.50;
    rc.torque_spec.tau.resize(2);
    rc.torque_spec.tau << 4.0, 0.30;
    rc.scenarios = {{Scenario::Turbulent, 12.0, "12"},
                    {Scenario::Turbulent, 14.0, "14"},
                    {Scenario::Turbulent, 16.0, "16"},
                    {Scenario::Turbulent, 18.0, "18"},
                    {Scenario::Gust, 12.0, "12"},
                    {Scenario::Gust, 14.0, "14"},
                    {Scenario::Gust, 16.0, "16"},
                    {Scenario::Gust, 18.0, "18"},
                    {Scenario::Frt, 16.0, "16"},
                    {Scenario::Simultaneous, 16.0, "16"}};
    return rc;
}

static const std::map<std::string, double TurbineParams::*>& param_fields() {
    static const std::map<std::string, double TurbineParams::*> fields = {
        {"rated_electrical_power", &TurbineParams::rated_electrical_power},
        {"generator_efficiency", &TurbineParams::generator_efficiency},
        {"rated_generator_torque", &TurbineParams::rated_generator_torque},
        {"rated_generator_speed", &TurbineParams::rated_generator_speed},
        {"rated_mechanical_power", &TurbineParams::rated_mechanical_power},
        {"v_cut_in", &TurbineParams::v_cut_in},
        {"v_rated", &TurbineParams::v_rated},
        {"v_cut_out", &TurbineParams::v_cut_out},
        {"rated_rotor_speed", &TurbineParams::rated_rotor_speed},
        {"gear_ratio", &TurbineParams::gear_ratio},
        {"rotor_radius", &TurbineParams::rotor_radius},
        {"inertia_rotor", &TurbineParams::inertia_rotor},
        {"inertia_generator", &TurbineParams::inertia_generator},
        {"shaft_stiffness", &TurbineParams::shaft_stiffness},
        {"shaft_damping", &TurbineParams::shaft_damping},
        {"max_generator_torque", &TurbineParams::max_generator_torque},
        {"max_torque_rate", &TurbineParams::max_torque_rate},
        {"max_pitch_rate", &TurbineParams::max_pitch_rate},
        {"cp_opt", &TurbineParams::cp_opt},
        {"lambda_opt", &TurbineParams::lambda_opt},
        {"air_density", &TurbineParams::air_density},
    };
    return fields;
}

TurbineParams load_turbine_params(std::istream& is, TurbineParams base) {
    const ConfigFile cfg = ConfigFile::parse(is);
    for (const auto& section : {std::string(""), std::string("turbine")}) {
        const auto it = cfg.sections.find(section);
        if (it == cfg.sections.end()) continue;
        for (const auto& [key, value] : it->second) {
            const auto f = param_fields().find(key);
            if (f == param_fields().end())
                throw std::runtime_error("unknown turbine parameter: " + key);
            base.*(f->second) = std::stod(value);
        }
    }
    base.validate();
    return base;
}

void apply_turbine_overrides(const ConfigFile& cfg, TurbineParams& params) {
    const auto it = cfg.sections.find("turbine");
    if (it == cfg.sections.end()) return;
    for (const auto& [key, value] : it->second) {
        const auto f = param_fields().find(key);
        if (f == param_fields().end()) throw std::runtime_error("unknown turbine parameter: " + key);
        params.*(f->second) = std::stod(value);
    }
    params.validate();
}

RunConfig RunConfig::from_config(const ConfigFile& cfg) {
    RunConfig rc = defaults();
    apply_turbine_overrides(cfg, rc.params);
    rc.grid_lo = cfg.number("grid", "v_lo", rc.grid_lo);
    rc.grid_hi = cfg.number("grid", "v_hi", rc.grid_hi);
    rc.grid_n = cfg.integer("grid", "n_points", rc.grid_n);
    auto read_spec = [&](const std::string& sec, SynthesisSpec& s) {
        s.alpha_min = cfg.number(sec, "alpha_min", s.alpha_min);
        s.alpha_max = cfg.number(sec, "alpha_max", s.alpha_max);
        s.theta = cfg.number(sec, "theta", s.theta);
        s.gamma = cfg.number(sec, "gamma", s.gamma);
        s.fixed_gamma = cfg.integer(sec, "fixed_gamma", s.fixed_gamma ? 1 : 0) != 0;
    };
    read_spec("speed_spec", rc.speed_spec);
    rc.speed_spec.tau(0) = cfg.number("speed_spec", "tau_omega", rc.speed_spec.tau(0));
    read_spec("torque_spec", rc.torque_spec);
    rc.torque_spec.tau(0) = cfg.number("torque_spec", "tau_omega", rc.torque_spec.tau(0));
    rc.torque_spec.tau(1) = cfg.number("torque_spec", "tau_torque", rc.torque_spec.tau(1));
    rc.refine = cfg.integer("synthesis", "refine", rc.refine ? 1 : 0) != 0;
    rc.seed = static_cast<std::uint64_t>(cfg.integer("simulation", "seed", static_cast<int>(rc.seed)));
    rc.sim.dt = cfg.number("simulation", "dt", rc.sim.dt);
    rc.sim.tau_z = cfg.number("simulation", "tau_z", rc.sim.tau_z);
    rc.sim.tau_act = cfg.number("simulation", "tau_act", rc.sim.tau_act);
    rc.sim.tau_ref_torque_frt = cfg.number("simulation", "tau_ref_torque_frt", rc.sim.tau_ref_torque_frt);
    rc.sim.wind.intensity = cfg.number("simulation", "turbulence_intensity", rc.sim.wind.intensity);
    rc.sim.anti_windup_tau = cfg.number("simulation", "anti_windup_tau", rc.sim.anti_windup_tau);

    if (cfg.sections.count("scenarios")) {
        rc.scenarios.clear();
        const auto list = cfg.text("scenarios", "list", "");
        std::stringstream ss(list);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            ScenarioRequest req;
            const auto colon = item.find(':');
            const std::string name = item.substr(0, colon);
            if (colon != std::string::npos) {
                req.label = item.substr(colon + 1);
                req.wind_value = std::stod(req.label);
            }
            if (name == "constant") req.scenario = Scenario::Constant;
            else if (name == "turbulent") req.scenario = Scenario::Turbulent;
            else if (name == "gust") req.scenario = Scenario::Gust;
            else if (name == "frt") req.scenario = Scenario::Frt;
            else if (name == "simultaneous") req.scenario = Scenario::Simultaneous;
            else throw std::runtime_error("unknown scenario: " + name);
            if (req.label.empty()) req.label = format_double(req.wind_value);
            rc.scenarios.push_back(req);
        }
    }
    return rc;
}

void save_gains(const GainsFile& g, std::ostream& os) {
    const std::size_t nr = g.schedule.K.size();
    if (nr != g.schedule.grid.size() || nr != g.beta0.size())
        throw std::invalid_argument("save_gains: inconsistent schedule");
    const auto& K0 = g.schedule.K.front();
    os << "tsmrc-gains 1\n";
    os << "model " << (g.schedule.model == PlantModel::OneDof ? "1dof" : "4state") << "\n";
    os << "combined " << (g.schedule.combined ? 1 : 0) << "\n";
    os << "tau_ref " << format_double(g.tau_ref_speed) << " " << format_double(g.tau_ref_torque)
       << "\n";
    os << "nodes " << nr << " rows " << K0.rows() << " cols " << K0.cols() << "\n";
    for (std::size_t j = 0; j < nr; ++j) {
        os << "node " << format_double(g.schedule.grid.nodes[j]) << " beta0 "
           << format_double(g.beta0[j]) << "\n";
        const auto& K = g.schedule.K[j];
        for (Eigen::Index r = 0; r < K.rows(); ++r) {
            for (Eigen::Index c = 0; c < K.cols(); ++c)
                os << (c ? " " : "") << format_double(K(r, c));
            os << "\n";
        }
    }
}

GainsFile load_gains(std::istream& is) {
    auto expect = [&](const std::string& tag) {
        std::string s;
        if (!(is >> s) || s != tag)
            throw std::runtime_error("gains file parse error: expected '" + tag + "'");
    };
    GainsFile g;
    expect("tsmrc-gains");
    int version;
    is >> version;
    expect("model");
    std::string model;
    is >> model;
    g.schedule.model = (model == "1dof") ? PlantModel::OneDof : PlantModel::FourState;
    expect("combined");
    int combined;
    is >> combined;
    g.schedule.combined = combined != 0;
    expect("tau_ref");
    is >> g.tau_ref_speed >> g.tau_ref_torque;
    expect("nodes");
    std::size_t nr;
    is >> nr;
    expect("rows");
    Eigen::Index rows;
    is >> rows;
    expect("cols");
    Eigen::Index cols;
    is >> cols;
    for (std::size_t j = 0; j < nr; ++j) {
        expect("node");
        double node;
        is >> node;
        expect("beta0");
        double b0;
        is >> b0;
        g.schedule.grid.nodes.push_back(node);
        g.beta0.push_back(b0);
        Eigen::MatrixXd K(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c)
                if (!(is >> K(r, c))) throw std::runtime_error("gains file parse error: matrix data");
        g.schedule.K.push_back(std::move(K));
    }
    Eigen::VectorXd tau(2);
    tau << g.tau_ref_speed, g.tau_ref_torque;
    if (g.schedule.model == PlantModel::OneDof)
        g.schedule.ref = build_reference_model(ReferenceKind::SpeedOnly, tau.head(1));
    else
        g.schedule.ref = build_reference_model(ReferenceKind::SpeedAndTorque, tau);
    return g;
}

void save_gains_file(const GainsFile& g, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write gains file: " + path);
    save_gains(g, f);
}

GainsFile load_gains_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open gains file: " + path);
    return load_gains(f);
}

void save_submodels(const std::vector<TsSubmodel>& subs, std::ostream& os) {
    os << "tsmrc-submodels 1\n";
    os << "count " << subs.size() << "\n";
    auto write_mat = [&os](const char* name, const Eigen::MatrixXd& M) {
        os << name << " " << M.rows() << " " << M.cols() << "\n";
        for (Eigen::Index r = 0; r < M.rows(); ++r) {
            for (Eigen::Index c = 0; c < M.cols(); ++c) os << (c ? " " : "") << format_double(M(r, c));
            os << "\n";
        }
    };
    for (const auto& s : subs) {
        os << "submodel " << s.point.index << " v0 " << format_double(s.point.v0) << "\n";
        write_mat("x0", s.point.x0);
        write_mat("u0", s.point.u0);
        write_mat("A", s.A);
        write_mat("B", s.B);
        write_mat("Bd", s.Bd);
        write_mat("C", s.C);
        write_mat("a", s.a);
    }
}

std::vector<TsSubmodel> load_submodels(std::istream& is) {
    auto expect = [&](const std::string& tag) {
        std::string s;
        if (!(is >> s) || s != tag)
            throw std::runtime_error("submodel file parse error: expected '" + tag + "'");
    };
    expect("tsmrc-submodels");
    int version;
    is >> version;
    expect("count");
    std::size_t n;
    is >> n;
    auto read_mat = [&](const char* name) {
        expect(name);
        Eigen::Index r, c;
        is >> r >> c;
        Eigen::MatrixXd M(r, c);
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = 0; j < c; ++j) is >> M(i, j);
        return M;
    };
    std::vector<TsSubmodel> subs;
    for (std::size_t k = 0; k < n; ++k) {
        expect("submodel");
        TsSubmodel s;
        is >> s.point.index;
        expect("v0");
        is >> s.point.v0;
        s.point.x0 = read_mat("x0");
        s.point.u0 = read_mat("u0");
        s.A = read_mat("A");
        s.B = read_mat("B");
        s.Bd = read_mat("Bd");
        s.C = read_mat("C");
        s.a = read_mat("a");
        s.E = Eigen::MatrixXd::Zero(s.A.rows(), s.C.rows());
        s.F = Eigen::MatrixXd::Zero(s.C.rows(), s.C.rows());
        s.c = -s.C * s.point.x0;
        subs.push_back(std::move(s));
    }
    return subs;
}

void write_trace_csv(const SimTrace& tr, std::ostream& os) {
    os << tr.meta << "\n";
    os << "t,v,z,omega_r,omega_g,dtheta,T_g,beta,T_g_d,omega_r_ref,T_g_ref,eps_omega,eps_T,P_g\n";
    for (std::size_t k = 0; k < tr.size(); ++k) {
        os << format_double(tr.t[k]) << ',' << format_double(tr.v[k]) << ','
           << format_double(tr.z[k]) << ',' << format_double(tr.omega_r[k]) << ','
           << format_double(tr.omega_g[k]) << ',' << format_double(tr.dtheta[k]) << ','
           << format_double(tr.T_g[k]) << ',' << format_double(tr.beta[k]) << ','
           << format_double(tr.T_g_d[k]) << ',' << format_double(tr.omega_r_ref[k]) << ','
           << format_double(tr.T_g_ref[k]) << ',' << format_double(tr.eps_omega[k]) << ','
           << format_double(tr.eps_T[k]) << ',' << format_double(tr.P_g[k]) << '\n';
    }
}

void write_trace_csv_file(const SimTrace& trace, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write trace file: " + path);
    write_trace_csv(trace, f);
}

}  // namespace tsmrc
