#include "nppsim/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace nppsim::config {

using nlohmann::json;

coverage::GeoBoundingBox RobotSpec::box() const {
    return coverage::GeoBoundingBox(coverage::GeoPoint(sw_lat, sw_lon), coverage::GeoPoint(ne_lat, ne_lon));
}

void SimConfig::validate() const {
    if (plants.empty()) throw ConfigError("config: need at least one plant");
    if (sessions < 1) throw ConfigError("config: need at least one session");
    if (qkd.n_qubits < 64) throw ConfigError("config: qkd.n_qubits must be at least 64");
    if (qkd.abort_threshold < 0.0 || qkd.abort_threshold > 1.0)
        throw ConfigError("config: qkd.abort_threshold must be in [0, 1]");
    if (qkd.eve_fraction < 0.0 || qkd.eve_fraction > 1.0)
        throw ConfigError("config: qkd.eve_fraction must be in [0, 1]");
    if (qkd.max_attempts < 1) throw ConfigError("config: qkd.max_attempts must be positive");
    if (learning.test_fraction < 0.0 || learning.test_fraction >= 1.0)
        throw ConfigError("config: learning.test_fraction must be in [0, 1)");
    if (network.report_drop_prob < 0.0 || network.report_drop_prob >= 1.0)
        throw ConfigError("config: network.report_drop_prob must be in [0, 1)");

    std::set<std::uint32_t> plant_ids;
    for (const PlantSpec& plant : plants) {
        if (!plant_ids.insert(plant.plant_id).second)
            throw ConfigError("config: duplicate plant id");
        if (plant.robots.empty()) throw ConfigError("config: each plant needs at least one robot");
        if (plant.scenario.class_mix.empty())
            throw ConfigError("config: scenario class mix must not be empty");
        std::set<std::uint32_t> robot_ids;
        for (const RobotSpec& r : plant.robots) {
            if (!robot_ids.insert(r.robot_id).second)
                throw ConfigError("config: duplicate robot id within a plant");
            coverage::LocalFrame frame;
            try {
                frame = coverage::LocalFrame::from_box(r.box());
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("config: bad robot box: ") + e.what());
            }
            if (r.strip_width_m <= 0.0 || r.strip_width_m > frame.width_m)
                throw ConfigError("config: strip width must be positive and fit the box");
            if (r.speed_mps <= 0.0 || r.cadence_hz <= 0.0)
                throw ConfigError("config: robot speed and cadence must be positive");
            if (r.dock.x < 0.0 || r.dock.x > frame.width_m || r.dock.y < 0.0 || r.dock.y > frame.length_m)
                throw ConfigError("config: dock must lie inside the robot's box");
            if (r.battery.charge_rate <= 0.0 || r.battery.drain_per_meter <= 0.0 ||
                r.battery.drain_per_second <= 0.0)
                throw ConfigError("config: battery rates must be positive");
        }
    }
}

SimConfig default_config() {
    SimConfig cfg;
    cfg.seed = 42;
    cfg.sessions = 30;

    // Two plants, four 30 m boxes per plant laid out east to west with a
    // 6 m corridor between them.
    const double kBoxM = 30.0;
    const double kGapM = 2.0;
    const double base_lats[2] = {40.100, 40.300};
    const double base_lons[2] = {-74.100, -74.300};
    for (std::uint32_t p = 0; p < 2; ++p) {
        PlantSpec plant;
        plant.plant_id = p + 1;
        for (std::uint32_t r = 0; r < 4; ++r) {
            RobotSpec spec;
            spec.robot_id = p * 4 + r + 1;
            const coverage::GeoPoint sw(base_lats[p], base_lons[p]);
            const coverage::LocalFrame anchor{sw, 0.0, 0.0};
            const double x0 = static_cast<double>(r) * (kBoxM + kGapM);
            const auto swp = anchor.to_geo(x0, 0.0);
            const auto nep = anchor.to_geo(x0 + kBoxM, kBoxM);
            spec.sw_lat = swp.lat;
            spec.sw_lon = swp.lon;
            spec.ne_lat = nep.lat;
            spec.ne_lon = nep.lon;
            plant.robots.push_back(spec);
        }
        cfg.plants.push_back(plant);
    }
    return cfg;
}

namespace {

envsim::GasVector gas_from_json(const json& j, envsim::GasVector fallback) {
    envsim::GasVector g = fallback;
    g.co2_ppm = j.value("co2_ppm", g.co2_ppm);
    g.co_ppm = j.value("co_ppm", g.co_ppm);
    g.ch4_ppm = j.value("ch4_ppm", g.ch4_ppm);
    return g;
}

json gas_to_json(const envsim::GasVector& g) {
    return json{{"co2_ppm", g.co2_ppm}, {"co_ppm", g.co_ppm}, {"ch4_ppm", g.ch4_ppm}};
}

envsim::Range range_from_json(const json& j, envsim::Range fallback) {
    if (!j.is_array() || j.size() != 2) throw ConfigError("config: range must be [lo, hi]");
    return {j[0].get<double>(), j[1].get<double>()};
    (void)fallback;
}

json range_to_json(envsim::Range r) { return json::array({r.lo, r.hi}); }

}  // namespace

SimConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }

    SimConfig cfg = default_config();
    try {
        cfg.seed = j.value("seed", cfg.seed);
        cfg.sessions = j.value("sessions", cfg.sessions);
        cfg.output_dir = j.value("output_dir", cfg.output_dir);

        if (j.contains("qkd")) {
            const json& q = j["qkd"];
            cfg.qkd.n_qubits = q.value("n_qubits", cfg.qkd.n_qubits);
            cfg.qkd.eve_fraction = q.value("eve_fraction", cfg.qkd.eve_fraction);
            cfg.qkd.channel_flip_prob = q.value("channel_flip_prob", cfg.qkd.channel_flip_prob);
            cfg.qkd.abort_threshold = q.value("abort_threshold", cfg.qkd.abort_threshold);
            cfg.qkd.latency_s = q.value("latency_s", cfg.qkd.latency_s);
            cfg.qkd.max_attempts = q.value("max_attempts", cfg.qkd.max_attempts);
            const std::string mode = q.value("key_mode", std::string("otp"));
            if (mode == "otp") cfg.qkd.key_mode = KeyMode::Otp;
            else if (mode == "derive-chacha") cfg.qkd.key_mode = KeyMode::DeriveChaCha;
            else throw ConfigError("config: key_mode must be 'otp' or 'derive-chacha'");
        }
        if (j.contains("learning")) {
            const json& l = j["learning"];
            cfg.learning.train.learning_rate = l.value("learning_rate", cfg.learning.train.learning_rate);
            cfg.learning.train.epochs = l.value("epochs", cfg.learning.train.epochs);
            cfg.learning.train.batch_size = l.value("batch_size", cfg.learning.train.batch_size);
            cfg.learning.test_fraction = l.value("test_fraction", cfg.learning.test_fraction);
            if (l.contains("feature_mean"))
                cfg.learning.scaler.mean = gas_from_json(l["feature_mean"], cfg.learning.scaler.mean);
            if (l.contains("feature_sd"))
                cfg.learning.scaler.sd = gas_from_json(l["feature_sd"], cfg.learning.scaler.sd);
        }
        if (j.contains("thresholds")) {
            const json& t = j["thresholds"];
            cfg.thresholds.static_thresholds = gas_from_json(t, cfg.thresholds.static_thresholds);
            cfg.thresholds.collective = t.value("collective", cfg.thresholds.collective);
            cfg.thresholds.collective_sd_multiplier =
                t.value("collective_sd_multiplier", cfg.thresholds.collective_sd_multiplier);
        }
        if (j.contains("network")) {
            const json& n = j["network"];
            cfg.network.report_latency_s = n.value("report_latency_s", cfg.network.report_latency_s);
            cfg.network.ack_timeout_s = n.value("ack_timeout_s", cfg.network.ack_timeout_s);
            cfg.network.report_drop_prob = n.value("report_drop_prob", cfg.network.report_drop_prob);
        }
        if (j.contains("plants")) {
            cfg.plants.clear();
            for (const json& pj : j["plants"]) {
                PlantSpec plant;
                plant.plant_id = pj.at("plant_id").get<std::uint32_t>();
                if (pj.contains("scenario")) {
                    const json& s = pj["scenario"];
                    ScenarioParams& sc = plant.scenario;
                    sc.min_hotspots = s.value("min_hotspots", sc.min_hotspots);
                    sc.max_hotspots = s.value("max_hotspots", sc.max_hotspots);
                    if (s.contains("radius_m")) sc.radius_m = range_from_json(s["radius_m"], sc.radius_m);
                    if (s.contains("onset_s")) sc.onset_s = range_from_json(s["onset_s"], sc.onset_s);
                    if (s.contains("co2_amplitude_ppm"))
                        sc.co2_amplitude_ppm = range_from_json(s["co2_amplitude_ppm"], sc.co2_amplitude_ppm);
                    if (s.contains("co_amplitude_ppm"))
                        sc.co_amplitude_ppm = range_from_json(s["co_amplitude_ppm"], sc.co_amplitude_ppm);
                    if (s.contains("ch4_amplitude_ppm"))
                        sc.ch4_amplitude_ppm = range_from_json(s["ch4_amplitude_ppm"], sc.ch4_amplitude_ppm);
                    if (s.contains("class_mix")) {
                        sc.class_mix.clear();
                        for (const json& c : s["class_mix"])
                            sc.class_mix.push_back(envsim::class_from_name(c.get<std::string>()));
                    }
                    if (s.contains("background")) sc.background = gas_from_json(s["background"], sc.background);
                    if (s.contains("noise_sd")) sc.noise_sd = gas_from_json(s["noise_sd"], sc.noise_sd);
                }
                for (const json& rj : pj.at("robots")) {
                    RobotSpec r;
                    r.robot_id = rj.at("robot_id").get<std::uint32_t>();
                    const json& box = rj.at("box");
                    r.sw_lat = box.at("south_west").at(0).get<double>();
                    r.sw_lon = box.at("south_west").at(1).get<double>();
                    r.ne_lat = box.at("north_east").at(0).get<double>();
                    r.ne_lon = box.at("north_east").at(1).get<double>();
                    if (rj.contains("dock_xy_m")) {
                        r.dock.x = rj["dock_xy_m"].at(0).get<double>();
                        r.dock.y = rj["dock_xy_m"].at(1).get<double>();
                    }
                    r.speed_mps = rj.value("speed_mps", r.speed_mps);
                    r.cadence_hz = rj.value("cadence_hz", r.cadence_hz);
                    r.strip_width_m = rj.value("strip_width_m", r.strip_width_m);
                    const std::string orient = rj.value("orientation", std::string("vertical"));
                    if (orient == "vertical") r.orientation = coverage::Orientation::Vertical;
                    else if (orient == "horizontal") r.orientation = coverage::Orientation::Horizontal;
                    else throw ConfigError("config: orientation must be 'vertical' or 'horizontal'");
                    if (rj.contains("battery")) {
                        const json& b = rj["battery"];
                        r.battery.level = b.value("level", r.battery.level);
                        r.battery.drain_per_meter = b.value("drain_per_meter", r.battery.drain_per_meter);
                        r.battery.drain_per_second = b.value("drain_per_second", r.battery.drain_per_second);
                        r.battery.charge_rate = b.value("charge_rate", r.battery.charge_rate);
                    }
                    r.train_rate_samples_per_s = rj.value("train_rate_samples_per_s", r.train_rate_samples_per_s);
                    if (rj.contains("thresholds"))
                        r.thresholds = gas_from_json(rj["thresholds"], cfg.thresholds.static_thresholds);
                    plant.robots.push_back(r);
                }
                cfg.plants.push_back(plant);
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    cfg.validate();
    return cfg;
}

SimConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

std::string config_to_json(const SimConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    j["sessions"] = cfg.sessions;
    j["output_dir"] = cfg.output_dir;
    j["qkd"] = {{"n_qubits", cfg.qkd.n_qubits},
                {"eve_fraction", cfg.qkd.eve_fraction},
                {"channel_flip_prob", cfg.qkd.channel_flip_prob},
                {"abort_threshold", cfg.qkd.abort_threshold},
                {"key_mode", cfg.qkd.key_mode == KeyMode::Otp ? "otp" : "derive-chacha"},
                {"latency_s", cfg.qkd.latency_s},
                {"max_attempts", cfg.qkd.max_attempts}};
    j["learning"] = {{"learning_rate", cfg.learning.train.learning_rate},
                     {"epochs", cfg.learning.train.epochs},
                     {"batch_size", cfg.learning.train.batch_size},
                     {"test_fraction", cfg.learning.test_fraction},
                     {"feature_mean", gas_to_json(cfg.learning.scaler.mean)},
                     {"feature_sd", gas_to_json(cfg.learning.scaler.sd)}};
    j["thresholds"] = gas_to_json(cfg.thresholds.static_thresholds);
    j["thresholds"]["collective"] = cfg.thresholds.collective;
    j["thresholds"]["collective_sd_multiplier"] = cfg.thresholds.collective_sd_multiplier;
    j["network"] = {{"report_latency_s", cfg.network.report_latency_s},
                    {"ack_timeout_s", cfg.network.ack_timeout_s},
                    {"report_drop_prob", cfg.network.report_drop_prob}};
    j["plants"] = json::array();
    for (const PlantSpec& plant : cfg.plants) {
        json pj;
        pj["plant_id"] = plant.plant_id;
        const ScenarioParams& sc = plant.scenario;
        json mix = json::array();
        for (auto c : sc.class_mix) mix.push_back(envsim::class_name(c));
        pj["scenario"] = {{"min_hotspots", sc.min_hotspots},
                          {"max_hotspots", sc.max_hotspots},
                          {"radius_m", range_to_json(sc.radius_m)},
                          {"onset_s", range_to_json(sc.onset_s)},
                          {"co2_amplitude_ppm", range_to_json(sc.co2_amplitude_ppm)},
                          {"co_amplitude_ppm", range_to_json(sc.co_amplitude_ppm)},
                          {"ch4_amplitude_ppm", range_to_json(sc.ch4_amplitude_ppm)},
                          {"class_mix", mix},
                          {"background", gas_to_json(sc.background)},
                          {"noise_sd", gas_to_json(sc.noise_sd)}};
        pj["robots"] = json::array();
        for (const RobotSpec& r : plant.robots) {
            json rj;
            rj["robot_id"] = r.robot_id;
            rj["box"] = {{"south_west", json::array({r.sw_lat, r.sw_lon})},
                         {"north_east", json::array({r.ne_lat, r.ne_lon})}};
            rj["dock_xy_m"] = json::array({r.dock.x, r.dock.y});
            rj["speed_mps"] = r.speed_mps;
            rj["cadence_hz"] = r.cadence_hz;
            rj["strip_width_m"] = r.strip_width_m;
            rj["orientation"] = r.orientation == coverage::Orientation::Vertical ? "vertical" : "horizontal";
            rj["battery"] = {{"level", r.battery.level},
                             {"drain_per_meter", r.battery.drain_per_meter},
                             {"drain_per_second", r.battery.drain_per_second},
                             {"charge_rate", r.battery.charge_rate}};
            rj["train_rate_samples_per_s"] = r.train_rate_samples_per_s;
            if (r.thresholds.has_value()) rj["thresholds"] = gas_to_json(*r.thresholds);
            pj["robots"].push_back(rj);
        }
        j["plants"].push_back(pj);
    }
    return j.dump(2) + "\n";
}

}  // namespace nppsim::config
