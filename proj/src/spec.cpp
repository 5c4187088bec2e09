#include "irsim/spec.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace irsim {

using nlohmann::json;

namespace {

json range(double lo, double hi) { return json::array({lo, hi}); }

json target_config_to_json(const TargetConfig& c) {
    json j;
    j["axis"] = range(c.axis_min, c.axis_max);
    j["sigma"] = range(c.sigma_min, c.sigma_max);
    j["keys"] = json::array({c.keys_min, c.keys_max});
    j["swerves"] = json::array({c.swerves_min, c.swerves_max});
    j["scr"] = range(c.scr_min, c.scr_max);
    j["accel_amplitude"] = c.accel_amplitude;
    j["speed"] = range(c.speed_min, c.speed_max);
    j["curve_order"] = range(c.curve_order_min, c.curve_order_max);
    j["smooth_window"] = c.smooth_window;
    j["start_margin"] = c.start_margin;
    if (c.has_fixed_appearance)
        j["fixed_appearance"] = {{"h", c.fixed_appearance.h},
                                 {"w", c.fixed_appearance.w},
                                 {"sigma", c.fixed_appearance.sigma}};
    if (c.has_fixed_scr) j["fixed_scr"] = c.fixed_scr;
    if (c.has_fixed_swerves) j["fixed_swerves"] = c.fixed_swerves;
    if (c.has_fixed_position) j["fixed_position"] = json::array({c.fixed_position.x, c.fixed_position.y});
    if (c.zero_accel) j["zero_accel"] = true;
    return j;
}

void pair_from(const json& j, const char* key, double* lo, double* hi) {
    if (!j.contains(key)) return;
    const auto& a = j.at(key);
    if (!a.is_array() || a.size() != 2) throw std::invalid_argument(std::string("spec: ") + key + " must be [lo, hi]");
    *lo = a[0].get<double>();
    *hi = a[1].get<double>();
}

void ipair_from(const json& j, const char* key, int* lo, int* hi) {
    if (!j.contains(key)) return;
    const auto& a = j.at(key);
    if (!a.is_array() || a.size() != 2) throw std::invalid_argument(std::string("spec: ") + key + " must be [lo, hi]");
    *lo = a[0].get<int>();
    *hi = a[1].get<int>();
}

TargetConfig target_config_from_json(const json& j, const TargetConfig& base) {
    TargetConfig c = base;
    pair_from(j, "axis", &c.axis_min, &c.axis_max);
    pair_from(j, "sigma", &c.sigma_min, &c.sigma_max);
    ipair_from(j, "keys", &c.keys_min, &c.keys_max);
    ipair_from(j, "swerves", &c.swerves_min, &c.swerves_max);
    pair_from(j, "scr", &c.scr_min, &c.scr_max);
    if (j.contains("accel_amplitude")) c.accel_amplitude = j.at("accel_amplitude").get<double>();
    pair_from(j, "speed", &c.speed_min, &c.speed_max);
    pair_from(j, "curve_order", &c.curve_order_min, &c.curve_order_max);
    if (j.contains("smooth_window")) c.smooth_window = j.at("smooth_window").get<int>();
    if (j.contains("start_margin")) c.start_margin = j.at("start_margin").get<double>();
    if (j.contains("fixed_appearance")) {
        const auto& a = j.at("fixed_appearance");
        c.has_fixed_appearance = true;
        c.fixed_appearance = GaussianSpec{a.at("h").get<double>(), a.at("w").get<double>(),
                                          a.at("sigma").get<double>()};
    }
    if (j.contains("fixed_scr")) {
        c.has_fixed_scr = true;
        c.fixed_scr = j.at("fixed_scr").get<double>();
    }
    if (j.contains("fixed_swerves")) {
        c.has_fixed_swerves = true;
        c.fixed_swerves = j.at("fixed_swerves").get<int>();
    }
    if (j.contains("fixed_position")) {
        const auto& a = j.at("fixed_position");
        c.has_fixed_position = true;
        c.fixed_position = Vec2{a[0].get<double>(), a[1].get<double>()};
    }
    if (j.contains("zero_accel")) c.zero_accel = j.at("zero_accel").get<bool>();
    return c;
}

} // namespace

std::string spec_to_json(const SequenceSpec& s) {
    json j;
    j["version"] = kVersion;
    j["rng"] = Rng::kAlgorithm;
    j["seed"] = s.seed;
    j["name"] = s.name;
    j["frames"] = s.frames;
    j["fov"] = json::array({s.fov_height, s.fov_width});
    if (!s.background_path.empty()) j["background"] = s.background_path;
    j["synthetic"] = {{"size", json::array({s.synthetic.height, s.synthetic.width})},
                      {"base", s.synthetic.base},
                      {"amplitude", s.synthetic.amplitude},
                      {"octaves", s.synthetic.octaves},
                      {"cell", s.synthetic.cell},
                      {"clouds", s.synthetic.clouds},
                      {"cloud_amplitude", s.synthetic.cloud_amplitude},
                      {"noise_sigma", s.synthetic.noise_sigma}};
    if (s.focal > 0.0) j["focal"] = s.focal;
    json att;
    att["p_constant"] = s.attitude.p_constant;
    att["constant_range"] = s.attitude.constant_range;
    att["delta_range"] = s.attitude.delta_range;
    if (s.has_fixed_attitude)
        att["fixed"] = json::array({s.fixed_attitude.x, s.fixed_attitude.y, s.fixed_attitude.z});
    j["attitude"] = att;
    j["translation"] = {{"speed", range(s.translation.speed_min, s.translation.speed_max)},
                        {"order", range(s.translation.order_min, s.translation.order_max)}};
    if (s.static_background) j["static_background"] = true;
    json tg;
    tg["count"] = s.target_count;
    tg["defaults"] = target_config_to_json(s.target_defaults);
    if (!s.targets.empty()) {
        json list = json::array();
        for (const auto& t : s.targets) list.push_back(target_config_to_json(t));
        tg["list"] = list;
    }
    j["targets"] = tg;
    j["blur"] = {{"kernel", s.blur.kernel}, {"sigma", s.blur.sigma}};
    j["mask_threshold"] = s.mask_threshold;
    j["render_threshold"] = s.render_threshold;
    j["neighborhood_d"] = s.neighborhood_d;
    return j.dump(2);
}

SequenceSpec spec_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("spec: JSON parse error: ") + e.what());
    }

    SequenceSpec s;
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("name")) s.name = j.at("name").get<std::string>();
    if (j.contains("frames")) s.frames = j.at("frames").get<int>();
    if (j.contains("fov")) {
        const auto& a = j.at("fov");
        s.fov_height = a[0].get<int>();
        s.fov_width = a[1].get<int>();
    }
    if (j.contains("background")) s.background_path = j.at("background").get<std::string>();
    if (j.contains("synthetic")) {
        const auto& a = j.at("synthetic");
        if (a.contains("size")) {
            s.synthetic.height = a.at("size")[0].get<int>();
            s.synthetic.width = a.at("size")[1].get<int>();
        }
        if (a.contains("base")) s.synthetic.base = a.at("base").get<double>();
        if (a.contains("amplitude")) s.synthetic.amplitude = a.at("amplitude").get<double>();
        if (a.contains("octaves")) s.synthetic.octaves = a.at("octaves").get<int>();
        if (a.contains("cell")) s.synthetic.cell = a.at("cell").get<double>();
        if (a.contains("clouds")) s.synthetic.clouds = a.at("clouds").get<int>();
        if (a.contains("cloud_amplitude")) s.synthetic.cloud_amplitude = a.at("cloud_amplitude").get<double>();
        if (a.contains("noise_sigma")) s.synthetic.noise_sigma = a.at("noise_sigma").get<double>();
    }
    if (j.contains("focal")) s.focal = j.at("focal").get<double>();
    if (j.contains("attitude")) {
        const auto& a = j.at("attitude");
        if (a.contains("p_constant")) s.attitude.p_constant = a.at("p_constant").get<double>();
        if (a.contains("constant_range")) s.attitude.constant_range = a.at("constant_range").get<double>();
        if (a.contains("delta_range")) s.attitude.delta_range = a.at("delta_range").get<double>();
        if (a.contains("fixed")) {
            s.has_fixed_attitude = true;
            s.fixed_attitude = Vec3{a.at("fixed")[0].get<double>(), a.at("fixed")[1].get<double>(),
                                    a.at("fixed")[2].get<double>()};
        }
    }
    if (j.contains("translation")) {
        const auto& a = j.at("translation");
        pair_from(a, "speed", &s.translation.speed_min, &s.translation.speed_max);
        pair_from(a, "order", &s.translation.order_min, &s.translation.order_max);
    }
    if (j.contains("static_background")) s.static_background = j.at("static_background").get<bool>();
    if (j.contains("targets")) {
        const auto& a = j.at("targets");
        if (a.contains("count")) s.target_count = a.at("count").get<int>();
        if (a.contains("defaults")) s.target_defaults = target_config_from_json(a.at("defaults"), TargetConfig{});
        if (a.contains("list"))
            for (const auto& t : a.at("list")) s.targets.push_back(target_config_from_json(t, s.target_defaults));
    }
    if (j.contains("blur")) {
        const auto& a = j.at("blur");
        if (a.contains("kernel")) s.blur.kernel = a.at("kernel").get<int>();
        if (a.contains("sigma")) s.blur.sigma = a.at("sigma").get<double>();
    }
    if (j.contains("mask_threshold")) s.mask_threshold = j.at("mask_threshold").get<double>();
    if (j.contains("render_threshold")) s.render_threshold = j.at("render_threshold").get<double>();
    if (j.contains("neighborhood_d")) s.neighborhood_d = j.at("neighborhood_d").get<int>();
    return s;
}

SequenceSpec load_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("spec: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return spec_from_json(ss.str());
}

bool validate_spec(const SequenceSpec& s, std::vector<std::string>* errors) {
    std::vector<std::string> errs;
    auto check = [&](bool ok, const std::string& msg) {
        if (!ok) errs.push_back(msg);
    };

    check(s.frames >= 200 && s.frames <= 1200, "frames outside Table range [200, 1200]");
    check(s.fov_height == 1024 && s.fov_width == 1024, "field of view differs from 1024x1024");
    check(s.attitude.constant_range <= 10.0, "attitude constant range exceeds 10 degrees");
    check(s.attitude.delta_range <= 5.0, "attitude schedule range exceeds 5 degrees");
    check(s.translation.speed_min >= 1.0 / 20.0 && s.translation.speed_max <= 2.0,
          "translation speed outside [1/20, 2] px/frame");
    auto check_target = [&](const TargetConfig& c, const std::string& who) {
        check(c.axis_min >= 1.0 && c.axis_max <= 9.0, who + ": axis lengths outside [1, 9]");
        check(c.sigma_min >= 0.1 && c.sigma_max <= 1.0, who + ": sigma outside [0.1, 1]");
        check(c.keys_min >= 2 && c.keys_max <= 5, who + ": key appearance count outside [2, 5]");
        check(c.swerves_min >= 0 && c.swerves_max <= 2, who + ": swerve count outside {0,1,2}");
        check(c.scr_min >= 1.0 && c.scr_max <= 20.0, who + ": scr outside [1, 20]");
        check(c.curve_order_min > 0.0 && c.curve_order_max < 3.0, who + ": curve order outside (0, 3)");
        if (c.has_fixed_appearance) {
            check(c.fixed_appearance.h >= 1.0 && c.fixed_appearance.h <= 9.0 &&
                      c.fixed_appearance.w >= 1.0 && c.fixed_appearance.w <= 9.0,
                  who + ": fixed appearance axes outside [1, 9]");
            check(c.fixed_appearance.sigma >= 0.1 && c.fixed_appearance.sigma <= 1.0,
                  who + ": fixed appearance sigma outside [0.1, 1]");
        }
        if (c.has_fixed_scr) check(c.fixed_scr >= 1.0 && c.fixed_scr <= 20.0, who + ": fixed scr outside [1, 20]");
        if (c.has_fixed_swerves)
            check(c.fixed_swerves >= 0 && c.fixed_swerves <= 2, who + ": fixed swerves outside {0,1,2}");
    };
    check_target(s.target_defaults, "target defaults");
    for (size_t i = 0; i < s.targets.size(); ++i)
        check_target(s.targets[i], "target " + std::to_string(i + 1));
    check(s.target_count <= 6, "target count exceeds 6");
    check(s.blur.kernel == 0 || s.blur.kernel == 3 || s.blur.kernel == 5 || s.blur.kernel == 7,
          "blur kernel not in {3, 5, 7}");
    check(s.blur.sigma == 0.0 || (s.blur.sigma >= 0.2 && s.blur.sigma <= 0.6),
          "blur sigma outside [0.2, 0.6]");

    if (errors) *errors = errs;
    return errs.empty();
}

} // namespace irsim
