#include "pvwatch/feeder_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pvwatch/rng.hpp"

namespace pvwatch {

void FeederParams::validate() const {
    if (std::abs(source_voltage) <= 0.0) throw ConfigError("source voltage must be nonzero");
    if (series_impedance.real() < 0.0 || series_impedance.imag() < 0.0)
        throw ConfigError("series impedance components must be >= 0");
    if (series_impedance == std::complex<double>(0.0, 0.0))
        throw ConfigError("series impedance must be nonzero");
    if (base_power_kva <= 0.0 || base_voltage_kv <= 0.0)
        throw ConfigError("base power and voltage must be positive");
}

void WeatherParams::validate() const {
    if (sunrise_min >= sunset_min) throw ConfigError("sunrise must precede sunset");
    if (clear_sky_peak <= 0.0) throw ConfigError("clear-sky peak must be positive");
    if (cloud_depth < 0.0 || cloud_depth >= 1.0)
        throw ConfigError("cloud depth must lie in [0, 1)");
    if (cloud_event_rate_per_hour < 0.0) throw ConfigError("cloud rate must be >= 0");
    if (noise_std < 0.0) throw ConfigError("noise std must be >= 0");
}

void Scenario::validate() const {
    if (n_houses < 1) throw ConfigError("need at least one house");
    if (days < 1) throw ConfigError("need at least one day");
    if (pv_fraction < 0.0 || pv_fraction > 1.0) throw ConfigError("pv_fraction must be in [0,1]");
    if (step_seconds <= 0 || 86400 % step_seconds != 0)
        throw ConfigError("step must be positive and divide a day");
    if (!seed_set) throw ConfigError("scenario seed is mandatory");
    feeder.validate();
    weather.validate();
}

double solar_penetration(double max_solar_power_mw, double total_grid_peak_load_mw) {
    if (total_grid_peak_load_mw <= 0.0)
        throw ConfigError("total grid peak load must be positive");
    return max_solar_power_mw / total_grid_peak_load_mw;
}

std::complex<double> solve_two_bus_complex(std::complex<double> net_injection_pu,
                                           const FeederParams& feeder, int max_iterations,
                                           double tolerance) {
    const std::complex<double> s_drawn = -net_injection_pu;
    std::complex<double> v = feeder.source_voltage;
    for (int it = 0; it < max_iterations; ++it) {
        if (std::abs(v) < 1e-6)
            throw PowerFlowDivergence("voltage collapsed during fixed-point iteration");
        const std::complex<double> next =
            feeder.source_voltage - feeder.series_impedance * std::conj(s_drawn / v);
        if (std::abs(next - v) < tolerance) return next;
        v = next;
    }
    throw PowerFlowDivergence("two-bus fixed point did not converge within " +
                              std::to_string(max_iterations) + " iterations");
}

PhasorSample solve_two_bus(std::complex<double> net_injection_pu, const FeederParams& feeder,
                           int max_iterations, double tolerance) {
    const auto v = solve_two_bus_complex(net_injection_pu, feeder, max_iterations, tolerance);
    PhasorSample out;
    out.magnitude = std::abs(v);
    out.angle_deg = std::arg(v) * 180.0 / std::numbers::pi;
    if (out.angle_deg <= -180.0) out.angle_deg += 360.0;
    return out;
}

std::pair<double, double> pv_output(double irradiance_wm2, double panel_rating_kw,
                                    double power_factor, bool lagging) {
    if (irradiance_wm2 < 0.0) throw ConfigError("irradiance must be >= 0");
    if (power_factor == 0.0 || std::abs(power_factor) > 1.0)
        throw ConfigError("power factor must satisfy 0 < |pf| <= 1");
    const double pf = std::abs(power_factor);
    const double p = panel_rating_kw * std::min(1.0, irradiance_wm2 / 1000.0);
    // tan(acos(pf)) written as sqrt(1-pf^2)/pf for accuracy near pf = 1.
    const double tan_phi = std::sqrt(std::max(0.0, 1.0 - pf * pf)) / pf;
    const double q = p * tan_phi * (lagging ? 1.0 : -1.0);
    return {p, q};
}

std::vector<double> synth_irradiance(const Scenario& scenario) {
    const auto& w = scenario.weather;
    const std::size_t steps = scenario.steps();
    const double step_min = static_cast<double>(scenario.step_seconds) / 60.0;

    auto rng = make_rng(scenario.seed, RngStream::Weather);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, w.noise_std);

    // Poisson cloud events via exponential inter-arrival times; overlapping
    // clouds take the max depth so transmittance never drops below
    // 1 - cloud_depth.
    struct Cloud {
        double start_min, end_min, depth;
    };
    std::vector<Cloud> clouds;
    if (w.cloud_event_rate_per_hour > 0.0) {
        std::exponential_distribution<double> gap_h(w.cloud_event_rate_per_hour);
        double t_min = 0.0;
        const double horizon_min = static_cast<double>(steps) * step_min;
        while (true) {
            t_min += gap_h(rng) * 60.0;
            if (t_min >= horizon_min) break;
            const double duration = 5.0 + 25.0 * unit(rng);
            const double depth = w.cloud_depth * (0.6 + 0.4 * unit(rng));
            clouds.push_back({t_min, t_min + duration, depth});
        }
    }

    std::vector<double> irr(steps, 0.0);
    const double day_len = static_cast<double>(w.sunset_min - w.sunrise_min);
    std::size_t cloud_lo = 0;
    for (std::size_t t = 0; t < steps; ++t) {
        const double abs_min = static_cast<double>(t) * step_min;
        const double minute_of_day =
            std::fmod(abs_min, 1440.0);
        double clear = 0.0;
        if (minute_of_day > w.sunrise_min && minute_of_day < w.sunset_min) {
            const double phase = (minute_of_day - w.sunrise_min) / day_len;
            clear = w.clear_sky_peak * std::sin(std::numbers::pi * phase);
        }
        if (clear <= 0.0) {
            irr[t] = 0.0;
            continue;
        }
        while (cloud_lo < clouds.size() && clouds[cloud_lo].end_min < abs_min) ++cloud_lo;
        double depth = 0.0;
        for (std::size_t c = cloud_lo; c < clouds.size() && clouds[c].start_min <= abs_min; ++c)
            if (abs_min < clouds[c].end_min) depth = std::max(depth, clouds[c].depth);
        irr[t] = std::max(0.0, clear * (1.0 - depth) + noise(rng));
    }
    return irr;
}

namespace {

struct HouseProfile {
    double base_kw;
    double morning_center_min, morning_height_kw, morning_width_min;
    double evening_center_min, evening_height_kw, evening_width_min;
    double tan_phi; // reactive demand factor
};

HouseProfile draw_profile(const Scenario& sc, int house) {
    auto rng = make_rng(sc.seed, RngStream::LoadProfile, static_cast<std::uint64_t>(house));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto& lp = sc.load;
    HouseProfile p;
    p.base_kw = lp.base_kw_min + (lp.base_kw_max - lp.base_kw_min) * unit(rng);
    p.morning_center_min = 450.0 + 120.0 * unit(rng); // 07:30 +- 1 h
    p.morning_height_kw =
        lp.morning_peak_kw_min + (lp.morning_peak_kw_max - lp.morning_peak_kw_min) * unit(rng);
    p.morning_width_min = 40.0 + 50.0 * unit(rng);
    p.evening_center_min = 1080.0 + 180.0 * unit(rng); // 18:00 .. 21:00
    p.evening_height_kw =
        lp.evening_peak_kw_min + (lp.evening_peak_kw_max - lp.evening_peak_kw_min) * unit(rng);
    p.evening_width_min = 60.0 + 60.0 * unit(rng);
    const double pf =
        lp.power_factor_min + (lp.power_factor_max - lp.power_factor_min) * unit(rng);
    p.tan_phi = std::sqrt(std::max(0.0, 1.0 - pf * pf)) / pf;
    return p;
}

double bump(double minute, double center, double height, double width) {
    const double z = (minute - center) / width;
    return height * std::exp(-0.5 * z * z);
}

} // namespace

TimeSeriesFrame solve_node_frame(const std::vector<TimeSeriesFrame>& houses,
                                 const Scenario& scenario) {
    const std::size_t steps = houses.front().length();
    TimeSeriesFrame node;
    node.start_time = houses.front().start_time;
    node.step = houses.front().step;
    node.channel_names = node_group().channel_names;
    node.channels.assign(2, std::vector<double>(steps));

    std::vector<const std::vector<double>*> net_p, net_q;
    net_p.reserve(houses.size());
    net_q.reserve(houses.size());
    for (const auto& h : houses) {
        net_p.push_back(&h.channel("net_active_power"));
        net_q.push_back(&h.channel("net_reactive_power"));
    }

    for (std::size_t t = 0; t < steps; ++t) {
        double inj_p = 0.0, inj_q = 0.0;
        for (std::size_t h = 0; h < houses.size(); ++h) {
            inj_p -= (*net_p[h])[t]; // net is import-positive; injection is the negative
            inj_q -= (*net_q[h])[t];
        }
        const std::complex<double> injection(inj_p / scenario.feeder.base_power_kva,
                                             inj_q / scenario.feeder.base_power_kva);
        const PhasorSample v = solve_two_bus(injection, scenario.feeder);
        node.channels[0][t] = v.magnitude;
        node.channels[1][t] = v.angle_deg;
    }
    return node;
}

SimOutput simulate(const Scenario& scenario) {
    scenario.validate();
    const std::size_t steps = scenario.steps();
    const double step_min = static_cast<double>(scenario.step_seconds) / 60.0;

    SimOutput out;
    out.scenario = scenario;

    // PV assignment: seeded shuffle, first ceil(fraction * n) houses get PV.
    std::vector<int> order(scenario.n_houses);
    for (int i = 0; i < scenario.n_houses; ++i) order[i] = i;
    {
        auto rng = make_rng(scenario.seed, RngStream::PvAssignment);
        std::shuffle(order.begin(), order.end(), rng);
    }
    const int n_pv = static_cast<int>(
        std::ceil(scenario.pv_fraction * static_cast<double>(scenario.n_houses) - 1e-12));
    out.pv_rating_kw.assign(scenario.n_houses, 0.0);
    out.pv_power_factor.assign(scenario.n_houses, scenario.pv.power_factor);
    {
        auto rng = make_rng(scenario.seed, RngStream::PvAssignment, 1);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int k = 0; k < n_pv && k < scenario.n_houses; ++k) {
            const double rating = scenario.pv.rating_kw_min +
                                  (scenario.pv.rating_kw_max - scenario.pv.rating_kw_min) *
                                      unit(rng);
            out.pv_rating_kw[order[k]] = rating;
        }
    }

    const std::vector<double> irradiance = synth_irradiance(scenario);

    const auto pv_names = pv_group().channel_names;
    const auto load_names = load_group().channel_names;

    out.houses.resize(scenario.n_houses);
    std::vector<std::vector<double>> demand_p(scenario.n_houses),
        demand_q(scenario.n_houses);

    for (int h = 0; h < scenario.n_houses; ++h) {
        const HouseProfile profile = draw_profile(scenario, h);
        auto rng = make_rng(scenario.seed, RngStream::LoadProfile,
                            0x10000u + static_cast<std::uint64_t>(h));
        const double eps_std =
            scenario.load.ar1_std_kw * std::sqrt(1.0 - scenario.load.ar1_phi * scenario.load.ar1_phi);
        std::normal_distribution<double> eps(0.0, eps_std);

        demand_p[h].resize(steps);
        demand_q[h].resize(steps);
        double ar = 0.0;
        for (std::size_t t = 0; t < steps; ++t) {
            const double minute_of_day = std::fmod(static_cast<double>(t) * step_min, 1440.0);
            ar = scenario.load.ar1_phi * ar + eps(rng);
            double p = profile.base_kw +
                       bump(minute_of_day, profile.morning_center_min, profile.morning_height_kw,
                            profile.morning_width_min) +
                       bump(minute_of_day, profile.evening_center_min, profile.evening_height_kw,
                            profile.evening_width_min) +
                       ar;
            p = std::max(scenario.load.min_demand_kw, p);
            demand_p[h][t] = p;
            demand_q[h][t] = p * profile.tan_phi;
        }
    }

    // Node solve from aggregate injection, then per-house channel assembly.
    std::vector<double> node_mag(steps), node_ang(steps);
    std::vector<std::vector<double>> pv_p(scenario.n_houses), pv_q(scenario.n_houses);
    for (int h = 0; h < scenario.n_houses; ++h) {
        pv_p[h].resize(steps);
        pv_q[h].resize(steps);
        for (std::size_t t = 0; t < steps; ++t) {
            const auto [p, q] =
                pv_output(irradiance[t], out.pv_rating_kw[h], out.pv_power_factor[h]);
            pv_p[h][t] = p;
            pv_q[h][t] = q;
        }
    }
    for (std::size_t t = 0; t < steps; ++t) {
        double inj_p = 0.0, inj_q = 0.0;
        for (int h = 0; h < scenario.n_houses; ++h) {
            inj_p += pv_p[h][t] - demand_p[h][t];
            inj_q += pv_q[h][t] - demand_q[h][t];
        }
        const std::complex<double> injection(inj_p / scenario.feeder.base_power_kva,
                                             inj_q / scenario.feeder.base_power_kva);
        const PhasorSample v = solve_two_bus(injection, scenario.feeder);
        node_mag[t] = v.magnitude;
        node_ang[t] = v.angle_deg;
    }

    for (int h = 0; h < scenario.n_houses; ++h) {
        TimeSeriesFrame& frame = out.houses[h];
        frame.start_time = 0;
        frame.step = scenario.step_seconds;
        frame.channel_names = pv_names;
        frame.channel_names.insert(frame.channel_names.end(), load_names.begin(),
                                   load_names.end());
        frame.channels.assign(frame.channel_names.size(), std::vector<double>(steps));
        for (std::size_t t = 0; t < steps; ++t) {
            const double volt = kServiceVoltageNominal * node_mag[t];
            const double s_kva = std::hypot(pv_p[h][t], pv_q[h][t]);
            frame.channels[0][t] = irradiance[t];
            frame.channels[1][t] = pv_p[h][t];
            frame.channels[2][t] = pv_q[h][t];
            frame.channels[3][t] = volt;
            frame.channels[4][t] = s_kva * 1000.0 / volt;
            frame.channels[5][t] = demand_p[h][t] - pv_p[h][t];
            frame.channels[6][t] = demand_q[h][t] - pv_q[h][t];
        }
    }

    out.node.start_time = 0;
    out.node.step = scenario.step_seconds;
    out.node.channel_names = node_group().channel_names;
    out.node.channels = {std::move(node_mag), std::move(node_ang)};
    return out;
}

} // namespace pvwatch
