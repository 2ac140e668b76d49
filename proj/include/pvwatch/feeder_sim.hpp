#pragma once

#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "pvwatch/timeseries.hpp"

namespace pvwatch {

// Two-bus Thevenin equivalent of the distribution feeder: a stiff source
// behind a series impedance, with the aggregate residential net injection at
// the point of interconnect.
struct FeederParams {
    std::complex<double> source_voltage{1.0, 0.0}; // per-unit
    std::complex<double> series_impedance{0.01, 0.05}; // per-unit R + jX
    double base_power_kva = 100.0;
    double base_voltage_kv = 12.5;

    void validate() const;
};

struct WeatherParams {
    int sunrise_min = 360;  // minutes after midnight
    int sunset_min = 1080;
    double clear_sky_peak = 950.0;       // W/m^2
    double cloud_event_rate_per_hour = 0.3;
    double cloud_depth = 0.5;            // max fractional dip
    double noise_std = 10.0;             // W/m^2 sensor noise (daytime only)

    void validate() const;
};

// Per-house synthetic demand: base + morning/evening bumps + AR(1) noise,
// with all shape parameters drawn once per house from the scenario seed.
struct LoadParams {
    double base_kw_min = 0.3;
    double base_kw_max = 0.8;
    double morning_peak_kw_min = 0.5;
    double morning_peak_kw_max = 2.0;
    double evening_peak_kw_min = 1.0;
    double evening_peak_kw_max = 3.0;
    double ar1_phi = 0.95;
    double ar1_std_kw = 0.15;
    double min_demand_kw = 0.05;
    double power_factor_min = 0.92;
    double power_factor_max = 0.98;
};

struct PvParams {
    double rating_kw_min = 3.0;
    double rating_kw_max = 6.0;
    double power_factor = 1.0; // unity in normal operation
};

struct Scenario {
    int n_houses = 20;
    double pv_fraction = 0.5;
    int days = 8;
    std::int64_t step_seconds = 60;
    std::uint64_t seed = 0;
    bool seed_set = false;
    FeederParams feeder;
    WeatherParams weather;
    LoadParams load;
    PvParams pv;

    std::size_t steps() const {
        return static_cast<std::size_t>(days) *
               static_cast<std::size_t>(86400 / step_seconds);
    }
    std::size_t steps_per_day() const {
        return static_cast<std::size_t>(86400 / step_seconds);
    }
    void validate() const;
};

struct PhasorSample {
    double magnitude;  // per-unit
    double angle_deg;  // (-180, 180]
};

// Eq-style PV penetration: maximum solar power over total grid peak load.
double solar_penetration(double max_solar_power_mw, double total_grid_peak_load_mw);

// Solves V = Vs - Z * conj(S_drawn / V) with S_drawn = -net_injection by
// fixed-point (Gauss) iteration from Vs, converging on the high-voltage
// root. Positive active injection raises both magnitude and angle.
PhasorSample solve_two_bus(std::complex<double> net_injection_pu, const FeederParams& feeder,
                           int max_iterations = 100, double tolerance = 1e-10);

std::complex<double> solve_two_bus_complex(std::complex<double> net_injection_pu,
                                           const FeederParams& feeder,
                                           int max_iterations = 100, double tolerance = 1e-10);

// P = rating * min(1, irradiance/1000); Q from the power-factor triangle,
// positive for lagging (injecting) reactive power.
std::pair<double, double> pv_output(double irradiance_wm2, double panel_rating_kw,
                                    double power_factor, bool lagging = true);

// Nominal service-level voltage used for the PV voltage channel (volts).
inline constexpr double kServiceVoltageNominal = 240.0;

struct SimOutput {
    std::vector<TimeSeriesFrame> houses; // PV group + Load group channels
    TimeSeriesFrame node;                // voltage_magnitude, phase_angle
    std::vector<double> pv_rating_kw;    // per house; 0 = no PV installed
    std::vector<double> pv_power_factor; // per house
    Scenario scenario;
};

// Deterministic end-to-end generation of a normal-operation dataset.
SimOutput simulate(const Scenario& scenario);

// Shared weather draw (exposed so attack replays stay consistent).
std::vector<double> synth_irradiance(const Scenario& scenario);

// Recomputes the node frame from the houses' net power channels, and refresh
// helpers used by the attack engine.
TimeSeriesFrame solve_node_frame(const std::vector<TimeSeriesFrame>& houses,
                                 const Scenario& scenario);

} // namespace pvwatch
