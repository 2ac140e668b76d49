#include "pvwatch/attack.hpp"

#include <algorithm>
#include <cmath>

#include "pvwatch/rng.hpp"

namespace pvwatch {

std::string attack_kind_name(AttackKind kind) {
    switch (kind) {
    case AttackKind::Disconnect: return "disconnect";
    case AttackKind::Curtailment: return "curtailment";
    case AttackKind::VoltVar: return "volt_var";
    case AttackKind::ReversePowerFlow: return "reverse_power_flow";
    }
    return "?";
}

std::optional<AttackKind> attack_kind_from_name(const std::string& name) {
    if (name == "disconnect") return AttackKind::Disconnect;
    if (name == "curtailment") return AttackKind::Curtailment;
    if (name == "volt_var" || name == "volt-var" || name == "voltvar") return AttackKind::VoltVar;
    if (name == "reverse_power_flow" || name == "reverse-power-flow" || name == "reverse")
        return AttackKind::ReversePowerFlow;
    return std::nullopt;
}

void AttackSpec::validate(std::size_t frame_length) const {
    if (intervals.empty()) throw ConfigError("attack spec has no intervals");
    if (penetration <= 0.0 || penetration > 1.0)
        throw ConfigError("penetration must lie in (0, 1]");
    auto sorted = intervals;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i].first >= sorted[i].second)
            throw IntervalOutOfRange("empty attack interval");
        if (sorted[i].second > frame_length)
            throw IntervalOutOfRange("attack interval [" + std::to_string(sorted[i].first) +
                                     ", " + std::to_string(sorted[i].second) +
                                     ") exceeds frame length " + std::to_string(frame_length));
        if (i > 0 && sorted[i].first < sorted[i - 1].second)
            throw IntervalOutOfRange("overlapping attack intervals");
    }
    switch (kind) {
    case AttackKind::Curtailment:
        if (curtail_factor <= 0.0 || curtail_factor >= 1.0)
            throw ConfigError("curtail factor must lie in (0, 1)");
        break;
    case AttackKind::VoltVar:
        if (attacked_power_factor <= 0.0 || attacked_power_factor > 1.0)
            throw ConfigError("attacked power factor must lie in (0, 1]");
        break;
    case AttackKind::ReversePowerFlow:
        if (load_off_fraction <= 0.0 || load_off_fraction > 1.0)
            throw ConfigError("load-off fraction must lie in (0, 1]");
        break;
    case AttackKind::Disconnect:
        break;
    }
}

LabelSeries make_empty_labels(std::size_t n_houses, std::size_t n_steps) {
    LabelSeries labels;
    labels.attacked.assign(n_houses, std::vector<std::uint8_t>(n_steps, 0));
    labels.kind.assign(n_houses, std::vector<std::uint8_t>(n_steps, LabelSeries::kNoKind));
    return labels;
}

std::vector<int> select_attacked_houses(const SimOutput& normal, double penetration,
                                        std::uint64_t seed) {
    std::vector<int> eligible;
    for (int h = 0; h < static_cast<int>(normal.pv_rating_kw.size()); ++h)
        if (normal.pv_rating_kw[h] > 0.0) eligible.push_back(h);
    if (eligible.empty()) throw ConfigError("scenario has no PV-equipped houses to attack");
    auto rng = make_rng(seed, RngStream::AttackSelection);
    std::shuffle(eligible.begin(), eligible.end(), rng);
    const auto count = static_cast<std::size_t>(
        std::ceil(penetration * static_cast<double>(eligible.size()) - 1e-12));
    eligible.resize(std::min(count, eligible.size()));
    return eligible;
}

namespace {

constexpr std::size_t kIrr = 0, kPvP = 1, kPvQ = 2, kPvV = 3, kPvI = 4, kNetP = 5, kNetQ = 6;

void mutate_house(TimeSeriesFrame& house, const AttackSpec& spec, std::size_t t) {
    auto& ch = house.channels;
    const double demand_p = ch[kNetP][t] + ch[kPvP][t];
    const double demand_q = ch[kNetQ][t] + ch[kPvQ][t];
    switch (spec.kind) {
    case AttackKind::Disconnect:
        // The disconnected inverter's own telemetry (P, Q, V, I) reads zero;
        // the irradiance sensor is a separate device and stays live.
        ch[kPvP][t] = 0.0;
        ch[kPvQ][t] = 0.0;
        ch[kPvV][t] = 0.0;
        ch[kPvI][t] = 0.0;
        ch[kNetP][t] = demand_p;
        ch[kNetQ][t] = demand_q;
        break;
    case AttackKind::Curtailment: {
        ch[kPvP][t] *= spec.curtail_factor;
        ch[kNetP][t] = demand_p - ch[kPvP][t];
        break;
    }
    case AttackKind::VoltVar: {
        const double pf = spec.attacked_power_factor;
        const double tan_phi = std::sqrt(std::max(0.0, 1.0 - pf * pf)) / pf;
        ch[kPvQ][t] = ch[kPvP][t] * tan_phi;
        ch[kNetQ][t] = demand_q - ch[kPvQ][t];
        break;
    }
    case AttackKind::ReversePowerFlow: {
        const double keep = 1.0 - spec.load_off_fraction;
        ch[kNetP][t] = demand_p * keep - ch[kPvP][t];
        ch[kNetQ][t] = demand_q * keep - ch[kPvQ][t];
        break;
    }
    }
}

// PV voltage tracks the recomputed node voltage and current tracks the
// mutated apparent power. Applies to curtailment and volt-var only: the
// reverse-power-flow attack leaves PV channels untouched by definition, and
// a disconnected inverter reports zeros.
void refresh_pv_sensors(TimeSeriesFrame& house, double node_mag, std::size_t t) {
    auto& ch = house.channels;
    const double volt = kServiceVoltageNominal * node_mag;
    ch[kPvV][t] = volt;
    ch[kPvI][t] = std::hypot(ch[kPvP][t], ch[kPvQ][t]) * 1000.0 / volt;
}

} // namespace

std::vector<std::pair<std::size_t, std::size_t>> default_attack_intervals(
    const Scenario& scenario, int day) {
    const std::size_t per_day = scenario.steps_per_day();
    const std::size_t minute = per_day / 1440 > 0 ? per_day / 1440 : 1;
    const std::size_t base = static_cast<std::size_t>(day) * per_day;
    std::vector<std::pair<std::size_t, std::size_t>> intervals;
    // 10:00-10:30, 11:00-11:30, 12:00-12:30, 13:00-13:30
    for (int k = 0; k < 4; ++k) {
        const std::size_t start = base + (600 + 60 * k) * minute;
        intervals.emplace_back(start, start + 30 * minute);
    }
    return intervals;
}

AttackResult apply_attacks(const SimOutput& normal, const std::vector<AttackSpec>& specs,
                           std::uint64_t seed) {
    const std::size_t steps = normal.node.length();
    for (const auto& spec : specs) spec.validate(steps);

    AttackResult result;
    result.data = normal;
    result.labels = make_empty_labels(normal.houses.size(), steps);

    std::vector<int> all_eligible;
    for (int h = 0; h < static_cast<int>(normal.pv_rating_kw.size()); ++h)
        if (normal.pv_rating_kw[h] > 0.0) all_eligible.push_back(h);
    {
        auto rng = make_rng(seed, RngStream::AttackSelection);
        std::shuffle(all_eligible.begin(), all_eligible.end(), rng);
    }
    result.eligible_houses = all_eligible;

    for (const auto& spec : specs) {
        const auto count = static_cast<std::size_t>(
            std::ceil(spec.penetration * static_cast<double>(all_eligible.size()) - 1e-12));
        for (std::size_t k = 0; k < std::min(count, all_eligible.size()); ++k) {
            const int h = all_eligible[k];
            for (const auto& [start, end] : spec.intervals) {
                for (std::size_t t = start; t < end; ++t) {
                    if (result.labels.attacked[h][t])
                        throw IntervalOutOfRange(
                            "attack intervals collide across specs at step " + std::to_string(t));
                    mutate_house(result.data.houses[h], spec, t);
                    result.labels.attacked[h][t] = 1;
                    result.labels.kind[h][t] = static_cast<std::uint8_t>(spec.kind);
                }
            }
        }
    }

    result.data.node = solve_node_frame(result.data.houses, normal.scenario);

    const auto& node_mag = result.data.node.channels[0];
    for (std::size_t h = 0; h < result.data.houses.size(); ++h) {
        for (std::size_t t = 0; t < steps; ++t) {
            if (!result.labels.attacked[h][t]) continue;
            const auto kind = static_cast<AttackKind>(result.labels.kind[h][t]);
            if (kind != AttackKind::Curtailment && kind != AttackKind::VoltVar) continue;
            refresh_pv_sensors(result.data.houses[h], node_mag[t], t);
        }
    }
    return result;
}

namespace {
AttackResult apply_single(const SimOutput& normal, const AttackSpec& spec, std::uint64_t seed,
                          AttackKind expected) {
    if (spec.kind != expected)
        throw ConfigError("attack spec kind does not match the requested mutator");
    return apply_attacks(normal, {spec}, seed);
}
} // namespace

AttackResult apply_disconnect(const SimOutput& normal, const AttackSpec& spec,
                              std::uint64_t seed) {
    return apply_single(normal, spec, seed, AttackKind::Disconnect);
}

AttackResult apply_curtailment(const SimOutput& normal, const AttackSpec& spec,
                               std::uint64_t seed) {
    return apply_single(normal, spec, seed, AttackKind::Curtailment);
}

AttackResult apply_voltvar(const SimOutput& normal, const AttackSpec& spec, std::uint64_t seed) {
    return apply_single(normal, spec, seed, AttackKind::VoltVar);
}

AttackResult apply_reverse_power_flow(const SimOutput& normal, const AttackSpec& spec,
                                      std::uint64_t seed) {
    return apply_single(normal, spec, seed, AttackKind::ReversePowerFlow);
}

} // namespace pvwatch
