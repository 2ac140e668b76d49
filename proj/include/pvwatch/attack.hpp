#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pvwatch/feeder_sim.hpp"

namespace pvwatch {

enum class AttackKind { Disconnect, Curtailment, VoltVar, ReversePowerFlow };

std::string attack_kind_name(AttackKind kind);
std::optional<AttackKind> attack_kind_from_name(const std::string& name);

struct AttackSpec {
    AttackKind kind = AttackKind::Disconnect;
    std::vector<std::pair<std::size_t, std::size_t>> intervals; // [start, end) steps
    double penetration = 1.0;          // fraction of PV-equipped houses
    double curtail_factor = 0.5;       // Curtailment: P multiplier in (0,1)
    double attacked_power_factor = 0.8; // VoltVar: inverter pf in (0,1]
    double load_off_fraction = 1.0;     // ReversePowerFlow: demand cut in (0,1]

    void validate(std::size_t frame_length) const;
};

// Per-house, per-timestep ground truth.
struct LabelSeries {
    std::vector<std::vector<std::uint8_t>> attacked;           // [house][step]
    std::vector<std::vector<std::uint8_t>> kind;               // valid iff attacked (else 255)
    static constexpr std::uint8_t kNoKind = 255;

    std::size_t n_houses() const { return attacked.size(); }
    std::size_t n_steps() const { return attacked.empty() ? 0 : attacked.front().size(); }
};

LabelSeries make_empty_labels(std::size_t n_houses, std::size_t n_steps);

struct AttackResult {
    SimOutput data;
    LabelSeries labels;
    std::vector<int> eligible_houses; // seeded shuffle of PV-equipped houses
};

// Houses eligible for attack are the PV-equipped ones; the seeded shuffle is
// shared across penetration levels so the 25% set is a subset of the 50%
// set. Count = ceil(penetration * #eligible).
std::vector<int> select_attacked_houses(const SimOutput& normal, double penetration,
                                        std::uint64_t seed);

// Applies every spec (intervals must not collide across specs), recomputes
// the node phasor from the mutated aggregate injection, and refreshes the
// attacked houses' PV voltage/current channels. Channels of unattacked
// houses are left bit-identical; only the shared node frame moves.
AttackResult apply_attacks(const SimOutput& normal, const std::vector<AttackSpec>& specs,
                           std::uint64_t seed);

AttackResult apply_disconnect(const SimOutput& normal, const AttackSpec& spec,
                              std::uint64_t seed);
AttackResult apply_curtailment(const SimOutput& normal, const AttackSpec& spec,
                               std::uint64_t seed);
AttackResult apply_voltvar(const SimOutput& normal, const AttackSpec& spec, std::uint64_t seed);
AttackResult apply_reverse_power_flow(const SimOutput& normal, const AttackSpec& spec,
                                      std::uint64_t seed);

// Default schedule: four 30-minute bursts between 10:00 and 14:00 separated
// by 30-minute gaps, placed on the given day.
std::vector<std::pair<std::size_t, std::size_t>> default_attack_intervals(
    const Scenario& scenario, int day);

} // namespace pvwatch
