#pragma once

#include <optional>
#include <span>

#include "uavmec/world.hpp"

namespace uavmec::compute {

/// Objective terms of one time slot, summed over all UAVs. SI units.
struct SlotMetrics {
    double fairness_sum = 0.0;   // F_t
    double total_delay_s = 0.0;  // T^Delay_t
    double total_energy_j = 0.0; // E_t
    int offload_count = 0;       // tasks completed within deadline
};

struct EpisodeMetrics {
    double fairness_total = 0.0;
    double delay_total_s = 0.0;
    double energy_total_j = 0.0;
    int offload_total = 0;
};

/// Total offload time: uplink transmission plus on-board processing.
/// Returns nullopt when rate or allocation is zero; the caller treats such a
/// task as not offloaded.
std::optional<double> offload_delay(const world::TaskSpec& task, double rate_bps,
                                    double alloc_hz);

/// CPU energy to process a task at the allocated frequency.
double computation_energy(const world::TaskSpec& task, double alloc_hz, double capacitance);

/// Per-SD service discount 1 - lambda * b / T.
double fairness_index(int offload_count, double lambda, int total_slots);

EpisodeMetrics accumulate_objectives(std::span<const SlotMetrics> slots);

}  // namespace uavmec::compute
