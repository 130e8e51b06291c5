#include "uavmec/compute.hpp"

namespace uavmec::compute {

std::optional<double> offload_delay(const world::TaskSpec& task, double rate_bps,
                                    double alloc_hz) {
    if (!(rate_bps > 0.0) || !(alloc_hz > 0.0)) return std::nullopt;
    return task.size_bits / rate_bps + task.size_bits * task.cycles_per_bit / alloc_hz;
}

double computation_energy(const world::TaskSpec& task, double alloc_hz, double capacitance) {
    return capacitance * alloc_hz * alloc_hz * task.size_bits * task.cycles_per_bit;
}

double fairness_index(int offload_count, double lambda, int total_slots) {
    return 1.0 - lambda * static_cast<double>(offload_count) / static_cast<double>(total_slots);
}

EpisodeMetrics accumulate_objectives(std::span<const SlotMetrics> slots) {
    EpisodeMetrics total;
    for (const SlotMetrics& s : slots) {
        total.fairness_total += s.fairness_sum;
        total.delay_total_s += s.total_delay_s;
        total.energy_total_j += s.total_energy_j;
        total.offload_total += s.offload_count;
    }
    return total;
}

}  // namespace uavmec::compute
