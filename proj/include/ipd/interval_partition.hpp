#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace ipd {

// Blocks are stored left to right by mass; positions follow from prefix sums.
// total_mass may exceed the block sum; the excess is dust placed at the right end.
// marks[i] is the diversity of everything strictly left of block i.
struct IntervalPartition {
    std::vector<double> blocks;
    double total_mass = 0;
    std::vector<double> marks;
    std::optional<double> total_diversity;

    bool empty() const { return blocks.empty() && total_mass <= 0; }
    bool marked() const { return total_diversity.has_value() && marks.size() == blocks.size(); }
    double block_sum() const;
    double dust() const { return total_mass - block_sum(); }
    size_t size() const { return blocks.size(); }

    // Throws std::invalid_argument when an invariant fails.
    void validate() const;
};

struct RankedSimplexPoint {
    std::vector<double> values;
};

IntervalPartition make_partition(std::vector<double> blocks);
IntervalPartition make_partition(std::vector<double> blocks, double total_mass);
IntervalPartition make_marked(std::vector<double> blocks, std::vector<double> marks, double total_diversity,
                              std::optional<double> total_mass = std::nullopt);

IntervalPartition concatenate(const std::vector<IntervalPartition>& parts);
IntervalPartition concatenate(const IntervalPartition& a, const IntervalPartition& b);
IntervalPartition scale(double c, const IntervalPartition& beta);
IntervalPartition reverse(const IntervalPartition& beta);
IntervalPartition normalize(const IntervalPartition& beta);
RankedSimplexPoint ranked(const IntervalPartition& beta);

std::vector<double> default_h_grid(double h_max, int points = 12);
double diversity_estimate(const IntervalPartition& beta, double t, const std::vector<double>& h_grid);
double diversity_estimate(const IntervalPartition& beta, double t);

std::string to_csv(const IntervalPartition& beta);
nlohmann::ordered_json to_json(const IntervalPartition& beta);
IntervalPartition partition_from_json(const nlohmann::json& j);

// 17 significant digits, round-trip exact.
std::string fmt17(double x);

}  // namespace ipd
