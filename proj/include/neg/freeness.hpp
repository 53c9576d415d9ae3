#pragma once

// Empirical trade freeness from bilateral imports and gross output:
//   Phi_ij = sqrt(m_ij m_ji / (m_ii m_jj)),
// where m_ij is i's imports from j and m_ii = gross output - total exports.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "neg/errors.hpp"

namespace neg {

// Throws InvalidInput for negative bilateral flows and
// ModelError("nonpositive internal flow") when m_ii or m_jj <= 0.
double freeness(double m_ij, double m_ji, double m_ii, double m_jj);

struct FlowRecord {
    std::string reporter;
    std::string partner;
    std::string period;
    std::string sector;  // empty when the data carry no sector column
    double import_value = 0.0;
};

struct OutputRecord {
    std::string reporter;
    std::string period;
    std::string sector;
    double gross_output = 0.0;
    double total_exports = 0.0;
};

class TradeFlowTable {
public:
    // Both throw InvalidInput on duplicates, negative values or self-flows.
    void add_flow(const FlowRecord& rec);
    void add_output(const OutputRecord& rec);

    std::optional<double> import_value(const std::string& reporter, const std::string& partner,
                                       const std::string& period,
                                       const std::string& sector = {}) const;
    // Gross output minus total exports; may be <= 0 for bad data.
    std::optional<double> self_shipment(const std::string& reporter, const std::string& period,
                                        const std::string& sector = {}) const;

    std::vector<std::string> periods() const;  // sorted, unique
    std::vector<std::string> sectors() const;  // sorted, unique; {""} without sectors

private:
    using FlowKey = std::tuple<std::string, std::string, std::string, std::string>;
    using OutputKey = std::tuple<std::string, std::string, std::string>;
    std::map<FlowKey, double> flows_;
    std::map<OutputKey, double> internal_;
};

// A country or a bloc of countries. Bloc flows are summed over members and
// intra-bloc trade folds into the bloc's self-shipment.
struct Location {
    std::string name;
    std::vector<std::string> members;
};

struct LocationPair {
    Location first;
    Location second;
    std::string label() const { return first.name + "-" + second.name; }
};

enum class CellStatus { Ok, AboveOne, MissingOutput, MissingFlow, NonpositiveInternalFlow };

struct PanelCell {
    std::string pair;
    std::string period;
    std::string sector;
    std::optional<double> phi;  // empty for data gaps
    CellStatus status = CellStatus::Ok;
    std::string detail;  // what is missing or bad

    // "ok", "phi_above_one", "missing_output:DEU@1995", ...
    std::string status_text() const;
};

// One cell per (pair, period, sector). Missing inputs yield gaps, never zeros.
// Throws InvalidInput when a pair's two locations share a member.
std::vector<PanelCell> freeness_panel(const TradeFlowTable& table,
                                      std::span<const LocationPair> pairs,
                                      std::span<const std::string> periods);

struct MedianCell {
    std::string pair;
    std::string period;
    double median = 0.0;
    std::size_t sectors = 0;
};

// Median across sectors of every (pair, period) with at least one value.
// Even counts average the two central values.
std::vector<MedianCell> sectoral_median_freeness(std::span<const PanelCell> panel);

double median(std::vector<double> values);

}  // namespace neg
