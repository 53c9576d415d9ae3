#include "neg/freeness.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace neg {

double freeness(double m_ij, double m_ji, double m_ii, double m_jj) {
    if (!(m_ij >= 0.0 && m_ji >= 0.0)) throw InvalidInput("bilateral flows must be >= 0");
    if (!(m_ii > 0.0 && m_jj > 0.0)) throw ModelError("nonpositive internal flow");
    return std::sqrt((m_ij * m_ji) / (m_ii * m_jj));
}

void TradeFlowTable::add_flow(const FlowRecord& rec) {
    if (rec.reporter == rec.partner)
        throw InvalidInput("self-flow record for " + rec.reporter +
                           "; internal shipments are derived from gross output");
    if (!(rec.import_value >= 0.0) || !std::isfinite(rec.import_value))
        throw InvalidInput("import_value must be a finite value >= 0 (" + rec.reporter + "->" +
                           rec.partner + "@" + rec.period + ")");
    const auto [it, inserted] =
        flows_.emplace(FlowKey{rec.reporter, rec.partner, rec.period, rec.sector}, rec.import_value);
    if (!inserted)
        throw InvalidInput("duplicate flow record " + rec.reporter + "," + rec.partner + "," +
                           rec.period + (rec.sector.empty() ? "" : "," + rec.sector));
}

void TradeFlowTable::add_output(const OutputRecord& rec) {
    if (!(rec.gross_output >= 0.0 && rec.total_exports >= 0.0) ||
        !std::isfinite(rec.gross_output) || !std::isfinite(rec.total_exports))
        throw InvalidInput("gross_output and total_exports must be finite values >= 0 (" +
                           rec.reporter + "@" + rec.period + ")");
    const auto [it, inserted] = internal_.emplace(OutputKey{rec.reporter, rec.period, rec.sector},
                                                  rec.gross_output - rec.total_exports);
    if (!inserted)
        throw InvalidInput("duplicate output record " + rec.reporter + "," + rec.period +
                           (rec.sector.empty() ? "" : "," + rec.sector));
}

std::optional<double> TradeFlowTable::import_value(const std::string& reporter,
                                                   const std::string& partner,
                                                   const std::string& period,
                                                   const std::string& sector) const {
    const auto it = flows_.find(FlowKey{reporter, partner, period, sector});
    if (it == flows_.end()) return std::nullopt;
    return it->second;
}

std::optional<double> TradeFlowTable::self_shipment(const std::string& reporter,
                                                    const std::string& period,
                                                    const std::string& sector) const {
    const auto it = internal_.find(OutputKey{reporter, period, sector});
    if (it == internal_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::string> TradeFlowTable::periods() const {
    std::set<std::string> s;
    for (const auto& [k, v] : flows_) s.insert(std::get<2>(k));
    for (const auto& [k, v] : internal_) s.insert(std::get<1>(k));
    return {s.begin(), s.end()};
}

std::vector<std::string> TradeFlowTable::sectors() const {
    std::set<std::string> s;
    for (const auto& [k, v] : flows_) s.insert(std::get<3>(k));
    for (const auto& [k, v] : internal_) s.insert(std::get<2>(k));
    if (s.empty()) s.insert("");
    return {s.begin(), s.end()};
}

std::string PanelCell::status_text() const {
    switch (status) {
        case CellStatus::Ok: return "ok";
        case CellStatus::AboveOne: return "phi_above_one";
        case CellStatus::MissingOutput: return "missing_output:" + detail;
        case CellStatus::MissingFlow: return "missing_flow:" + detail;
        case CellStatus::NonpositiveInternalFlow: return "nonpositive_internal_flow:" + detail;
    }
    return "unknown";
}

namespace {

struct Gap {
    CellStatus status;
    std::string detail;
};

// Sum of imports of `importers` from `exporters`; the first gap wins.
std::optional<double> bloc_imports(const TradeFlowTable& t, const Location& importers,
                                   const Location& exporters, const std::string& period,
                                   const std::string& sector, std::optional<Gap>& gap) {
    double total = 0.0;
    for (const auto& i : importers.members) {
        for (const auto& j : exporters.members) {
            if (i == j) continue;
            const auto v = t.import_value(i, j, period, sector);
            if (!v) {
                if (!gap) gap = Gap{CellStatus::MissingFlow, i + "->" + j + "@" + period};
                return std::nullopt;
            }
            total += *v;
        }
    }
    return total;
}

std::optional<double> bloc_self_shipment(const TradeFlowTable& t, const Location& loc,
                                         const std::string& period, const std::string& sector,
                                         std::optional<Gap>& gap) {
    double total = 0.0;
    for (const auto& i : loc.members) {
        const auto v = t.self_shipment(i, period, sector);
        if (!v) {
            if (!gap) gap = Gap{CellStatus::MissingOutput, i + "@" + period};
            return std::nullopt;
        }
        if (!(*v > 0.0)) {
            if (!gap) gap = Gap{CellStatus::NonpositiveInternalFlow, i + "@" + period};
            return std::nullopt;
        }
        total += *v;
    }
    const auto intra = bloc_imports(t, loc, loc, period, sector, gap);
    if (!intra) return std::nullopt;
    return total + *intra;
}

void check_pair(const LocationPair& pair) {
    for (const auto* loc : {&pair.first, &pair.second})
        if (loc->members.empty()) throw InvalidInput("location " + loc->name + " has no members");
    for (const auto& a : pair.first.members)
        for (const auto& b : pair.second.members)
            if (a == b) throw InvalidInput("pair " + pair.label() + " shares member " + a);
}

}  // namespace

std::vector<PanelCell> freeness_panel(const TradeFlowTable& table,
                                      std::span<const LocationPair> pairs,
                                      std::span<const std::string> periods) {
    for (const auto& pair : pairs) check_pair(pair);
    const auto sectors = table.sectors();

    std::vector<PanelCell> out;
    for (const auto& pair : pairs) {
        for (const auto& period : periods) {
            for (const auto& sector : sectors) {
                PanelCell cell;
                cell.pair = pair.label();
                cell.period = period;
                cell.sector = sector;

                std::optional<Gap> gap;
                const auto m_ii = bloc_self_shipment(table, pair.first, period, sector, gap);
                const auto m_jj = bloc_self_shipment(table, pair.second, period, sector, gap);
                const auto m_ij = bloc_imports(table, pair.first, pair.second, period, sector, gap);
                const auto m_ji = bloc_imports(table, pair.second, pair.first, period, sector, gap);
                if (gap) {
                    cell.status = gap->status;
                    cell.detail = gap->detail;
                } else {
                    cell.phi = freeness(*m_ij, *m_ji, *m_ii, *m_jj);
                    cell.status = *cell.phi > 1.0 ? CellStatus::AboveOne : CellStatus::Ok;
                }
                out.push_back(std::move(cell));
            }
        }
    }
    return out;
}

double median(std::vector<double> values) {
    if (values.empty()) throw InvalidInput("median of an empty set");
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) return values[mid];
    return 0.5 * (values[mid - 1] + values[mid]);
}

std::vector<MedianCell> sectoral_median_freeness(std::span<const PanelCell> panel) {
    std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
    for (const auto& cell : panel) {
        auto& bucket = groups[{cell.pair, cell.period}];
        if (cell.phi) bucket.push_back(*cell.phi);
    }
    std::vector<MedianCell> out;
    for (auto& [key, values] : groups) {
        if (values.empty()) continue;
        MedianCell m;
        m.pair = key.first;
        m.period = key.second;
        m.sectors = values.size();
        m.median = median(std::move(values));
        out.push_back(std::move(m));
    }
    return out;
}

}  // namespace neg
