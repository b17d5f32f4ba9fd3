#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "empaudit/errors.hpp"
#include "empaudit/report.hpp"

namespace empaudit::report {
namespace {

using causal::Attribute;

constexpr double kSignificanceLevel = 0.05;

struct GroupKey {
    Setting setting;
    Category category;
    bool operator<(const GroupKey& other) const {
        return std::tie(setting, category) < std::tie(other.setting, other.category);
    }
};

std::string setting_label(Setting s) {
    return s == Setting::Isolation ? "Isolation" : "Intersection";
}

Setting setting_from_label(const std::string& s) {
    std::string lower = to_lower(s);
    if (lower == "isolation") return Setting::Isolation;
    if (lower == "intersection") return Setting::Intersection;
    throw ParseError("unknown setting label: '" + s + "'");
}

}  // namespace

std::vector<ShiftTableRow> build_shift_rows(const std::string& model,
                                            const std::vector<AteEstimate>& estimates,
                                            const Taxonomy& taxonomy) {
    std::map<GroupKey, std::map<std::string, ShiftTableRow>> groups;
    for (const auto& est : estimates) {
        GroupKey key{est.setting, est.attribute.category};
        auto& row = groups[key][est.attribute.value];
        row.model = model;
        row.setting = est.setting;
        row.category = est.attribute.category;
        row.attribute = est.attribute.value;
        row.values[est.dimension] = est.mean_shift;
        row.present[est.dimension] = true;
        row.significant[est.dimension] = est.p_value < kSignificanceLevel;
        row.equivalent[est.dimension] = est.equivalent_to_base;
    }

    std::vector<ShiftTableRow> out;
    for (auto& [key, rows] : groups) {
        // Column marks: extremes among the significant cells.
        for (std::size_t dim = 0; dim < kDimensionCount; ++dim) {
            double max_value = -std::numeric_limits<double>::infinity();
            double min_value = std::numeric_limits<double>::infinity();
            bool any = false;
            for (const auto& [_, row] : rows) {
                if (!row.present[dim] || !row.significant[dim]) continue;
                any = true;
                max_value = std::max(max_value, row.values[dim]);
                min_value = std::min(min_value, row.values[dim]);
            }
            if (!any) continue;
            for (auto& [_, row] : rows) {
                if (!row.present[dim] || !row.significant[dim]) continue;
                if (max_value != min_value) {
                    if (row.values[dim] == max_value) row.marks[dim] = CellMark::SigHigh;
                    else if (row.values[dim] == min_value) row.marks[dim] = CellMark::SigLow;
                } else {
                    // A single significant level: mark by sign.
                    if (row.values[dim] > 0.0) row.marks[dim] = CellMark::SigHigh;
                    else if (row.values[dim] < 0.0) row.marks[dim] = CellMark::SigLow;
                }
            }
        }

        // Taxonomy order first, anything unknown afterwards alphabetically.
        std::vector<std::string> order;
        for (const auto& value : taxonomy.values(key.category)) {
            if (rows.count(value)) order.push_back(value);
        }
        for (const auto& [value, _] : rows) {
            if (std::find(order.begin(), order.end(), value) == order.end()) {
                order.push_back(value);
            }
        }
        for (const auto& value : order) out.push_back(rows.at(value));
    }
    return out;
}

void emit_shift_tables(const std::vector<ShiftTableRow>& rows,
                       const std::filesystem::path& human_path,
                       const std::filesystem::path& machine_path,
                       const std::string& stamp) {
    // Machine-readable mirror: one long-format line per present cell.
    {
        std::ofstream out(machine_path, std::ios::binary);
        if (!out) throw IoError("cannot write " + machine_path.string());
        out << "# " << stamp << '\n';
        out << "model,setting,category,attribute,dimension,value,significant,mark,equivalent\n";
        for (const auto& row : rows) {
            for (std::size_t dim = 0; dim < kDimensionCount; ++dim) {
                if (!row.present[dim]) continue;
                std::string mark = row.marks[dim] == CellMark::SigHigh  ? "sig-high"
                                   : row.marks[dim] == CellMark::SigLow ? "sig-low"
                                                                        : "none";
                out << csvio::join({row.model, setting_label(row.setting),
                                    std::string(persona::category_name(row.category)),
                                    row.attribute,
                                    std::string(kDimensionNames[dim]),
                                    csvio::format_double(row.values[dim]),
                                    row.significant[dim] ? "1" : "0", mark,
                                    row.equivalent[dim] ? "1" : "0"})
                    << '\n';
            }
        }
    }

    // Human-readable tables, one block per (setting, category).
    std::ofstream out(human_path, std::ios::binary);
    if (!out) throw IoError("cannot write " + human_path.string());
    out << "# " << stamp << '\n';
    out << "# cell marks: [+] most positive significant, [-] most negative "
           "significant, (=) equivalent to base\n";

    std::map<GroupKey, std::vector<const ShiftTableRow*>> groups;
    for (const auto& row : rows) {
        groups[GroupKey{row.setting, row.category}].push_back(&row);
    }
    for (const auto& [key, group] : groups) {
        out << "\n== " << group.front()->model << " | " << setting_label(key.setting)
            << " | " << persona::category_name(key.category) << " ==\n";
        out << "attribute";
        for (auto dim_name : kDimensionNames) out << '\t' << dim_name;
        out << '\n';
        for (const auto* row : group) {
            out << row->attribute;
            for (std::size_t dim = 0; dim < kDimensionCount; ++dim) {
                out << '\t';
                if (!row->present[dim]) {
                    out << ".";
                    continue;
                }
                out << csvio::format_fixed3(row->values[dim]);
                if (row->marks[dim] == CellMark::SigHigh) out << "[+]";
                if (row->marks[dim] == CellMark::SigLow) out << "[-]";
                if (row->equivalent[dim]) out << "(=)";
            }
            out << '\n';
        }
    }
}

std::string_view direction_glyph(Direction d) {
    switch (d) {
        case Direction::Up: return "↑";
        case Direction::Down: return "↓";
        case Direction::Same: return "≡";
    }
    return "?";
}

Direction range_direction(double iso_width, double inter_width, double rel_threshold) {
    if (iso_width <= 0.0 && inter_width <= 0.0) return Direction::Same;
    if (iso_width <= 0.0) return Direction::Up;
    double ratio = inter_width / iso_width;
    if (ratio > 1.0 + rel_threshold) return Direction::Up;
    if (ratio < 1.0 - rel_threshold) return Direction::Down;
    return Direction::Same;
}

Direction value_direction(double iso_value, double inter_value, double rel_threshold) {
    double tol = rel_threshold * std::abs(iso_value);
    if (inter_value > iso_value + tol) return Direction::Up;
    if (inter_value < iso_value - tol) return Direction::Down;
    return Direction::Same;
}

std::vector<SummaryRow> build_summary(const std::vector<AteEstimate>& isolation,
                                      const std::vector<AteEstimate>& intersection) {
    struct Range {
        double low = std::numeric_limits<double>::infinity();
        double high = -std::numeric_limits<double>::infinity();
        bool seen = false;
        void absorb(double v) {
            low = std::min(low, v);
            high = std::max(high, v);
            seen = true;
        }
    };
    // family key: (affective?, category)
    std::map<std::pair<bool, Category>, std::pair<Range, Range>> families;
    auto absorb = [&](const std::vector<AteEstimate>& estimates, bool iso) {
        for (const auto& est : estimates) {
            bool affective = est.dimension < kEmotionCount;
            auto& slot = families[{affective, est.attribute.category}];
            (iso ? slot.first : slot.second).absorb(est.mean_shift);
        }
    };
    absorb(isolation, true);
    absorb(intersection, false);

    std::vector<SummaryRow> rows;
    for (bool affective : {false, true}) {  // cognitive families first, per the paper
        for (Category category : persona::kCategories) {
            auto it = families.find({affective, category});
            if (it == families.end()) continue;
            const auto& [iso, inter] = it->second;
            if (!iso.seen || !inter.seen) continue;
            SummaryRow row;
            row.family = std::string(affective ? "Affective " : "Cognitive ") +
                         std::string(persona::category_name(category));
            row.iso_low = iso.low;
            row.iso_high = iso.high;
            row.inter_low = inter.low;
            row.inter_high = inter.high;
            row.direction = range_direction(iso.high - iso.low, inter.high - inter.low);
            rows.push_back(row);
        }
    }
    return rows;
}

void emit_summary(const std::vector<SummaryRow>& rows,
                  const std::filesystem::path& human_path,
                  const std::filesystem::path& machine_path,
                  const std::string& stamp) {
    {
        std::ofstream out(machine_path, std::ios::binary);
        if (!out) throw IoError("cannot write " + machine_path.string());
        out << "# " << stamp << '\n';
        out << "family,iso_low,iso_high,inter_low,inter_high,direction\n";
        for (const auto& row : rows) {
            out << csvio::join({row.family, csvio::format_double(row.iso_low),
                                csvio::format_double(row.iso_high),
                                csvio::format_double(row.inter_low),
                                csvio::format_double(row.inter_high),
                                std::string(direction_glyph(row.direction))})
                << '\n';
        }
    }
    std::ofstream out(human_path, std::ios::binary);
    if (!out) throw IoError("cannot write " + human_path.string());
    out << "# " << stamp << '\n';
    out << "family\tisolation range\tintersection range\tdirection\n";
    for (const auto& row : rows) {
        out << row.family << '\t' << csvio::format_fixed3(row.iso_low) << ".."
            << csvio::format_fixed3(row.iso_high) << '\t'
            << csvio::format_fixed3(row.inter_low) << ".."
            << csvio::format_fixed3(row.inter_high) << '\t'
            << direction_glyph(row.direction) << '\n';
    }
}

void write_estimates(const std::filesystem::path& path,
                     const std::vector<AteEstimate>& estimates,
                     const std::string& model, const std::string& stamp) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "# " << stamp << '\n';
    out << "model,setting,category,attribute,dimension,mean_shift,n,skipped,"
           "ci_low,ci_high,p_value,equivalent,equivalence_p\n";
    for (const auto& est : estimates) {
        out << csvio::join({model, setting_label(est.setting),
                            std::string(persona::category_name(est.attribute.category)),
                            est.attribute.value,
                            std::string(kDimensionNames[est.dimension]),
                            csvio::format_double(est.mean_shift),
                            std::to_string(est.n), std::to_string(est.skipped),
                            csvio::format_double(est.ci_low),
                            csvio::format_double(est.ci_high),
                            csvio::format_double(est.p_value),
                            est.equivalent_to_base ? "1" : "0",
                            csvio::format_double(est.equivalence_p)})
            << '\n';
    }
}

std::vector<AteEstimate> load_estimates(const std::filesystem::path& path,
                                        std::string* model) {
    auto rows = csvio::read_data_rows(path);
    if (rows.empty()) throw ParseError("no rows in estimate table: " + path.string());

    std::vector<AteEstimate> estimates;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != 13) {
            throw ParseError("estimate row needs 13 fields at row " +
                             std::to_string(r + 1) + " of " + path.string());
        }
        if (model && model->empty()) *model = row[0];
        AteEstimate est;
        est.setting = setting_from_label(row[1]);
        est.attribute.category = persona::category_from_name(row[2]);
        est.attribute.value = row[3];
        int dim = dimension_index(row[4]);
        if (dim < 0) throw ParseError("unknown dimension '" + row[4] + "' in " + path.string());
        est.dimension = static_cast<std::size_t>(dim);
        est.mean_shift = std::stod(row[5]);
        est.n = static_cast<std::size_t>(std::stoull(row[6]));
        est.skipped = static_cast<std::size_t>(std::stoull(row[7]));
        est.ci_low = std::stod(row[8]);
        est.ci_high = std::stod(row[9]);
        est.p_value = std::stod(row[10]);
        est.equivalent_to_base = row[11] == "1";
        est.equivalence_p = std::stod(row[12]);
        estimates.push_back(std::move(est));
    }
    return estimates;
}

std::vector<FixtureCell> load_shift_fixture(const std::filesystem::path& path) {
    auto rows = csvio::read_data_rows(path);
    if (rows.empty()) throw ParseError("empty fixture: " + path.string());

    std::vector<FixtureCell> cells;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != 8) {
            throw ParseError("fixture row needs 8 fields at row " +
                             std::to_string(r + 1) + " of " + path.string());
        }
        FixtureCell cell;
        cell.model = row[0];
        cell.setting = setting_from_label(row[1]);
        cell.category = persona::category_from_name(row[2]);
        cell.attribute = row[3];
        int dim = dimension_index(row[4]);
        if (dim < 0) throw ParseError("unknown dimension '" + row[4] + "' in " + path.string());
        cell.dimension = static_cast<std::size_t>(dim);
        cell.value = std::stod(row[5]);
        if (row[6] == "pos") cell.paper_mark = CellMark::SigHigh;
        else if (row[6] == "neg") cell.paper_mark = CellMark::SigLow;
        else if (row[6] == "none") cell.paper_mark = CellMark::None;
        else throw ParseError("unknown mark '" + row[6] + "' in " + path.string());
        cell.paper_equivalent = row[7] == "1";
        cells.push_back(std::move(cell));
    }
    return cells;
}

std::vector<AteEstimate> fixture_to_estimates(const std::vector<FixtureCell>& cells,
                                              const std::string& model) {
    std::vector<AteEstimate> estimates;
    for (const auto& cell : cells) {
        if (cell.model != model) continue;
        AteEstimate est;
        est.attribute = Attribute{cell.category, cell.attribute};
        est.dimension = cell.dimension;
        est.setting = cell.setting;
        est.mean_shift = cell.value;
        est.n = 300;  // nominal; marks only depend on (value, significance)
        est.p_value = cell.paper_mark == CellMark::None ? 0.5 : 0.01;
        est.ci_low = cell.value;
        est.ci_high = cell.value;
        est.equivalent_to_base = cell.paper_equivalent;
        est.equivalence_p = cell.paper_equivalent ? 0.01 : 0.9;
        estimates.push_back(std::move(est));
    }
    return estimates;
}

}  // namespace empaudit::report
