#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "baps/core/error.hpp"
#include "baps/core/format.hpp"
#include "baps/harness/evaluate.hpp"

namespace baps::harness {

enum class Ordering { holds, tie, violated };

inline std::string to_string(Ordering o) {
    switch (o) {
        case Ordering::holds: return "holds";
        case Ordering::tie: return "tie";
        case Ordering::violated: return "violated";
    }
    return "?";
}

struct ComparisonRow {
    std::string label;
    Mode mode = Mode::zeroshot;
    double dice_mean = 0.0, dice_std = 0.0;
    double hd95_mean = 0.0, hd95_std = 0.0;
};

struct Comparison {
    std::string dataset_fingerprint;
    std::vector<ComparisonRow> rows;  // zeroshot, vpt, baps; input order within a mode
    Ordering ordering = Ordering::tie;
};

/// Rows ordered zeroshot -> vpt -> baps. The expected Dice ordering holds
/// if no row is below its predecessor, is a tie if all are equal, and is
/// violated otherwise.
inline Comparison compare(const std::vector<EvalReport>& reports) {
    if (reports.size() < 2) throw ConfigError("compare needs at least two reports");
    Comparison c;
    c.dataset_fingerprint = reports.front().dataset_fingerprint;
    for (const auto& r : reports) {
        if (r.dataset_fingerprint != c.dataset_fingerprint)
            throw DataError("reports were computed on different datasets (" + c.dataset_fingerprint + " vs " +
                            r.dataset_fingerprint + ")");
        c.rows.push_back({r.label, r.mode, r.dice_mean, r.dice_std, r.hd95_mean, r.hd95_std});
    }
    std::stable_sort(c.rows.begin(), c.rows.end(),
                     [](const ComparisonRow& a, const ComparisonRow& b) { return a.mode < b.mode; });
    bool all_equal = true, decreasing = false;
    for (std::size_t i = 1; i < c.rows.size(); ++i) {
        if (c.rows[i].dice_mean < c.rows[i - 1].dice_mean) decreasing = true;
        if (c.rows[i].dice_mean != c.rows[i - 1].dice_mean) all_equal = false;
    }
    c.ordering = decreasing ? Ordering::violated : all_equal ? Ordering::tie : Ordering::holds;
    return c;
}

inline std::string comparison_csv(const Comparison& c) {
    std::ostringstream os;
    os << "label,mode,dice_mean,dice_std,hd95_mean,hd95_std\n";
    for (const auto& r : c.rows)
        os << r.label << ',' << to_string(r.mode) << ',' << format_double(r.dice_mean) << ','
           << format_double(r.dice_std) << ',' << format_double(r.hd95_mean) << ',' << format_double(r.hd95_std)
           << '\n';
    return os.str();
}

inline std::string comparison_text(const Comparison& c) {
    std::ostringstream os;
    os << "dataset " << c.dataset_fingerprint << "\n\n";
    std::size_t width = 5;
    for (const auto& r : c.rows) width = std::max(width, r.label.size());
    const auto pad = [&](const std::string& s) { return s + std::string(width - s.size() + 2, ' '); };
    const auto fixed = [](double v, int digits) {
        std::ostringstream f;
        f.setf(std::ios::fixed);
        f.precision(digits);
        f << v;
        return f.str();
    };
    os << pad("label") << "Dice             HD95\n";
    for (const auto& r : c.rows)
        os << pad(r.label) << fixed(r.dice_mean, 4) << " +- " << fixed(r.dice_std, 4) << "   "
           << fixed(r.hd95_mean, 2) << " +- " << fixed(r.hd95_std, 2) << '\n';
    os << "\nordering zeroshot <= vpt <= baps on Dice: " << to_string(c.ordering) << '\n';
    return os.str();
}

inline void write_comparison(const std::filesystem::path& dir, const Comparison& c) {
    std::filesystem::create_directories(dir);
    std::ofstream csv(dir / "comparison.csv", std::ios::binary);
    std::ofstream txt(dir / "comparison.txt", std::ios::binary);
    if (!csv || !txt) throw DataError("cannot write comparison into " + dir.string());
    csv << comparison_csv(c);
    txt << comparison_text(c);
}

}  // namespace baps::harness
