#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "phenokg/csv.hpp"
#include "phenokg/pipeline.hpp"

namespace fs = std::filesystem;

namespace phenokg {

namespace {

std::string fmt(double v) {
    std::ostringstream s;
    s << std::setprecision(6) << v;
    return s.str();
}

// minimal deterministic scatter: claims in (R, Y), radius by NPS, front
// claims filled
void write_pareto_svg(const std::string& path, const std::vector<ScoredClaim>& claims,
                      const std::vector<int>& front) {
    std::set<int> on_front(front.begin(), front.end());
    const int w = 640, h = 480, margin = 48;
    std::ofstream out(path, std::ios::binary);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << h - margin << "\" x2=\"" << w - margin
        << "\" y2=\"" << h - margin << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin
        << "\" y2=\"" << h - margin << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << w / 2 << "\" y=\"" << h - 12 << "\" font-size=\"12\">relevance R</text>\n";
    out << "<text x=\"12\" y=\"" << h / 2 << "\" font-size=\"12\" transform=\"rotate(-90 12 "
        << h / 2 << ")\">validation Y</text>\n";
    for (size_t i = 0; i < claims.size(); ++i) {
        double x = margin + claims[i].relevance * (w - 2 * margin);
        double y = h - margin - claims[i].validation * (h - 2 * margin);
        double r = 2.0 + 6.0 * claims[i].nps;
        bool f = on_front.count(static_cast<int>(i)) > 0;
        out << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(y) << "\" r=\"" << fmt(r)
            << "\" fill=\"" << (f ? "#d62728" : "none") << "\" stroke=\"#1f77b4\"/>\n";
    }
    out << "</svg>\n";
}

void write_components_svg(const std::string& path, const std::vector<std::string>& labels,
                          const std::vector<std::array<double, 6>>& means) {
    static const char* comp_names[6] = {"struct", "path", "prob", "mb", "var", "lit"};
    static const char* colors[6] = {"#1f77b4", "#ff7f0e", "#2ca02c",
                                    "#d62728", "#9467bd", "#8c564b"};
    const int w = 720, h = 420, margin = 48;
    const int groups = static_cast<int>(means.size());
    std::ofstream out(path, std::ios::binary);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (groups > 0) {
        double group_w = static_cast<double>(w - 2 * margin) / groups;
        double bar_w = group_w / 7.0;
        for (int g = 0; g < groups; ++g) {
            for (int c = 0; c < 6; ++c) {
                double v = std::clamp(means[g][c], 0.0, 1.0);
                double x = margin + g * group_w + c * bar_w;
                double bh = v * (h - 2 * margin);
                out << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(h - margin - bh)
                    << "\" width=\"" << fmt(bar_w * 0.9) << "\" height=\"" << fmt(bh)
                    << "\" fill=\"" << colors[c] << "\"/>\n";
            }
            out << "<text x=\"" << fmt(margin + g * group_w + group_w / 2 - 8) << "\" y=\""
                << h - margin + 16 << "\" font-size=\"11\">" << labels[g] << "</text>\n";
        }
        for (int c = 0; c < 6; ++c) {
            out << "<rect x=\"" << w - 110 << "\" y=\"" << 20 + c * 18
                << "\" width=\"12\" height=\"12\" fill=\"" << colors[c] << "\"/>"
                << "<text x=\"" << w - 92 << "\" y=\"" << 31 + c * 18 << "\" font-size=\"11\">"
                << comp_names[c] << "</text>\n";
        }
    }
    out << "</svg>\n";
}

}  // namespace

void Pipeline::write_report() {
    reuse_ = true;
    ensure_expand();

    fs::path dir = fs::path(cfg_.output_dir) / "report";
    fs::create_directories(dir);

    // cluster summary
    {
        csv::Table t;
        t.header = {"cluster", "size", "silhouette", "top_sp", "top_sp_omega", "second_sp",
                    "second_sp_omega"};
        for (int k = 0; k < clusters.k; ++k) {
            const SPMixture& mix = sp_mixtures[k];
            std::vector<int> order(mix.sp_names.size());
            for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
            std::sort(order.begin(), order.end(),
                      [&](int a, int b) { return mix.omega[a] > mix.omega[b]; });
            std::vector<std::string> row = {std::to_string(k),
                                            std::to_string(clusters.members[k].size()),
                                            fmt(clusters.silhouette)};
            for (int s = 0; s < 2; ++s) {
                if (s < static_cast<int>(order.size())) {
                    row.push_back(mix.sp_names[order[s]]);
                    row.push_back(fmt(mix.omega[order[s]]));
                } else {
                    row.push_back("");
                    row.push_back("");
                }
            }
            t.rows.push_back(row);
        }
        csv::write_file((dir / "clusters.csv").string(), t);
    }

    // per-cluster edge tables
    for (int k = 0; k < clusters.k; ++k) {
        csv::Table t;
        t.header = {"source", "target", "weight"};
        for (const auto& e : causal_graphs[k].edges)
            t.rows.push_back({causal_graphs[k].feature_names[e.source],
                              causal_graphs[k].feature_names[e.target], fmt(e.weight)});
        csv::write_file((dir / ("edges_cluster" + std::to_string(k) + ".csv")).string(), t);
    }

    // NPS per hypothesis, grouped by cluster, plus component means per cluster
    std::vector<std::array<double, 6>> comp_means(clusters.k, {0, 0, 0, 0, 0, 0});
    std::vector<int> comp_counts(clusters.k, 0);
    {
        csv::Table t;
        t.header = {"cluster",  "hypothesis", "s_struct", "s_path", "s_prob",
                    "s_mb",     "s_var",      "s_lit",    "nps"};
        for (const auto& h : hypotheses) {
            auto it = nps_by_hypothesis.find(h.id);
            if (it == nps_by_hypothesis.end()) continue;
            const auto& b = it->second;
            t.rows.push_back({std::to_string(h.cluster_id), h.id, fmt(b.normalized.s_struct),
                              fmt(b.normalized.s_path), fmt(b.normalized.s_prob),
                              fmt(b.normalized.s_mb), fmt(b.normalized.s_var),
                              fmt(b.normalized.s_lit), fmt(b.nps)});
            auto arr = b.normalized.as_array();
            if (h.cluster_id < clusters.k) {
                for (int c = 0; c < 6; ++c) comp_means[h.cluster_id][c] += arr[c];
                ++comp_counts[h.cluster_id];
            }
        }
        csv::write_file((dir / "nps.csv").string(), t);
    }
    for (int k = 0; k < clusters.k; ++k)
        if (comp_counts[k] > 0)
            for (int c = 0; c < 6; ++c) comp_means[k][c] /= comp_counts[k];

    // NPS histogram over hypotheses (10 bins on [0, 1])
    {
        std::array<int, 10> bins{};
        int total = 0;
        for (const auto& [hid, b] : nps_by_hypothesis) {
            int bin = std::min(9, static_cast<int>(b.nps * 10.0));
            ++bins[static_cast<size_t>(std::max(0, bin))];
            ++total;
        }
        csv::Table t;
        t.header = {"bin_low", "bin_high", "count"};
        for (int i = 0; i < 10; ++i)
            t.rows.push_back({fmt(i / 10.0), fmt((i + 1) / 10.0), std::to_string(bins[i])});
        t.rows.push_back({"total", "", std::to_string(total)});
        csv::write_file((dir / "nps_histogram.csv").string(), t);
    }

    // Pareto table
    {
        std::set<int> on_front(front.front.begin(), front.front.end());
        csv::Table t;
        t.header = {"claim_id", "hypothesis", "subject", "relation", "object",
                    "doc_id",   "R",          "Y",       "NPS",      "on_front"};
        for (size_t i = 0; i < scored_claims.size(); ++i) {
            const auto& sc = scored_claims[i];
            t.rows.push_back({sc.claim.claim_id, sc.claim.hypothesis_id,
                              sc.claim.subject_text, sc.claim.relation, sc.claim.object_text,
                              sc.claim.doc_id, fmt(sc.relevance), fmt(sc.validation),
                              fmt(sc.nps),
                              on_front.count(static_cast<int>(i)) ? "1" : "0"});
        }
        csv::write_file((dir / "pareto.csv").string(), t);

        csv::Table ft;
        ft.header = t.header;
        for (size_t i = 0; i < scored_claims.size(); ++i)
            if (on_front.count(static_cast<int>(i))) ft.rows.push_back(t.rows[i]);
        csv::write_file((dir / "pareto_front.csv").string(), ft);
    }

    // decision log (stage warnings)
    {
        std::ofstream log((dir / "log.txt").string(), std::ios::binary);
        for (const auto& msg : warnings_.messages) log << msg << "\n";
    }

    write_pareto_svg((dir / "pareto_scatter.svg").string(), scored_claims, front.front);
    std::vector<std::string> labels;
    for (int k = 0; k < clusters.k; ++k) labels.push_back("C" + std::to_string(k));
    write_components_svg((dir / "nps_components.svg").string(), labels, comp_means);
}

}  // namespace phenokg
