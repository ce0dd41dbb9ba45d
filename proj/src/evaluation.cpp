#include "clad/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace clad {

using nlohmann::json;

std::size_t ScoredTestSet::count(int label) const {
    std::size_t c = 0;
    for (const auto& s : samples) {
        if (s.label == label) ++c;
    }
    return c;
}

double auroc(const ScoredTestSet& set) {
    std::size_t n_pos = set.count(1);
    std::size_t n_neg = set.count(0);
    if (n_pos == 0 || n_neg == 0) {
        throw std::invalid_argument("auroc: need both normal and abnormal samples");
    }
    std::size_t n = set.samples.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return set.samples[a].evidence < set.samples[b].evidence;
    });
    // rank-sum with average ranks over tie groups
    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n &&
               set.samples[order[j + 1]].evidence == set.samples[order[i]].evidence) {
            ++j;
        }
        double avg_rank = 0.5 * static_cast<double>(i + 1 + j + 1);
        for (std::size_t t = i; t <= j; ++t) {
            if (set.samples[order[t]].label == 1) pos_rank_sum += avg_rank;
        }
        i = j + 1;
    }
    double u = pos_rank_sum - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

ScoredTestSet one_class_baseline(const AutoencoderModel& ae, const std::vector<Tensor>& x_tr,
                                 const std::vector<Tensor>& x_te, const std::vector<int>& y_te) {
    if (x_te.size() != y_te.size()) {
        throw std::invalid_argument("one_class_baseline: test samples and labels differ in length");
    }
    if (x_tr.empty() || x_te.empty()) {
        throw std::invalid_argument("one_class_baseline: empty sample list");
    }
    Tensor z_tr = encode_batch(ae, x_tr);
    std::size_t d = ae.hidden_dim;
    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < x_tr.size(); ++i) {
        for (std::size_t t = 0; t < d; ++t) mean[t] += z_tr.at2(i, t);
    }
    for (double& m : mean) m /= static_cast<double>(x_tr.size());

    Tensor z_te = encode_batch(ae, x_te);
    ScoredTestSet out;
    out.samples.reserve(x_te.size());
    for (std::size_t i = 0; i < x_te.size(); ++i) {
        double acc = 0.0;
        for (std::size_t t = 0; t < d; ++t) {
            double diff = z_te.at2(i, t) - mean[t];
            acc += diff * diff;
        }
        out.samples.push_back({std::sqrt(acc), y_te[i]});
    }
    return out;
}

ThresholdSweep threshold_sweep(const ScoredTestSet& set, const std::vector<double>& delta_grid) {
    if (delta_grid.empty()) throw std::invalid_argument("threshold_sweep: empty grid");
    std::size_t n_pos = set.count(1);
    std::size_t n_neg = set.count(0);
    if (n_pos == 0 || n_neg == 0) {
        throw std::invalid_argument("threshold_sweep: need both normal and abnormal samples");
    }
    ThresholdSweep sweep;
    double best_j = -2.0;
    for (double delta : delta_grid) {
        std::size_t tp = 0, fp = 0;
        for (const auto& s : set.samples) {
            bool flagged = s.evidence >= 1.0 - delta;  // s_conf <= delta
            if (flagged && s.label == 1) ++tp;
            if (flagged && s.label == 0) ++fp;
        }
        ThresholdPoint pt;
        pt.delta = delta;
        pt.tpr = static_cast<double>(tp) / static_cast<double>(n_pos);
        pt.fpr = static_cast<double>(fp) / static_cast<double>(n_neg);
        std::size_t tn = n_neg - fp;
        pt.accuracy = static_cast<double>(tp + tn) / static_cast<double>(set.samples.size());
        sweep.points.push_back(pt);
        if (pt.tpr - pt.fpr > best_j) {
            best_j = pt.tpr - pt.fpr;
            sweep.youden = pt;
        }
    }
    return sweep;
}

Histogram evidence_histogram(const ScoredTestSet& set, std::size_t bins) {
    if (bins == 0) throw std::invalid_argument("evidence_histogram: need at least one bin");
    if (set.samples.empty()) throw std::invalid_argument("evidence_histogram: empty set");
    double lo = set.samples[0].evidence, hi = lo;
    for (const auto& s : set.samples) {
        lo = std::min(lo, s.evidence);
        hi = std::max(hi, s.evidence);
    }
    if (hi == lo) hi = lo + 1.0;
    Histogram h;
    h.bin_edges.resize(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b) {
        h.bin_edges[b] = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins);
    }
    h.normal.assign(bins, 0);
    h.abnormal.assign(bins, 0);
    for (const auto& s : set.samples) {
        std::size_t b = static_cast<std::size_t>((s.evidence - lo) / (hi - lo) * static_cast<double>(bins));
        if (b >= bins) b = bins - 1;
        (s.label == 1 ? h.abnormal : h.normal)[b]++;
    }
    return h;
}

json report_to_json(const EvaluationReport& r) {
    json j{{"format", "clad-report"},
           {"version", 1},
           {"auroc", r.auroc_value},
           {"n_normal", r.n_normal},
           {"n_abnormal", r.n_abnormal},
           {"abnormal_ratio",
            r.n_normal + r.n_abnormal == 0
                ? 0.0
                : static_cast<double>(r.n_abnormal) / static_cast<double>(r.n_normal + r.n_abnormal)},
           {"histogram",
            {{"bin_edges", r.histogram.bin_edges},
             {"normal", r.histogram.normal},
             {"abnormal", r.histogram.abnormal}}},
           {"youden",
            {{"delta", r.youden.delta},
             {"tpr", r.youden.tpr},
             {"fpr", r.youden.fpr},
             {"accuracy", r.youden.accuracy}}},
           {"config", r.config_echo},
           {"runtime_seconds", r.runtime_seconds}};
    if (r.baseline_auroc >= 0.0) j["baseline_auroc"] = r.baseline_auroc;
    return j;
}

EvaluationReport report_from_json(const json& j) {
    EvaluationReport r;
    r.auroc_value = j.at("auroc").get<double>();
    r.baseline_auroc = j.value("baseline_auroc", -1.0);
    r.n_normal = j.at("n_normal").get<std::size_t>();
    r.n_abnormal = j.at("n_abnormal").get<std::size_t>();
    r.histogram.bin_edges = j.at("histogram").at("bin_edges").get<std::vector<double>>();
    r.histogram.normal = j.at("histogram").at("normal").get<std::vector<std::size_t>>();
    r.histogram.abnormal = j.at("histogram").at("abnormal").get<std::vector<std::size_t>>();
    r.youden.delta = j.at("youden").at("delta").get<double>();
    r.youden.tpr = j.at("youden").at("tpr").get<double>();
    r.youden.fpr = j.at("youden").at("fpr").get<double>();
    r.youden.accuracy = j.at("youden").at("accuracy").get<double>();
    r.config_echo = j.value("config", json::object());
    r.runtime_seconds = j.value("runtime_seconds", 0.0);
    return r;
}

void write_scores_csv(const std::string& path, const std::vector<double>& s,
                      const std::vector<int>& predicted_class, const std::vector<int>& true_label) {
    if (s.size() != predicted_class.size() || s.size() != true_label.size()) {
        throw std::invalid_argument("write_scores_csv: column lengths differ");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << "sample_index,score,predicted_class,true_label\n";
    char buf[64];
    for (std::size_t i = 0; i < s.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", s[i]);
        out << i << "," << buf << "," << predicted_class[i] << "," << true_label[i] << "\n";
    }
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

ScoredTestSet read_scores_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line.rfind("sample_index,score", 0) != 0) {
        throw std::runtime_error("'" + path + "': missing scores CSV header");
    }
    ScoredTestSet set;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        std::size_t idx;
        double s;
        int pred, label;
        if (!(ss >> idx >> s >> pred >> label) || (label != 0 && label != 1)) {
            throw std::runtime_error("'" + path + "': malformed row at line " + std::to_string(line_no));
        }
        set.samples.push_back({1.0 - s, label});
    }
    return set;
}

}  // namespace clad
