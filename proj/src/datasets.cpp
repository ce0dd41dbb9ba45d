#include "clad/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "clad/rng.hpp"

namespace clad {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::uint32_t read_be32(std::istream& in, const std::string& path, const std::string& what) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) {
        throw std::runtime_error("'" + path + "': truncated header while reading " + what);
    }
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
           std::uint32_t(b[3]);
}

void write_be32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw std::runtime_error("cannot open '" + images_path + "'");
    std::uint32_t magic = read_be32(img, images_path, "magic");
    if ((magic & 0xFFFFFF00) != 0x00000800 || ((magic >> 8) & 0xFF) != 0x08) {
        throw std::runtime_error("'" + images_path + "': bad magic (expected IDX ubyte container)");
    }
    if (magic != kImagesMagic) {
        throw std::runtime_error("'" + images_path + "': wrong dimension count in magic (expected 3-d image data)");
    }
    std::uint32_t count = read_be32(img, images_path, "item count");
    std::uint32_t rows = read_be32(img, images_path, "row count");
    std::uint32_t cols = read_be32(img, images_path, "column count");
    if (rows == 0 || cols == 0) {
        throw std::runtime_error("'" + images_path + "': zero image dimensions");
    }
    std::size_t pixels = std::size_t(count) * rows * cols;
    std::vector<unsigned char> payload(pixels);
    if (!img.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(pixels))) {
        throw std::runtime_error("'" + images_path + "': truncated image payload (" +
                                 std::to_string(img.gcount()) + " of " + std::to_string(pixels) +
                                 " bytes)");
    }

    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw std::runtime_error("cannot open '" + labels_path + "'");
    std::uint32_t lmagic = read_be32(lab, labels_path, "magic");
    if (lmagic != kLabelsMagic) {
        throw std::runtime_error("'" + labels_path + "': bad magic (expected IDX label container)");
    }
    std::uint32_t lcount = read_be32(lab, labels_path, "item count");
    if (lcount != count) {
        throw std::runtime_error("count mismatch: '" + images_path + "' declares " + std::to_string(count) +
                                 " items but '" + labels_path + "' declares " + std::to_string(lcount));
    }
    std::vector<unsigned char> label_bytes(lcount);
    if (!lab.read(reinterpret_cast<char*>(label_bytes.data()), static_cast<std::streamsize>(lcount))) {
        throw std::runtime_error("'" + labels_path + "': truncated label payload (" +
                                 std::to_string(lab.gcount()) + " of " + std::to_string(lcount) +
                                 " bytes)");
    }

    LabeledDataset ds;
    ds.samples.reserve(count);
    ds.labels.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        Tensor t({rows, cols});
        const unsigned char* src = payload.data() + std::size_t(i) * rows * cols;
        for (std::size_t p = 0; p < std::size_t(rows) * cols; ++p) {
            t[p] = static_cast<double>(src[p]) / 255.0;
        }
        ds.samples.push_back(std::move(t));
        ds.labels.push_back(static_cast<int>(label_bytes[i]));
    }
    return ds;
}

void write_idx(const LabeledDataset& ds, const std::string& images_path,
               const std::string& labels_path) {
    if (ds.samples.empty()) throw std::invalid_argument("write_idx: empty dataset");
    if (ds.samples.front().rank() != 2) {
        throw std::invalid_argument("write_idx: samples must be (rows, cols)");
    }
    std::uint32_t rows = static_cast<std::uint32_t>(ds.samples.front().dim(0));
    std::uint32_t cols = static_cast<std::uint32_t>(ds.samples.front().dim(1));

    std::ofstream img(images_path, std::ios::binary);
    if (!img) throw std::runtime_error("cannot open '" + images_path + "' for writing");
    write_be32(img, kImagesMagic);
    write_be32(img, static_cast<std::uint32_t>(ds.samples.size()));
    write_be32(img, rows);
    write_be32(img, cols);
    for (const Tensor& t : ds.samples) {
        for (double v : t.data) {
            double q = std::clamp(v, 0.0, 1.0) * 255.0;
            unsigned char b = static_cast<unsigned char>(std::lround(q));
            img.put(static_cast<char>(b));
        }
    }
    if (!img) throw std::runtime_error("write failed for '" + images_path + "'");

    std::ofstream lab(labels_path, std::ios::binary);
    if (!lab) throw std::runtime_error("cannot open '" + labels_path + "' for writing");
    write_be32(lab, kLabelsMagic);
    write_be32(lab, static_cast<std::uint32_t>(ds.labels.size()));
    for (int l : ds.labels) lab.put(static_cast<char>(static_cast<unsigned char>(l)));
    if (!lab) throw std::runtime_error("write failed for '" + labels_path + "'");
}

LabeledDataset synth_gaussian_mixture(const std::vector<GaussianMode>& modes, std::uint64_t seed) {
    if (modes.empty()) throw std::invalid_argument("synth_gaussian_mixture: no modes");
    std::size_t dim = modes.front().mean.size();
    for (const GaussianMode& m : modes) {
        if (m.mean.size() != dim || m.var_diag.size() != dim) {
            throw std::invalid_argument("synth_gaussian_mixture: inconsistent mode dimensions");
        }
        for (double v : m.var_diag) {
            if (!(v > 0.0)) throw std::invalid_argument("synth_gaussian_mixture: variances must be positive");
        }
    }
    Rng rng(seed);
    LabeledDataset ds;
    for (const GaussianMode& m : modes) {
        for (std::size_t i = 0; i < m.count; ++i) {
            Tensor t({dim});
            for (std::size_t d = 0; d < dim; ++d) {
                t[d] = m.mean[d] + std::sqrt(m.var_diag[d]) * rng.normal();
            }
            ds.samples.push_back(std::move(t));
            ds.labels.push_back(m.label);
        }
    }
    return ds;
}

ScenarioBundle build_scenario(const LabeledDataset& train, const LabeledDataset& test,
                              const ScenarioSpec& spec) {
    if (spec.normal_labels.empty()) {
        throw std::invalid_argument("build_scenario: empty normal label set");
    }
    if (train.samples.size() != train.labels.size() || test.samples.size() != test.labels.size()) {
        throw std::invalid_argument("build_scenario: samples and labels misaligned");
    }
    std::set<int> normal(spec.normal_labels.begin(), spec.normal_labels.end());
    for (int l : normal) {
        bool in_train = std::find(train.labels.begin(), train.labels.end(), l) != train.labels.end();
        bool in_test = std::find(test.labels.begin(), test.labels.end(), l) != test.labels.end();
        if (!in_train || !in_test) {
            throw std::invalid_argument("build_scenario: normal label " + std::to_string(l) +
                                        " missing from the " + std::string(in_train ? "test" : "train") +
                                        " split");
        }
    }

    ScenarioBundle bundle;
    bundle.scenario.name = spec.name;
    bundle.oracle.normal_labels = spec.normal_labels;
    for (std::size_t i = 0; i < train.samples.size(); ++i) {
        if (normal.count(train.labels[i])) {
            bundle.scenario.x_train.push_back(train.samples[i]);
            bundle.oracle.train_latent.push_back(train.labels[i]);
        }
    }
    bool saw_abnormal = false;
    for (std::size_t i = 0; i < test.samples.size(); ++i) {
        bundle.scenario.x_test.push_back(test.samples[i]);
        int y = normal.count(test.labels[i]) ? 0 : 1;
        saw_abnormal = saw_abnormal || y == 1;
        bundle.scenario.y_test.push_back(y);
        bundle.oracle.test_latent.push_back(test.labels[i]);
    }
    if (bundle.scenario.x_train.empty()) {
        throw std::invalid_argument("build_scenario: no training samples carry a normal label");
    }
    if (!saw_abnormal) {
        throw std::invalid_argument("build_scenario: normal set covers the whole test label alphabet; "
                                    "no abnormal class remains");
    }
    return bundle;
}

ScenarioSpec CatalogEntry::to_spec() const {
    if (labels.empty()) {
        throw std::invalid_argument("scenario " + dataset + "/" + code +
                                    " ships class names only; map them to your imported label ids");
    }
    return {code, dataset, labels};
}

const std::vector<CatalogEntry>& builtin_scenario_tables() {
    static const std::vector<CatalogEntry> catalog = {
        {"mnist", "CUR", "Curly", {0, 3, 8}, {"0", "3", "8"}},
        {"mnist", "STR", "Straight", {1, 4, 7}, {"1", "4", "7"}},
        {"mnist", "MIX", "Mixed", {2, 5, 6, 9}, {"2", "5", "6", "9"}},
        {"gtsrb",
         "SPDL",
         "Speed Limit",
         {0, 1, 2, 3, 4, 5, 7, 8},
         {"Speed limit (20km/h)", "Speed limit (30km/h)", "Speed limit (50km/h)",
          "Speed limit (60km/h)", "Speed limit (70km/h)", "Speed limit (80km/h)",
          "Speed limit (100km/h)", "Speed limit (120km/h)"}},
        {"gtsrb",
         "INST",
         "Driving Instruction",
         {9, 10, 15, 16},
         {"No passing", "No passing for vehicles over 3.5 metric tons", "No vehicles",
          "Vehicles over 3.5 metric tons prohibited"}},
        {"gtsrb",
         "WARN",
         "Warning",
         {11, 18, 19, 20, 21, 22, 23, 24, 25, 26, 27, 28, 29, 30, 31},
         {"Right-of-way at the next intersection", "General caution", "Dangerous curve to the left",
          "Dangerous curve to the right", "Double curve", "Bumpy road", "Slippery road",
          "Road narrows on the right", "Road work", "Traffic signals", "Pedestrians",
          "Children crossing", "Bicycles crossing", "Beware of ice/snow", "Wild animals crossing"}},
        {"gtsrb",
         "DIRC",
         "Direction",
         {33, 34, 35, 36, 37, 38, 39, 40},
         {"Turn right ahead", "Turn left ahead", "Ahead only", "Go straight or right",
          "Go straight or left", "Keep right", "Keep left", "Roundabout mandatory"}},
        {"gtsrb", "SPEC", "Special Sign", {12, 13, 14, 17}, {"Priority Road", "Yield", "Stop", "No entry"}},
        {"gtsrb",
         "REGN",
         "Regulation",
         {6, 32, 41, 42},
         {"End of speed limit (80km/h)", "End of all speed and passing limits", "End of no passing",
          "End of no passing by vehicles over 3.5 metrics tons"}},
        {"cifar10", "THG", "Thing", {0, 1, 8, 9}, {"Airplane", "Automobile", "Ship", "Truck"}},
        {"cifar10", "LIV", "Living", {2, 3, 4, 5, 6, 7}, {"Bird", "Cat", "Deer", "Dog", "Frog", "Horse"}},
        {"tiny-imagenet",
         "ANML",
         "Animal",
         {},
         {"Golden retriever", "Chihuahua", "German shepherd", "Labrador retriever", "Standard poodle",
          "Yorkshire terrier", "Cougar/Puma", "Persian cat"}},
        {"tiny-imagenet",
         "ISCT",
         "Insect",
         {},
         {"Dragonfly", "Roach", "Bee", "Grasshopper", "Fly", "Mantis", "Monarch butterfly",
          "Sulphur butterfly"}},
        {"tiny-imagenet",
         "ISTM",
         "Instrument",
         {},
         {"Water jug", "Beer bottle", "Tea pot", "Pop bottle/Soda bottle", "Beaker", "Rugby ball",
          "Volley ball", "Pill bottle"}},
        {"tiny-imagenet",
         "STRT",
         "Structure",
         {},
         {"Triumphal arch", "Suspension bridge", "Fountain", "Viaduct", "Bannister",
          "Steel arch bridge", "Obelisk", "Beacon"}},
        {"tiny-imagenet",
         "VHCL",
         "Vehicle",
         {},
         {"School bus", "Trolly bus", "Sports car", "bullet train", "Convertible", "Tractor",
          "Police van", "beach wagon"}},
    };
    return catalog;
}

const CatalogEntry& find_catalog_entry(const std::string& dataset, const std::string& code) {
    std::string known;
    for (const CatalogEntry& e : builtin_scenario_tables()) {
        if (e.dataset == dataset && e.code == code) return e;
        if (e.dataset == dataset) known += (known.empty() ? "" : ", ") + e.code;
    }
    throw std::invalid_argument("no scenario '" + code + "' for dataset '" + dataset +
                                "' (known: " + (known.empty() ? "none" : known) + ")");
}

LabeledDataset import_labeled_vectors(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    LabeledDataset ds;
    std::string line;
    std::size_t line_no = 0;
    std::size_t dim = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line_no == 1 && line.rfind("label", 0) == 0) continue;  // optional header
        std::vector<double> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                double v = std::stod(cell, &used);
                while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
                if (used != cell.size()) throw std::invalid_argument("trailing characters");
                cells.push_back(v);
            } catch (const std::exception&) {
                throw std::runtime_error("'" + path + "' line " + std::to_string(line_no) +
                                         ": non-numeric cell '" + cell + "'");
            }
        }
        if (cells.size() < 2) {
            throw std::runtime_error("'" + path + "' line " + std::to_string(line_no) +
                                     ": need a label and at least one value");
        }
        double label_cell = cells.front();
        int label = static_cast<int>(std::lround(label_cell));
        if (std::fabs(label_cell - label) > 1e-9) {
            throw std::runtime_error("'" + path + "' line " + std::to_string(line_no) +
                                     ": label is not an integer");
        }
        std::vector<double> values(cells.begin() + 1, cells.end());
        if (dim == 0) {
            dim = values.size();
        } else if (values.size() != dim) {
            throw std::runtime_error("'" + path + "' line " + std::to_string(line_no) + ": ragged row (" +
                                     std::to_string(values.size()) + " values, expected " +
                                     std::to_string(dim) + ")");
        }
        ds.samples.push_back(Tensor({dim}, std::move(values)));
        ds.labels.push_back(label);
    }
    if (ds.samples.empty()) throw std::runtime_error("'" + path + "': no data rows");
    return ds;
}

void export_labeled_vectors(const LabeledDataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    char buf[64];
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        out << ds.labels[i];
        for (double v : ds.samples[i].data) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out << "," << buf;
        }
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace clad
