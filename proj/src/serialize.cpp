#include "clad/serialize.hpp"

#include <fstream>
#include <stdexcept>

namespace clad {

using nlohmann::json;

json tensor_to_json(const Tensor& t) {
    return json{{"shape", t.shape}, {"data", t.data}};
}

Tensor tensor_from_json(const json& j) {
    return Tensor(j.at("shape").get<std::vector<std::size_t>>(),
                  j.at("data").get<std::vector<double>>());
}

json network_to_json(const Network& net) {
    json layers = json::array();
    for (std::size_t i = 0; i < net.layer_count(); ++i) {
        const Layer& l = net.layer(i);
        json jl{{"kind", layer_kind_name(l.kind())}};
        switch (l.kind()) {
            case LayerKind::dense: {
                const auto& d = static_cast<const DenseLayer&>(l);
                jl["weight"] = tensor_to_json(d.weight());
                jl["bias"] = tensor_to_json(*d.params()[1]);
                break;
            }
            case LayerKind::conv2d: {
                const auto& c = static_cast<const Conv2dLayer&>(l);
                jl["stride"] = c.stride();
                jl["weight"] = tensor_to_json(*c.params()[0]);
                jl["bias"] = tensor_to_json(*c.params()[1]);
                break;
            }
            case LayerKind::dropout: {
                jl["keep_prob"] = static_cast<const DropoutLayer&>(l).keep_prob();
                break;
            }
            default:
                break;
        }
        layers.push_back(std::move(jl));
    }
    return json{{"mode", net.mode() == Mode::train ? "train" : "eval"}, {"layers", layers}};
}

Network network_from_json(const json& j) {
    Network net;
    net.set_mode(j.at("mode").get<std::string>() == "train" ? Mode::train : Mode::eval);
    for (const json& jl : j.at("layers")) {
        LayerKind kind = layer_kind_from_name(jl.at("kind").get<std::string>());
        switch (kind) {
            case LayerKind::dense:
                net.add(std::make_unique<DenseLayer>(tensor_from_json(jl.at("weight")),
                                                     tensor_from_json(jl.at("bias"))));
                break;
            case LayerKind::conv2d:
                net.add(std::make_unique<Conv2dLayer>(jl.at("stride").get<std::size_t>(),
                                                      tensor_from_json(jl.at("weight")),
                                                      tensor_from_json(jl.at("bias"))));
                break;
            case LayerKind::relu:
                net.add(std::make_unique<ReluLayer>());
                break;
            case LayerKind::sigmoid:
                net.add(std::make_unique<SigmoidLayer>());
                break;
            case LayerKind::dropout:
                net.add(std::make_unique<DropoutLayer>(jl.at("keep_prob").get<double>()));
                break;
        }
    }
    return net;
}

void save_json_file(const json& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << j.dump(1, '\t') << "\n";
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

json load_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("malformed JSON in '" + path + "': " + e.what());
    }
    return j;
}

}  // namespace clad
