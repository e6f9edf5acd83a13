#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "foveal/byte_io.hpp"
#include "foveal/errors.hpp"
#include "foveal/scnn.hpp"

namespace foveal {

namespace {

std::vector<std::vector<std::uint32_t>> shape_table(const ScnnParams& p) {
    std::vector<std::vector<std::uint32_t>> shapes;
    for (const ConvLayer& c : p.conv) {
        shapes.push_back({static_cast<std::uint32_t>(c.out_channels), static_cast<std::uint32_t>(c.in_channels),
                          kConvKernel, kConvKernel});
        shapes.push_back({static_cast<std::uint32_t>(c.out_channels)});
    }
    shapes.push_back({static_cast<std::uint32_t>(p.dense.inputs), static_cast<std::uint32_t>(p.dense.outputs)});
    shapes.push_back({static_cast<std::uint32_t>(p.dense.outputs)});
    return shapes;
}

std::string describe(const std::vector<std::uint32_t>& shape) {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
    return s + ")";
}

}  // namespace

std::uint64_t write_checkpoint(const ScnnParams& params, std::ostream& sink) {
    detail::LeWriter w(sink);
    w.bytes("SCN1", 4);
    w.put<std::uint32_t>(params.input_size);
    w.put<std::uint32_t>(params.input_size);
    const auto shapes = shape_table(params);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(shapes.size()));
    for (const auto& s : shapes) {
        w.put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
        for (std::uint32_t d : s) w.put<std::uint32_t>(d);
    }
    for (auto t : params.tensors())
        for (double v : t) w.put_f32(static_cast<float>(v));
    return w.written();
}

ScnnParams read_checkpoint(std::istream& source) {
    detail::LeReader r(source);
    r.expect_magic("SCN1");
    const auto h = r.get<std::uint32_t>("input height");
    const auto wdt = r.get<std::uint32_t>("input width");
    if (h != wdt || (h != kFullGeometry && h != kReducedGeometry))
        throw ValidationError("checkpoint geometry " + std::to_string(h) + "x" + std::to_string(wdt) +
                              " is neither 128x128 nor the reduced 32x32");
    ScnnParams p = ScnnParams::zeros(h);
    const auto expected = shape_table(p);
    const auto n = r.get<std::uint32_t>("tensor count");
    if (n != expected.size())
        throw ValidationError("checkpoint has " + std::to_string(n) + " tensors, expected " +
                              std::to_string(expected.size()));
    for (std::size_t t = 0; t < expected.size(); ++t) {
        const auto rank = r.get<std::uint32_t>("tensor rank");
        if (rank > 8) throw ValidationError("implausible tensor rank " + std::to_string(rank));
        std::vector<std::uint32_t> shape(rank);
        for (auto& d : shape) d = r.get<std::uint32_t>("tensor dim");
        if (shape != expected[t])
            throw ValidationError("tensor " + std::to_string(t) + " has shape " + describe(shape) + ", expected " +
                                  describe(expected[t]));
    }
    for (auto t : p.tensors())
        for (double& v : t) v = r.get_f32("weights");
    return p;
}

}  // namespace foveal
