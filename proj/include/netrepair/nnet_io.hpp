#pragma once

#include <iosfwd>
#include <string>

#include "netrepair/network.hpp"

namespace netrepair {

// Text network format used by the public ACAS Xu distribution: '//' comment
// lines, then numLayers,inputSize,outputSize,maxLayerSize / layer sizes /
// a legacy flag / input mins / input maxes / means / ranges, followed per
// layer by the weight matrix rows and one bias per line, comma separated.
//
// Non-relu activations are recorded in a comment line the reader understands:
//   // netrepair-activation: <relu|tanh|leaky_relu|elu> <alpha>
// Files without the marker are read as relu, matching the original format.
Network parse_nnet(std::istream& in);
Network load_nnet(const std::string& path);

void serialize_nnet(const Network& net, std::ostream& out);
void save_nnet(const Network& net, const std::string& path);

} // namespace netrepair
