#pragma once

#include <json.hpp>
#include <string>

#include "csa/auction.hpp"
#include "csa/star.hpp"

namespace csa {

using Json = nlohmann::ordered_json;

// Instance files: {"items":[...], "bids":[{"buyer","amount","bundle"},...]}
// with amounts as decimal strings.
AuctionInstance instance_from_json(const Json& j);
Json instance_to_json(const AuctionInstance& instance);

// Star files: {"bundles":[{"leaf_bids":[...],"leaf_losing":[...],
// "bundle_bid":"13"},...],"item_zero_losing":"3"}.
StarInstance star_from_json(const Json& j);
Json star_to_json(const StarInstance& star);

bool looks_like_star(const Json& j);

Json load_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

// Computed prices: decimal with at most 9 fractional digits, trimmed.
std::string format_price(double value);
// Residuals and other tiny magnitudes: scientific notation.
std::string format_residual(double value);

}  // namespace csa
