#include "csa/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "csa/errors.hpp"

namespace csa {

namespace {

Money money_field(const Json& j, const char* what) {
  if (!j.is_string())
    throw InvalidInputError(std::string(what) + " must be a decimal string");
  return Money::parse(j.get<std::string>());
}

}  // namespace

AuctionInstance instance_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("items") || !j.contains("bids"))
    throw InvalidInputError("instance JSON needs 'items' and 'bids'");
  AuctionInstance inst;
  for (const Json& it : j.at("items")) inst.items.push_back(it.get<std::string>());
  for (const Json& b : j.at("bids")) {
    Bid bid;
    bid.buyer = b.at("buyer").get<std::string>();
    bid.amount = money_field(b.at("amount"), "bid amount");
    for (const Json& it : b.at("bundle")) bid.bundle.push_back(it.get<std::string>());
    std::sort(bid.bundle.begin(), bid.bundle.end());
    inst.bids.push_back(std::move(bid));
  }
  inst.validate();
  return inst;
}

Json instance_to_json(const AuctionInstance& instance) {
  Json j;
  j["items"] = instance.items;
  Json bids = Json::array();
  for (const Bid& b : instance.bids) {
    Json bid;
    bid["buyer"] = b.buyer;
    bid["amount"] = b.amount.to_string();
    bid["bundle"] = b.bundle;
    bids.push_back(std::move(bid));
  }
  j["bids"] = std::move(bids);
  return j;
}

StarInstance star_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("bundles") || !j.contains("item_zero_losing"))
    throw InvalidInputError("star JSON needs 'bundles' and 'item_zero_losing'");
  StarInstance star;
  star.losing_hub_bid = money_field(j.at("item_zero_losing"), "item_zero_losing");
  for (const Json& b : j.at("bundles")) {
    Spoke spoke;
    for (const Json& v : b.at("leaf_bids")) spoke.winning_leaf_bids.push_back(money_field(v, "leaf bid"));
    for (const Json& v : b.at("leaf_losing"))
      spoke.losing_leaf_bids.push_back(money_field(v, "losing leaf bid"));
    spoke.bundle_bid = money_field(b.at("bundle_bid"), "bundle bid");
    star.spokes.push_back(std::move(spoke));
  }
  star.validate();
  return star;
}

Json star_to_json(const StarInstance& star) {
  Json j;
  Json bundles = Json::array();
  for (const Spoke& sp : star.spokes) {
    Json b;
    Json wins = Json::array(), losses = Json::array();
    for (Money m : sp.winning_leaf_bids) wins.push_back(m.to_string());
    for (Money m : sp.losing_leaf_bids) losses.push_back(m.to_string());
    b["leaf_bids"] = std::move(wins);
    b["leaf_losing"] = std::move(losses);
    b["bundle_bid"] = sp.bundle_bid.to_string();
    bundles.push_back(std::move(b));
  }
  j["bundles"] = std::move(bundles);
  j["item_zero_losing"] = star.losing_hub_bid.to_string();
  return j;
}

bool looks_like_star(const Json& j) { return j.is_object() && j.contains("bundles"); }

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open input file '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError("JSON parse error in '" + path + "': " + e.what());
  }
  return j;
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw InvalidInputError("cannot open output file '" + path + "'");
  out << j.dump(2) << "\n";
}

std::string format_price(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9f", value);
  std::string s(buf);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

std::string format_residual(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3e", value);
  return buf;
}

}  // namespace csa
