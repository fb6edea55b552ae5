#include "amm/bonding_curve.hpp"

#include <cmath>

#include "amm/error.hpp"

namespace amm::bonding {

BondingCurveState BondingCurveState::create(double reserve, double supply, double reserve_ratio) {
    BondingCurveState s{reserve, supply, reserve_ratio, reserve, supply};
    s.validate();
    return s;
}

void BondingCurveState::validate() const {
    if (!(reserve > 0.0) || !(supply > 0.0)) fail(ErrorCode::NonPositiveState, "reserve and supply must be positive");
    if (!(genesis_reserve > 0.0) || !(genesis_supply > 0.0)) fail(ErrorCode::NonPositiveState, "anchor must be positive");
    if (!(reserve_ratio > 0.0 && reserve_ratio <= 1.0)) fail(ErrorCode::InvalidArgument, "reserve ratio must lie in (0,1]");
}

double bonding_reserve_at(const BondingCurveState& state, double supply) {
    if (!(supply > 0.0)) fail(ErrorCode::NonPositiveState, "supply must be positive");
    return state.genesis_reserve * std::pow(supply / state.genesis_supply, 1.0 / state.reserve_ratio);
}

double bonding_price(const BondingCurveState& state) {
    state.validate();
    const double f = state.reserve_ratio;
    return state.genesis_reserve / (f * state.supply) * std::pow(state.supply / state.genesis_supply, 1.0 / f);
}

double tokens_for_currency(const BondingCurveState& state, double t) {
    state.validate();
    if (!(t >= 0.0)) fail(ErrorCode::NonPositiveState, "currency spent must be non-negative");
    return state.supply * std::expm1(state.reserve_ratio * std::log1p(t / state.reserve));
}

double currency_for_tokens(const BondingCurveState& state, double e) {
    state.validate();
    if (!(e > -state.supply)) fail(ErrorCode::SupplyDepletion, "cannot burn the whole supply");
    return state.reserve * std::expm1(std::log1p(e / state.supply) / state.reserve_ratio);
}

TradeResult bonding_buy(const BondingCurveState& state, double t) {
    const double e = tokens_for_currency(state, t);
    TradeResult out{state, e, t};
    out.state.reserve += t;
    out.state.supply += e;
    return out;
}

TradeResult bonding_sell(const BondingCurveState& state, double e) {
    if (!(e >= 0.0)) fail(ErrorCode::NonPositiveState, "tokens burned must be non-negative");
    if (!(e < state.supply)) fail(ErrorCode::SupplyDepletion, "cannot burn the whole supply");
    const double t = -currency_for_tokens(state, -e);
    TradeResult out{state, e, t};
    out.state.reserve -= t;
    out.state.supply -= e;
    return out;
}

double reserve_identity_deviation(const BondingCurveState& state) {
    return std::abs(state.reserve - state.reserve_ratio * state.supply * bonding_price(state)) / state.reserve;
}

}  // namespace amm::bonding
