#pragma once

// Bancor continuous token. The reserve C always equals a fixed fraction F of
// the token market cap s * P(s), which pins both price and reserve to the
// supply:
//
//     P(s) = C0 / (F s) * (s / s0)^{1/F}
//     C(s) = C0 * (s / s0)^{1/F}
//
// (C0, s0) is any reference point on the curve. Trades re-anchor at the
// current state; the genesis point is kept to check path independence.

namespace amm::bonding {

struct BondingCurveState {
    double reserve = 0.0;        // C, currency units
    double supply = 0.0;         // s, tokens
    double reserve_ratio = 1.0;  // F in (0, 1]
    double genesis_reserve = 0.0;
    double genesis_supply = 0.0;

    static BondingCurveState create(double reserve, double supply, double reserve_ratio);
    void validate() const;
};

struct TradeResult {
    BondingCurveState state;
    double tokens = 0.0;    // minted (buy) or burned (sell)
    double currency = 0.0;  // paid in (buy) or returned (sell)
};

/// Spot price P(s) from the genesis anchor.
double bonding_price(const BondingCurveState& state);

/// C(s) from the genesis anchor.
double bonding_reserve_at(const BondingCurveState& state, double supply);

/// Tokens minted for t currency: e = s0 [(t/C0 + 1)^F - 1].
double tokens_for_currency(const BondingCurveState& state, double t);
/// Currency for e tokens: t = C0 [(1 + e/s0)^{1/F} - 1]. Negative e is a sale
/// and yields negative t.
double currency_for_tokens(const BondingCurveState& state, double e);

TradeResult bonding_buy(const BondingCurveState& state, double t);
TradeResult bonding_sell(const BondingCurveState& state, double e);

/// |C - F s P(s)| / C
double reserve_identity_deviation(const BondingCurveState& state);

}  // namespace amm::bonding
