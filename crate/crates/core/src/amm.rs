//! Constant-product (`x · y = k`) liquidity pool math.
//!
//! A pool pairs a meme token (`reserve_token`, x) with a quote asset
//! (`reserve_quote`, y). The spot price is `y / x` quote per token. Swaps are
//! pure: each returns the amount moved and the resulting pool, leaving the
//! original untouched. Fees are taken from the input leg and stay in the
//! pool, so `k` is conserved exactly only at zero fee.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AmmError {
    #[error("reserves must be finite and strictly positive (token {token}, quote {quote})")]
    InvalidReserves { token: f64, quote: f64 },
    #[error("fee fraction {0} outside [0, 0.01]")]
    InvalidFee(f64),
    #[error("swap amount must be finite and positive, got {0}")]
    NonPositiveAmount(f64),
    #[error("requested {requested} exceeds pool reserve {reserve}")]
    DrainsPool { requested: f64, reserve: f64 },
    #[error("price multiplier must exceed 1, got {0}")]
    InvalidMultiplier(f64),
}

pub const MAX_FEE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoolState {
    reserve_token: f64,
    reserve_quote: f64,
    fee_fraction: f64,
}

fn positive(amount: f64) -> Result<f64, AmmError> {
    if amount.is_finite() && amount > 0.0 {
        Ok(amount)
    } else {
        Err(AmmError::NonPositiveAmount(amount))
    }
}

impl PoolState {
    pub fn new(reserve_token: f64, reserve_quote: f64, fee_fraction: f64) -> Result<Self, AmmError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(reserve_token) || !ok(reserve_quote) {
            return Err(AmmError::InvalidReserves { token: reserve_token, quote: reserve_quote });
        }
        if !(0.0..=MAX_FEE).contains(&fee_fraction) {
            return Err(AmmError::InvalidFee(fee_fraction));
        }
        Ok(Self { reserve_token, reserve_quote, fee_fraction })
    }

    /// Fee-free pool.
    pub fn frictionless(reserve_token: f64, reserve_quote: f64) -> Result<Self, AmmError> {
        Self::new(reserve_token, reserve_quote, 0.0)
    }

    pub fn reserve_token(&self) -> f64 {
        self.reserve_token
    }

    pub fn reserve_quote(&self) -> f64 {
        self.reserve_quote
    }

    pub fn fee_fraction(&self) -> f64 {
        self.fee_fraction
    }

    pub fn k(&self) -> f64 {
        self.reserve_token * self.reserve_quote
    }

    pub fn spot_price(&self) -> f64 {
        self.reserve_quote / self.reserve_token
    }

    fn after_fee(&self, amount: f64) -> f64 {
        amount * (1.0 - self.fee_fraction)
    }

    /// Buy: pay `quote_in` and receive tokens.
    pub fn swap_quote_in(&self, quote_in: f64) -> Result<(f64, PoolState), AmmError> {
        let dq = positive(quote_in)?;
        let new_token = self.k() / (self.reserve_quote + self.after_fee(dq));
        let tokens_out = self.reserve_token - new_token;
        let next = PoolState { reserve_token: new_token, reserve_quote: self.reserve_quote + dq, ..*self };
        Ok((tokens_out, next))
    }

    /// Buy exactly `tokens_out`; returns the (pre-fee) quote the buyer pays.
    pub fn swap_exact_token_out(&self, tokens_out: f64) -> Result<(f64, PoolState), AmmError> {
        let dx = positive(tokens_out)?;
        if dx >= self.reserve_token {
            return Err(AmmError::DrainsPool { requested: dx, reserve: self.reserve_token });
        }
        let new_token = self.reserve_token - dx;
        let effective = self.k() / new_token - self.reserve_quote;
        let quote_in = effective / (1.0 - self.fee_fraction);
        let next = PoolState { reserve_token: new_token, reserve_quote: self.reserve_quote + quote_in, ..*self };
        Ok((quote_in, next))
    }

    /// Sell: deposit `tokens_in` and receive quote.
    pub fn swap_token_in(&self, tokens_in: f64) -> Result<(f64, PoolState), AmmError> {
        let dx = positive(tokens_in)?;
        let new_quote = self.k() / (self.reserve_token + self.after_fee(dx));
        let quote_out = self.reserve_quote - new_quote;
        let next = PoolState { reserve_token: self.reserve_token + dx, reserve_quote: new_quote, ..*self };
        Ok((quote_out, next))
    }

    /// Sell enough tokens to receive exactly `quote_out`; returns the tokens deposited.
    pub fn swap_exact_quote_out(&self, quote_out: f64) -> Result<(f64, PoolState), AmmError> {
        let dq = positive(quote_out)?;
        if dq >= self.reserve_quote {
            return Err(AmmError::DrainsPool { requested: dq, reserve: self.reserve_quote });
        }
        let new_quote = self.reserve_quote - dq;
        let effective = self.k() / new_quote - self.reserve_token;
        let tokens_in = effective / (1.0 - self.fee_fraction);
        let next = PoolState { reserve_token: self.reserve_token + tokens_in, reserve_quote: new_quote, ..*self };
        Ok((tokens_in, next))
    }

    /// Quote a fee-free buy must pay to multiply the spot price by `multiplier`.
    ///
    /// From `x·y = k` and `p = y/x`, the post-trade quote reserve is `y·√m`.
    /// Fees are ignored; on a pool with a fee the same payment lands slightly
    /// short of the target.
    pub fn cost_to_multiply_price(&self, multiplier: f64) -> Result<f64, AmmError> {
        if !(multiplier.is_finite() && multiplier > 1.0) {
            return Err(AmmError::InvalidMultiplier(multiplier));
        }
        Ok(self.reserve_quote * (multiplier.sqrt() - 1.0))
    }

    /// Tokens a fee-free sell must deposit to divide the spot price by `divisor`.
    pub fn tokens_to_divide_price(&self, divisor: f64) -> Result<f64, AmmError> {
        if !(divisor.is_finite() && divisor > 1.0) {
            return Err(AmmError::InvalidMultiplier(divisor));
        }
        Ok(self.reserve_token * (divisor.sqrt() - 1.0))
    }

    pub fn with_fee(&self, fee_fraction: f64) -> Result<Self, AmmError> {
        Self::new(self.reserve_token, self.reserve_quote, fee_fraction)
    }
}
