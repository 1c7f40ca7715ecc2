//! Resource model shared by every other module: requests, the gNodeB resource
//! pool, grants, and the link-rate arithmetic that converts a rate demand into
//! a resource-block count.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default per-RB rate constant in bit/s (QPSK over a 10 MHz carrier).
pub const DEFAULT_C: f64 = 12.59e6;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("snr must be positive, got {0}")]
    NonPositiveSnr(f64),
    #[error("fraction must lie in [0, 1], got {0}")]
    FractionOutOfRange(f64),
    #[error("allocation infeasible for request {0:?}")]
    Infeasible(RequestId),
    #[error("release would push free resources above the pool total")]
    ReleaseOverflow,
    #[error("pool accounting mismatch: {0}")]
    Accounting(String),
}

/// Unique identifier for a request, real or fake.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RequestId(pub u64);

/// Hands out request ids in strictly increasing order.
#[derive(Debug, Default, Clone)]
pub struct RequestIdGen {
    next: u64,
}

impl RequestIdGen {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh(&mut self) -> RequestId {
        let id = RequestId(self.next);
        self.next += 1;
        id
    }
}

/// Fraction of a unit budget (processing or communication power), stored in
/// integer billionths so allocate/release bookkeeping is exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PowerShare(u32);

impl PowerShare {
    pub const SCALE: u32 = 1_000_000_000;
    pub const ZERO: PowerShare = PowerShare(0);
    pub const FULL: PowerShare = PowerShare(Self::SCALE);

    /// Quantizes a fraction in [0, 1] to the nearest representable share.
    pub fn from_fraction(f: f64) -> Result<Self, ModelError> {
        if !(0.0..=1.0).contains(&f) {
            return Err(ModelError::FractionOutOfRange(f));
        }
        Ok(PowerShare((f * Self::SCALE as f64).round() as u32))
    }

    pub fn fraction(self) -> f64 {
        self.0 as f64 / Self::SCALE as f64
    }

    pub fn units(self) -> u32 {
        self.0
    }

    pub fn checked_sub(self, other: PowerShare) -> Option<PowerShare> {
        self.0.checked_sub(other.0).map(PowerShare)
    }

    pub fn checked_add(self, other: PowerShare) -> Option<PowerShare> {
        self.0.checked_add(other.0).map(PowerShare)
    }

    /// Maps the share onto one of `bins` equal-width bins (full budget lands
    /// in the last bin).
    pub fn bin(self, bins: u32) -> u32 {
        ((self.0 as u64 * bins as u64 / Self::SCALE as u64) as u32).min(bins - 1)
    }
}

/// Who issued a request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Ue(u32),
    Adversary,
}

/// A service request pending at the gNodeB.
#[derive(Debug, Clone, PartialEq)]
pub struct Request {
    pub id: RequestId,
    pub origin: Origin,
    /// QoE weight, the reward collected if the request is served.
    pub weight: u32,
    /// Minimum downlink rate demand in bit/s.
    pub min_rate: f64,
    pub min_processing: PowerShare,
    pub min_comm_power: PowerShare,
    /// Linear (not dB) signal-to-noise ratio of the requesting link.
    pub snr: f64,
    /// Number of slots a grant occupies resources once service starts.
    pub lifetime: u64,
    pub arrival_slot: u64,
    /// Last slot (inclusive) at which service may start.
    pub deadline_slot: u64,
}

impl Request {
    pub fn is_fake(&self) -> bool {
        self.origin == Origin::Adversary
    }

    /// Resource blocks needed to meet `min_rate` on this request's link.
    pub fn needed_rbs(&self, link: &LinkParams) -> u32 {
        let ber = ber_from_snr(self.snr).expect("request snr must be positive");
        link.min_rbs_for_rate(self.min_rate, ber)
    }
}

/// Static link-layer parameters of the cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkParams {
    /// Rate delivered by one error-free RB, in bit/s.
    pub c: f64,
    /// Total resource blocks the pool holds.
    pub rb_count: u32,
    /// Linear SNR band the cell is engineered for.
    pub snr_range: [f64; 2],
}

impl Default for LinkParams {
    fn default() -> Self {
        LinkParams {
            c: DEFAULT_C,
            rb_count: 11,
            snr_range: [1.5, 3.0],
        }
    }
}

impl LinkParams {
    /// Rate achieved by `k` RBs at the given bit error rate.
    pub fn achievable_rate(&self, k: u32, ber: f64) -> f64 {
        self.c * k as f64 * (1.0 - ber)
    }

    /// Smallest RB count whose achievable rate meets `min_rate`; at least 1
    /// for any positive demand.
    pub fn min_rbs_for_rate(&self, min_rate: f64, ber: f64) -> u32 {
        let per_rb = self.c * (1.0 - ber);
        let guess = (min_rate / per_rb).ceil();
        let mut k = if guess.is_finite() && guess >= 1.0 {
            guess as u32
        } else {
            1
        };
        // The float division above can land one RB off at exact boundaries;
        // settle it against the defining inequality.
        while k > 1 && self.achievable_rate(k - 1, ber) >= min_rate {
            k -= 1;
        }
        while self.achievable_rate(k, ber) < min_rate {
            k += 1;
        }
        k
    }
}

/// BER of an uncoded QPSK link at linear SNR `snr`.
pub fn ber_from_snr(snr: f64) -> Result<f64, ModelError> {
    if !(snr > 0.0) {
        return Err(ModelError::NonPositiveSnr(snr));
    }
    Ok(0.5 * libm::erfc(snr.sqrt()))
}

/// Resources committed to one admitted request until `end_slot`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveGrant {
    pub request_id: RequestId,
    pub rbs: u32,
    pub processing: PowerShare,
    pub comm_power: PowerShare,
    /// Slot at which the resources return to the pool.
    pub end_slot: u64,
}

/// Free resources at the gNodeB. Processing and communication power are unit
/// budgets; RBs are counted, not individually tracked.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourcePool {
    pub total_rbs: u32,
    pub free_rbs: u32,
    pub free_processing: PowerShare,
    pub free_comm_power: PowerShare,
}

impl ResourcePool {
    /// A pool with everything free.
    pub fn full(total_rbs: u32) -> Self {
        ResourcePool {
            total_rbs,
            free_rbs: total_rbs,
            free_processing: PowerShare::FULL,
            free_comm_power: PowerShare::FULL,
        }
    }

    /// Whether the request fits in the remaining resources (boundaries
    /// inclusive: needing exactly what is free is feasible).
    pub fn feasible(&self, req: &Request, link: &LinkParams) -> bool {
        req.needed_rbs(link) <= self.free_rbs
            && req.min_processing <= self.free_processing
            && req.min_comm_power <= self.free_comm_power
    }

    /// Carves the request's minimal grant out of the pool, ending
    /// `req.lifetime` slots after `slot`.
    pub fn allocate(
        &mut self,
        req: &Request,
        slot: u64,
        link: &LinkParams,
    ) -> Result<ActiveGrant, ModelError> {
        if !self.feasible(req, link) {
            return Err(ModelError::Infeasible(req.id));
        }
        let rbs = req.needed_rbs(link);
        self.free_rbs -= rbs;
        self.free_processing = self
            .free_processing
            .checked_sub(req.min_processing)
            .expect("feasibility already checked");
        self.free_comm_power = self
            .free_comm_power
            .checked_sub(req.min_comm_power)
            .expect("feasibility already checked");
        Ok(ActiveGrant {
            request_id: req.id,
            rbs,
            processing: req.min_processing,
            comm_power: req.min_comm_power,
            end_slot: slot + req.lifetime,
        })
    }

    /// Returns a grant's resources to the pool.
    pub fn release(&mut self, grant: &ActiveGrant) -> Result<(), ModelError> {
        let rbs = self.free_rbs + grant.rbs;
        let processing = self
            .free_processing
            .checked_add(grant.processing)
            .ok_or(ModelError::ReleaseOverflow)?;
        let comm = self
            .free_comm_power
            .checked_add(grant.comm_power)
            .ok_or(ModelError::ReleaseOverflow)?;
        if rbs > self.total_rbs
            || processing > PowerShare::FULL
            || comm > PowerShare::FULL
        {
            return Err(ModelError::ReleaseOverflow);
        }
        self.free_rbs = rbs;
        self.free_processing = processing;
        self.free_comm_power = comm;
        Ok(())
    }

    /// Verifies free + outstanding grants == totals, exactly.
    pub fn check_conservation(&self, grants: &[ActiveGrant]) -> Result<(), ModelError> {
        let rbs: u64 = grants.iter().map(|g| g.rbs as u64).sum::<u64>() + self.free_rbs as u64;
        if rbs != self.total_rbs as u64 {
            return Err(ModelError::Accounting(format!(
                "rbs: free {} + granted {} != total {}",
                self.free_rbs,
                rbs - self.free_rbs as u64,
                self.total_rbs
            )));
        }
        let proc: u64 = grants.iter().map(|g| g.processing.units() as u64).sum::<u64>()
            + self.free_processing.units() as u64;
        if proc != PowerShare::SCALE as u64 {
            return Err(ModelError::Accounting(format!(
                "processing budget sums to {proc} units"
            )));
        }
        let comm: u64 = grants.iter().map(|g| g.comm_power.units() as u64).sum::<u64>()
            + self.free_comm_power.units() as u64;
        if comm != PowerShare::SCALE as u64 {
            return Err(ModelError::Accounting(format!(
                "comm power budget sums to {comm} units"
            )));
        }
        Ok(())
    }
}
