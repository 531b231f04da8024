//! Right-continuous step functions: survival curves and cumulative hazards.
//!
//! Every estimator in this crate produces a [`StepCurve`], and every summary
//! (restricted mean survival time, average hazard) is an exact integral or
//! evaluation of one. Curves are stored sparsely as jump times plus the value
//! taken from each jump onward; evaluation is a binary search, integration is
//! a rectangle sweep, so there is no grid error anywhere.

use crate::error::{Error, Result};
use crate::num::Scalar;

/// A right-continuous, nonincreasing step function on `[0, ∞)` with values
/// in `[0, 1]` and `S(t) = 1` before the first jump.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCurve<F> {
    jump_times: Vec<F>,
    values: Vec<F>,
}

impl<F: Scalar> StepCurve<F> {
    /// Build a curve from jump times and the value taken at each jump.
    ///
    /// Jump times must be finite, nonnegative and strictly increasing;
    /// values must be finite, in `[0, 1]` and nonincreasing.
    pub fn new(jump_times: Vec<F>, values: Vec<F>) -> Result<Self> {
        if jump_times.len() != values.len() {
            return Err(Error::invalid(format!(
                "jump_times/values length mismatch: {} vs {}",
                jump_times.len(),
                values.len()
            )));
        }
        let zero = F::zero();
        let one = F::one();
        let mut prev_t: Option<F> = None;
        let mut prev_v = one;
        for (t, v) in jump_times.iter().zip(values.iter()) {
            if !t.is_finite() || *t < zero {
                return Err(Error::invalid("jump times must be finite and >= 0"));
            }
            if let Some(p) = prev_t {
                if *t <= p {
                    return Err(Error::invalid("jump times must be strictly increasing"));
                }
            }
            if !v.is_finite() || *v < zero || *v > one {
                return Err(Error::invalid("curve values must lie in [0, 1]"));
            }
            if *v > prev_v {
                return Err(Error::invalid("curve values must be nonincreasing"));
            }
            prev_t = Some(*t);
            prev_v = *v;
        }
        Ok(StepCurve { jump_times, values })
    }

    /// The curve with no jumps, `S ≡ 1`.
    pub fn unit() -> Self {
        StepCurve {
            jump_times: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn jump_times(&self) -> &[F] {
        &self.jump_times
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    /// Number of jump times `<= t`.
    fn count_le(&self, t: F) -> usize {
        let mut lo = 0usize;
        let mut hi = self.jump_times.len();
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.jump_times[mid] <= t {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Number of jump times `< t`.
    fn count_lt(&self, t: F) -> usize {
        let mut lo = 0usize;
        let mut hi = self.jump_times.len();
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.jump_times[mid] < t {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// `S(t)` under right continuity; 1 before the first jump, and the last
    /// value extrapolated past the final jump.
    pub fn eval(&self, t: F) -> F {
        match self.count_le(t) {
            0 => F::one(),
            k => self.values[k - 1],
        }
    }

    /// Left limit `S(t−)`.
    pub fn eval_left(&self, t: F) -> F {
        match self.count_lt(t) {
            0 => F::one(),
            k => self.values[k - 1],
        }
    }

    /// Restricted mean survival time `∫₀^τ S(u) du`, computed exactly as a
    /// sum of rectangles.
    pub fn rmst(&self, tau: F) -> Result<F> {
        if !tau.is_finite() || tau <= F::zero() {
            return Err(Error::invalid("tau must be positive and finite"));
        }
        let mut total = F::zero();
        let mut seg_start = F::zero();
        let mut seg_value = F::one();
        for (t, v) in self.jump_times.iter().zip(self.values.iter()) {
            if *t >= tau {
                break;
            }
            total = total + seg_value * (*t - seg_start);
            seg_start = *t;
            seg_value = *v;
        }
        Ok(total + seg_value * (tau - seg_start))
    }

    /// Average hazard on `[0, τ]`: `{1 − S(τ)} / ∫₀^τ S(u) du`.
    ///
    /// Returns 0 when the curve has no mass before `τ`, and a domain error
    /// for the degenerate curve whose RMST vanishes (a jump to 0 at time 0).
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // deliberate: rejects a NaN RMST too
    pub fn average_hazard(&self, tau: F) -> Result<F> {
        let denom = self.rmst(tau)?;
        if !(denom > F::zero()) {
            return Err(Error::Domain(
                "average hazard undefined: restricted mean survival time is zero".into(),
            ));
        }
        Ok((F::one() - self.eval(tau)) / denom)
    }

    /// Largest pointwise distance to `other`, probing both one-sided limits
    /// at every jump of either curve.
    pub fn sup_distance(&self, other: &Self) -> F {
        let mut worst = F::zero();
        for t in self.jump_times.iter().chain(other.jump_times.iter()) {
            let d_right = (self.eval(*t) - other.eval(*t)).abs();
            let d_left = (self.eval_left(*t) - other.eval_left(*t)).abs();
            worst = worst.max(d_right).max(d_left);
        }
        worst
    }
}

/// A nondecreasing step function starting at 0: a cumulative hazard.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeHazard<F> {
    jump_times: Vec<F>,
    values: Vec<F>,
}

impl<F: Scalar> CumulativeHazard<F> {
    pub fn new(jump_times: Vec<F>, values: Vec<F>) -> Result<Self> {
        if jump_times.len() != values.len() {
            return Err(Error::invalid("jump_times/values length mismatch"));
        }
        let zero = F::zero();
        let mut prev_t: Option<F> = None;
        let mut prev_v = zero;
        for (t, v) in jump_times.iter().zip(values.iter()) {
            if !t.is_finite() || *t < zero {
                return Err(Error::invalid("jump times must be finite and >= 0"));
            }
            if let Some(p) = prev_t {
                if *t <= p {
                    return Err(Error::invalid("jump times must be strictly increasing"));
                }
            }
            if !v.is_finite() || *v < prev_v {
                return Err(Error::invalid(
                    "cumulative hazard must be nonnegative and nondecreasing",
                ));
            }
            prev_t = Some(*t);
            prev_v = *v;
        }
        Ok(CumulativeHazard { jump_times, values })
    }

    pub fn jump_times(&self) -> &[F] {
        &self.jump_times
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    /// `Λ(t)`, right-continuous, 0 before the first jump.
    pub fn eval(&self, t: F) -> F {
        let mut lo = 0usize;
        let mut hi = self.jump_times.len();
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.jump_times[mid] <= t {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        if lo == 0 {
            F::zero()
        } else {
            self.values[lo - 1]
        }
    }

    /// The survival curve `exp(−Λ(t))`.
    pub fn survival(&self) -> StepCurve<F> {
        let values = self.values.iter().map(|v| (-*v).exp()).collect();
        StepCurve {
            jump_times: self.jump_times.clone(),
            values,
        }
    }
}
