//! Matching evaluation, the shared preference relation and its cache.

use std::collections::HashMap;
use std::rc::Rc;

use super::{apply_move, MatchContext, Matching, SwapMove};
use crate::error::Result;
use crate::netmodel::EffectiveChannel;
use crate::powerctl::{solve_power, PowerControl, PowerSolution};
use crate::powermodel::AffinePowerForm;

/// Relative slack on `R_min` when deciding whether a rate meets its
/// requirement.
const QOS_RATE_TOL: f64 = 1e-6;

/// A move must raise EE by more than this relative margin to be approved.
const EE_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub ee: f64,
    pub qos_ok: bool,
    /// `Σ_k max(0, R_min,k − R_k)`, zero when `qos_ok`.
    pub shortfall: f64,
    pub power: PowerSolution,
}

impl Evaluation {
    /// Strict preference of the shared EE-plus-QoS order: a QoS-compliant
    /// matching needs a compliant successor with higher EE; otherwise the
    /// total shortfall must drop, or stay equal while EE rises.
    pub fn prefers(&self, before: &Evaluation) -> bool {
        let ee_up = self.ee > before.ee * (1.0 + EE_MARGIN);
        if before.qos_ok {
            return self.qos_ok && ee_up;
        }
        self.shortfall < before.shortfall || (self.shortfall == before.shortfall && ee_up)
    }
}

fn form_for(matching: &Matching, ctx: &MatchContext<'_>, keep_awake: bool) -> Result<AffinePowerForm> {
    let a = matching.assoc();
    if keep_awake {
        ctx.model.affine_form_with_active(a, a.num_ubs())
    } else {
        ctx.model.affine_form(a)
    }
}

fn evaluate_with(matching: &Matching, control: PowerControl, ctx: &MatchContext<'_>, keep_awake: bool) -> Result<Evaluation> {
    let form = form_for(matching, ctx, keep_awake)?;
    let power = solve_power(control, matching.assoc(), &form, &ctx.power)?;
    let r_min = &ctx.power.qos.r_min_bps;
    let shortfall: f64 = power.rates.rates.iter().zip(r_min).map(|(r, m)| (m - r).max(0.0)).sum();
    let qos_ok = power.rates.rates.iter().zip(r_min).all(|(r, m)| *r >= m * (1.0 - QOS_RATE_TOL));
    Ok(Evaluation {
        ee: power.ee,
        qos_ok,
        shortfall: if qos_ok { 0.0 } else { shortfall },
        power,
    })
}

/// Runs the power controller on `matching` and scores the result.
pub fn evaluate(matching: &Matching, control: PowerControl, ctx: &MatchContext<'_>) -> Result<Evaluation> {
    evaluate_with(matching, control, ctx, false)
}

/// Upper bound on the EE of `matching` under any power vector: every UE at
/// `P_max` without inter-user interference, and the network power reduced
/// to its constant and rate-dependent parts.
pub fn ee_upper_bound(matching: &Matching, ctx: &MatchContext<'_>) -> Result<f64> {
    ee_bound_with(matching, ctx, false)
}

fn ee_bound_with(matching: &Matching, ctx: &MatchContext<'_>, keep_awake: bool) -> Result<f64> {
    let form = form_for(matching, ctx, keep_awake)?;
    let ch = EffectiveChannel::new(matching.assoc(), ctx.power.tensor)?;
    let (p, noise, prelog) = (ctx.power.qos.p_max_w, ctx.power.frame.noise_power_w, ctx.power.frame.prelog());
    let mut sum = 0.0;
    let mut slope = f64::INFINITY;
    for k in 0..ch.num_ue() {
        if !ch.is_served(k) {
            continue;
        }
        let s = p * ch.ds_sq(k);
        let sinr = s / (p * ch.is(k, k) - s + noise * ch.ns(k)).max(f64::MIN_POSITIVE);
        sum += prelog * (1.0 + sinr).log2();
        slope = slope.min(form.rate_slope(k));
    }
    if sum == 0.0 {
        return Ok(0.0);
    }
    Ok(sum / (form.c0_w + slope * sum))
}

/// Full evaluation of one candidate move against the current matching.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreferenceOutcome {
    pub ee_before: f64,
    pub ee_after: f64,
    pub qos_ok_before: bool,
    pub qos_ok_after: bool,
    pub shortfall_before: f64,
    pub shortfall_after: f64,
    pub approved: bool,
}

/// Decides whether `mv` turns its UE pair into a swap-blocking pair. All
/// players share the EE-plus-QoS preference, so the four-player condition
/// reduces to [`Evaluation::prefers`] on the swapped matching.
pub fn is_swap_blocking(
    matching: &Matching,
    mv: &SwapMove,
    control: PowerControl,
    ctx: &MatchContext<'_>,
) -> Result<PreferenceOutcome> {
    let after_m = apply_move(matching, mv)?;
    let before = evaluate(matching, control, ctx)?;
    let after = evaluate(&after_m, control, ctx)?;
    Ok(PreferenceOutcome {
        ee_before: before.ee,
        ee_after: after.ee,
        qos_ok_before: before.qos_ok,
        qos_ok_after: after.qos_ok,
        shortfall_before: before.shortfall,
        shortfall_after: after.shortfall,
        approved: after.prefers(&before),
    })
}

/// Evaluations cached by exact association fingerprint.
///
/// With `keep_awake` every UBS is billed as awake and moves that idle a
/// serving UBS are never approved.
pub struct Evaluator<'c, 'a> {
    ctx: &'c MatchContext<'a>,
    control: PowerControl,
    keep_awake: bool,
    prune: bool,
    cache: HashMap<Vec<u64>, Rc<Evaluation>>,
    solves: usize,
    pruned: usize,
}

impl<'c, 'a> Evaluator<'c, 'a> {
    pub fn new(ctx: &'c MatchContext<'a>, control: PowerControl) -> Self {
        Self {
            ctx,
            control,
            keep_awake: false,
            prune: true,
            cache: HashMap::new(),
            solves: 0,
            pruned: 0,
        }
    }

    pub fn keeping_awake(mut self) -> Self {
        self.keep_awake = true;
        self
    }

    #[cfg(test)]
    pub(crate) fn without_pruning(mut self) -> Self {
        self.prune = false;
        self
    }

    pub fn control(&self) -> PowerControl {
        self.control
    }

    pub fn ctx(&self) -> &MatchContext<'a> {
        self.ctx
    }

    /// Power-controller runs so far.
    pub fn solves(&self) -> usize {
        self.solves
    }

    /// Candidates rejected by the EE bound without a solve.
    pub fn pruned(&self) -> usize {
        self.pruned
    }

    pub fn eval(&mut self, matching: &Matching) -> Result<Rc<Evaluation>> {
        let key = matching.assoc().fingerprint();
        if let Some(e) = self.cache.get(&key) {
            return Ok(e.clone());
        }
        let e = Rc::new(evaluate_with(matching, self.control, self.ctx, self.keep_awake)?);
        self.solves += 1;
        self.cache.insert(key, e.clone());
        Ok(e)
    }

    /// Applies `mv` and returns the new matching when it is approved.
    /// Structurally invalid moves are simply not approved.
    pub fn try_move(
        &mut self,
        matching: &Matching,
        current: &Evaluation,
        mv: &SwapMove,
    ) -> Result<Option<(Matching, Rc<Evaluation>)>> {
        let Ok(next) = apply_move(matching, mv) else {
            return Ok(None);
        };
        if self.keep_awake && (0..next.assoc().num_ubs()).any(|m| matching.assoc().is_active(m) && !next.assoc().is_active(m)) {
            return Ok(None);
        }
        if self.prune && current.qos_ok && !self.cache.contains_key(&next.assoc().fingerprint()) {
            // approval needs EE above the current value, which the bound may rule out
            if ee_bound_with(&next, self.ctx, self.keep_awake)? <= current.ee * (1.0 + EE_MARGIN) {
                self.pruned += 1;
                return Ok(None);
            }
        }
        let e = self.eval(&next)?;
        Ok(e.prefers(current).then_some((next, e)))
    }
}
